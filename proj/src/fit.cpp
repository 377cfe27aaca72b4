#include "splatgrad/fit.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "splatgrad/errors.hpp"
#include "splatgrad/rng.hpp"

namespace splatgrad {

void FitConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ParameterError("FitConfig: learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ParameterError("FitConfig: beta1 must be in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw ParameterError("FitConfig: beta2 must be in (0,1)");
    if (!(adam_eps > 0.0)) throw ParameterError("FitConfig: adam_eps must be positive");
    if (views_per_step < 1) throw ParameterError("FitConfig: views_per_step must be positive");
    if (phase1_steps < 1) throw ParameterError("FitConfig: phase1_steps must be positive");
    if (phase2_steps < 0) throw ParameterError("FitConfig: phase2_steps must be non-negative");
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               const FitConfig& cfg) {
    const std::size_t n = params.size();
    if (grad.size() != n) {
        throw DimensionError("adam_step: gradient length " + std::to_string(grad.size()) +
                             " vs parameter length " + std::to_string(n));
    }
    if (state.m.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    if (state.m.size() != n || state.v.size() != n) {
        throw DimensionError("adam_step: state length does not match parameters");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

namespace detail {

void validate_loss_state(const LossReport& report, const GradientCloud& grad, int step) {
    auto bad = [](double v) { return !std::isfinite(v); };
    const char* term = nullptr;
    if (bad(report.cd)) term = "cd";
    else if (bad(report.edge)) term = "edge";
    else if (bad(report.corner)) term = "corner";
    else if (bad(report.total)) term = "total";
    if (term) {
        throw FitError("fit: non-finite loss term '" + std::string(term) + "' at step " +
                       std::to_string(step));
    }
    for (const Vec3& g : grad) {
        if (bad(g.x) || bad(g.y) || bad(g.z)) {
            throw FitError("fit: non-finite gradient at step " + std::to_string(step));
        }
    }
}

}  // namespace detail

FitResult fit(const PointCloud& initial, const PointCloud& target,
              const std::vector<ViewSpec>& pool, const FitConfig& cfg,
              const PipelineConfig& pipeline) {
    cfg.validate();
    if (static_cast<std::size_t>(cfg.views_per_step) > pool.size()) {
        throw ParameterError("fit: views_per_step exceeds pool size");
    }

    FitResult result;
    result.cloud = initial;
    const int total_steps = cfg.phase1_steps + cfg.phase2_steps;
    result.trace.history.reserve(total_steps);
    result.trace.step_seconds.reserve(total_steps);

    std::vector<double> params(initial.size() * 3);
    for (std::size_t i = 0; i < initial.size(); ++i) {
        params[3 * i] = initial[i].x;
        params[3 * i + 1] = initial[i].y;
        params[3 * i + 2] = initial[i].z;
    }
    AdamState state;
    Rng view_stream(cfg.seed);
    std::vector<double> flat_grad(params.size());

    for (int step = 0; step < total_steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const LossWeights& weights = step < cfg.phase1_steps ? cfg.weights_phase1
                                                             : cfg.weights_phase2;
        const std::vector<ViewSpec> views =
            sample_views(pool, static_cast<std::size_t>(cfg.views_per_step), view_stream.next_u64());

        for (std::size_t i = 0; i < result.cloud.size(); ++i) {
            result.cloud[i] = Vec3{params[3 * i], params[3 * i + 1], params[3 * i + 2]};
        }
        const TotalLossResult loss = total_loss(result.cloud, target, views, weights, pipeline);
        detail::validate_loss_state(loss.report, loss.grad, step);

        if (cfg.snapshot_interval > 0 && step % cfg.snapshot_interval == 0) {
            result.trace.snapshots.push_back(Snapshot{step, result.cloud});
        }
        result.trace.history.push_back(loss.report);

        for (std::size_t i = 0; i < loss.grad.size(); ++i) {
            flat_grad[3 * i] = loss.grad[i].x;
            flat_grad[3 * i + 1] = loss.grad[i].y;
            flat_grad[3 * i + 2] = loss.grad[i].z;
        }
        adam_step(params, flat_grad, state, cfg);

        const auto t1 = std::chrono::steady_clock::now();
        result.trace.step_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }

    for (std::size_t i = 0; i < result.cloud.size(); ++i) {
        result.cloud[i] = Vec3{params[3 * i], params[3 * i + 1], params[3 * i + 2]};
    }
    return result;
}

}  // namespace splatgrad
