#pragma once

#include <cstdint>
#include <vector>

#include "splatgrad/losses.hpp"

namespace splatgrad {

/// Optimizer and schedule settings for the coordinate-fitting demonstrator.
/// learning_rate defaults to the value tuned for network training; direct
/// coordinate fitting typically wants a larger one (the benchmark uses
/// 0.005).
struct FitConfig {
    double learning_rate = 0.00005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int views_per_step = 4;
    int phase1_steps = 2000;
    int phase2_steps = 500;
    LossWeights weights_phase1{20.0, 10.0};
    LossWeights weights_phase2{2.0, 0.2};
    std::uint64_t seed = 0;
    int snapshot_interval = 0;  // 0 = no snapshots

    void validate() const;  // throws ParameterError
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

/// One bias-corrected Adam update, in place. State vectors are lazily sized
/// on first use. Throws DimensionError on length mismatch.
void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               const FitConfig& cfg);

struct Snapshot {
    int step;
    PointCloud cloud;
};

struct FitTrace {
    std::vector<LossReport> history;     // one entry per executed step
    std::vector<double> step_seconds;    // wall time per step (not part of any numeric report)
    std::vector<Snapshot> snapshots;
};

struct FitResult {
    PointCloud cloud;
    FitTrace trace;
};

/// Two-phase gradient descent on raw point coordinates: phase 1 with
/// weights_phase1, phase 2 with weights_phase2. Each step samples
/// views_per_step distinct views from the pool via a stream derived from
/// cfg.seed, evaluates total_loss and applies one Adam update. Aborts with
/// FitError naming the step and term if the loss or gradient goes
/// non-finite.
FitResult fit(const PointCloud& initial, const PointCloud& target,
              const std::vector<ViewSpec>& pool, const FitConfig& cfg,
              const PipelineConfig& pipeline);

namespace detail {
/// Non-finite guard used by the fit loop; exposed for tests.
void validate_loss_state(const LossReport& report, const GradientCloud& grad, int step);
}  // namespace detail

}  // namespace splatgrad
