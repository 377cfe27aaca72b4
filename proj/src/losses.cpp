#include "splatgrad/losses.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "splatgrad/errors.hpp"
#include "splatgrad/kdtree.hpp"

namespace splatgrad {

namespace {

double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

// Lowest-index nearest neighbor by linear scan.
void nn_brute(const PointCloud& from, const PointCloud& to, std::vector<std::size_t>& nn_idx,
              std::vector<double>& nn_d2) {
    const std::size_t n = from.size();
    nn_idx.resize(n);
    nn_d2.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        std::size_t best = 0;
        double best_d2 = dist2(from[i], to[0]);
        for (std::size_t j = 1; j < to.size(); ++j) {
            const double d2 = dist2(from[i], to[j]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = j;
            }
        }
        nn_idx[i] = best;
        nn_d2[i] = best_d2;
    }
}

void nn_kdtree(const PointCloud& from, const KdTree3& tree, std::vector<std::size_t>& nn_idx,
               std::vector<double>& nn_d2) {
    const std::size_t n = from.size();
    nn_idx.resize(n);
    nn_d2.resize(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const KdTree3::Hit hit = tree.nearest(from[i]);
        nn_idx[i] = hit.index;
        nn_d2[i] = hit.dist2;
    }
}

}  // namespace

ChamferResult chamfer(const PointCloud& a, const PointCloud& b, NnBackend backend) {
    if (a.empty() || b.empty()) {
        throw ParameterError("chamfer: clouds must be nonempty");
    }
    const bool use_tree = backend == NnBackend::KdTree ||
                          (backend == NnBackend::Auto && std::max(a.size(), b.size()) > 64);

    std::vector<std::size_t> nn_ab, nn_ba;  // a→b and b→a
    std::vector<double> d2_ab, d2_ba;
    if (use_tree) {
        const KdTree3 tree_b(b);
        const KdTree3 tree_a(a);
        nn_kdtree(a, tree_b, nn_ab, d2_ab);
        nn_kdtree(b, tree_a, nn_ba, d2_ba);
    } else {
        nn_brute(a, b, nn_ab, d2_ab);
        nn_brute(b, a, nn_ba, d2_ba);
    }

    ChamferResult out;
    out.grad_a.assign(a.size(), Vec3{});
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.value += d2_ab[i];
        out.grad_a[i] += (a[i] - b[nn_ab[i]]) * 2.0;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        out.value += d2_ba[j];
        const std::size_t i = nn_ba[j];
        out.grad_a[i] += (a[i] - b[j]) * 2.0;
    }
    return out;
}

EdgeCornerLoss edge_corner_loss(const EdgeCornerMaps& pred, const EdgeCornerMaps& gt) {
    if (!pred.edge.same_shape(gt.edge) || !pred.corner.same_shape(gt.corner)) {
        throw DimensionError("edge_corner_loss: map shape mismatch");
    }
    EdgeCornerLoss out;
    out.upstream_edge = ImageGrid(pred.edge.height, pred.edge.width);
    out.upstream_corner = ImageGrid(pred.corner.height, pred.corner.width);
    const double inv_ne = 1.0 / static_cast<double>(pred.edge.size());
    const double inv_nc = 1.0 / static_cast<double>(pred.corner.size());
    for (std::size_t i = 0; i < pred.edge.size(); ++i) {
        const double diff = pred.edge.data[i] - gt.edge.data[i];
        out.edge += std::abs(diff) * inv_ne;
        out.upstream_edge.data[i] = diff > 0.0 ? inv_ne : (diff < 0.0 ? -inv_ne : 0.0);
    }
    for (std::size_t i = 0; i < pred.corner.size(); ++i) {
        const double diff = pred.corner.data[i] - gt.corner.data[i];
        out.corner += std::abs(diff) * inv_nc;
        out.upstream_corner.data[i] = diff > 0.0 ? inv_nc : (diff < 0.0 ? -inv_nc : 0.0);
    }
    return out;
}

std::vector<VisualNorms> capture_pred_norms(const PointCloud& pred,
                                            const std::vector<ViewSpec>& views,
                                            const PipelineConfig& cfg) {
    std::vector<VisualNorms> norms(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) {
        const PixelCoords pc = project(pred, views[v], cfg.intrinsics);
        norms[v] = visual_norms(splat(pc, cfg.splat), cfg.visual);
    }
    return norms;
}

namespace {

struct ViewEval {
    double edge = 0.0;
    double corner = 0.0;
    GradientCloud grad;
};

ViewEval eval_view(const PointCloud& pred, const PointCloud& gt, const ViewSpec& view,
                   const LossWeights& weights, const PipelineConfig& cfg, double inv_views,
                   const VisualNorms* pinned) {
    const PixelCoords pc_pred = project(pred, view, cfg.intrinsics);
    const PixelCoords pc_gt = project(gt, view, cfg.intrinsics);
    const ImageGrid img_pred = splat(pc_pred, cfg.splat);
    const ImageGrid img_gt = splat(pc_gt, cfg.splat);
    const EdgeCornerMaps maps_pred = pinned ? visual_maps_pinned(img_pred, cfg.visual, *pinned)
                                            : visual_maps(img_pred, cfg.visual);
    const EdgeCornerMaps maps_gt = visual_maps(img_gt, cfg.visual);
    EdgeCornerLoss loss = edge_corner_loss(maps_pred, maps_gt);

    // Fold loss weights and the view mean into the upstreams before pulling
    // back, so one chain serves both terms.
    ImageGrid up_edge = std::move(loss.upstream_edge);
    ImageGrid up_corner = std::move(loss.upstream_corner);
    const double we = weights.lambda1 * inv_views;
    const double wc = weights.lambda2 * inv_views;
    for (double& v : up_edge.data) v *= we;
    for (double& v : up_corner.data) v *= wc;

    const ImageGrid d_img = visual_maps_pullback(img_pred, cfg.visual, up_edge, up_corner);
    std::vector<double> du, dv;
    splat_pullback(pc_pred, cfg.splat, d_img, du, dv);

    ViewEval out;
    out.edge = loss.edge;
    out.corner = loss.corner;
    out.grad = project_pullback(pred, view, cfg.intrinsics, du, dv);
    return out;
}

TotalLossResult total_loss_impl(const PointCloud& pred, const PointCloud& gt,
                                const std::vector<ViewSpec>& views, const LossWeights& weights,
                                const PipelineConfig& cfg,
                                const std::vector<VisualNorms>* pred_norms) {
    if (views.empty()) {
        throw ParameterError("total_loss: need at least one view");
    }
    if (pred_norms && pred_norms->size() != views.size()) {
        throw DimensionError("total_loss: pinned norms count does not match view count");
    }

    const ChamferResult cd = chamfer(pred, gt);

    const std::size_t nviews = views.size();
    const double inv_views = 1.0 / static_cast<double>(nviews);
    std::vector<ViewEval> evals(nviews);
    std::vector<std::exception_ptr> errors(nviews);

    // Views are independent; merge below runs in view order so the result
    // does not depend on the thread count.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t vi = 0; vi < static_cast<std::ptrdiff_t>(nviews); ++vi) {
        const std::size_t v = static_cast<std::size_t>(vi);
        try {
            evals[v] = eval_view(pred, gt, views[v], weights, cfg, inv_views,
                                 pred_norms ? &(*pred_norms)[v] : nullptr);
        } catch (...) {
            errors[v] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }

    TotalLossResult out;
    out.report.cd = cd.value;
    out.grad = cd.grad_a;
    for (std::size_t v = 0; v < nviews; ++v) {
        out.report.per_view.emplace_back(evals[v].edge, evals[v].corner);
        out.report.edge += evals[v].edge * inv_views;
        out.report.corner += evals[v].corner * inv_views;
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            out.grad[i] += evals[v].grad[i];
        }
    }
    out.report.total =
        out.report.cd + weights.lambda1 * out.report.edge + weights.lambda2 * out.report.corner;
    return out;
}

}  // namespace

TotalLossResult total_loss(const PointCloud& pred, const PointCloud& gt,
                           const std::vector<ViewSpec>& views, const LossWeights& weights,
                           const PipelineConfig& cfg) {
    return total_loss_impl(pred, gt, views, weights, cfg, nullptr);
}

TotalLossResult total_loss_pinned(const PointCloud& pred, const PointCloud& gt,
                                  const std::vector<ViewSpec>& views, const LossWeights& weights,
                                  const PipelineConfig& cfg,
                                  const std::vector<VisualNorms>& pred_norms) {
    return total_loss_impl(pred, gt, views, weights, cfg, &pred_norms);
}

EvalMetrics eval_metrics(const PointCloud& pred, const PointCloud& gt) {
    if (pred.size() != gt.size()) {
        throw ParameterError("eval_metrics: clouds must have equal size (EMD is a bijection)");
    }
    const IcpResult icp = icp_align(pred, gt);
    const double n = static_cast<double>(pred.size());
    EvalMetrics m;
    m.cd_x100 = 100.0 * chamfer(icp.aligned, gt).value / n;
    m.emd_x100 = 100.0 * emd(icp.aligned, gt) / n;
    return m;
}

}  // namespace splatgrad
