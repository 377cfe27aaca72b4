#pragma once

#include <cstddef>
#include <vector>

#include "splatgrad/camera.hpp"
#include "splatgrad/splat.hpp"
#include "splatgrad/visual.hpp"

namespace splatgrad {

struct LossWeights {
    double lambda1 = 20.0;  // edge-loss weight
    double lambda2 = 10.0;  // corner-loss weight
};

/// Per-term breakdown of one loss evaluation.
/// total = cd + lambda1·edge + lambda2·corner.
struct LossReport {
    double cd = 0.0;
    double edge = 0.0;
    double corner = 0.0;
    double total = 0.0;
    std::vector<std::pair<double, double>> per_view;  // (edge, corner) per view
};

enum class NnBackend { Auto, BruteForce, KdTree };

struct ChamferResult {
    double value = 0.0;
    GradientCloud grad_a;  // d value / d a
};

/// Symmetric squared-distance Chamfer: Σ_a min_b ‖a-b‖² + Σ_b min_a ‖a-b‖².
/// grad_a collects both terms (2(x - nn(x)) plus 2(x - y) for every y whose
/// nearest neighbor is x). Ties go to the lowest index. Auto backend uses
/// brute force up to 64 points and the k-d tree above.
ChamferResult chamfer(const PointCloud& a, const PointCloud& b, NnBackend backend = NnBackend::Auto);

struct EdgeCornerLoss {
    double edge = 0.0;
    double corner = 0.0;
    ImageGrid upstream_edge;    // d edge / d predicted edge map
    ImageGrid upstream_corner;  // d corner / d predicted corner map
};

/// Mean absolute difference per map, plus the L1 subgradients w.r.t. the
/// predicted maps (±1/pixel-count, 0 at equality).
EdgeCornerLoss edge_corner_loss(const EdgeCornerMaps& pred, const EdgeCornerMaps& gt);

/// Everything the projection→splat→visual pipeline needs.
struct PipelineConfig {
    CameraIntrinsics intrinsics;
    SplatConfig splat;
    VisualConfig visual;
};

struct TotalLossResult {
    LossReport report;
    GradientCloud grad;  // d total / d pred
};

/// CD on the 3D clouds plus per-view edge/corner L1 (means over views),
/// with the full pullback chain visual → splat → project assembled into a
/// per-point gradient. The ground-truth branch contributes no gradient.
TotalLossResult total_loss(const PointCloud& pred, const PointCloud& gt,
                           const std::vector<ViewSpec>& views, const LossWeights& weights,
                           const PipelineConfig& cfg);

/// total_loss with the predicted branch's per-view normalizers pinned to the
/// supplied values (one entry per view). This is the function whose exact
/// gradient total_loss reports; finite-difference oracles difference it.
TotalLossResult total_loss_pinned(const PointCloud& pred, const PointCloud& gt,
                                  const std::vector<ViewSpec>& views, const LossWeights& weights,
                                  const PipelineConfig& cfg,
                                  const std::vector<VisualNorms>& pred_norms);

/// The per-view normalizers total_loss computes for the predicted branch.
std::vector<VisualNorms> capture_pred_norms(const PointCloud& pred,
                                            const std::vector<ViewSpec>& views,
                                            const PipelineConfig& cfg);

/// Exact Earth Mover's Distance: minimum over bijections of Σ‖x - φ(x)‖₂,
/// solved with an O(N³) shortest-augmenting-path assignment.
/// Throws ParameterError when sizes differ or a cloud is empty.
double emd(const PointCloud& a, const PointCloud& b);

struct IcpResult {
    PointCloud aligned;
    Mat3 rotation;
    Vec3 translation;
    std::vector<double> mse_history;  // correspondence MSE after each iteration
    int iterations = 0;
    bool degenerate = false;  // some iteration fell back to identity rotation
};

/// Iterative closest point: nearest-neighbor correspondences alternated with
/// the closed-form rigid solve (SVD of the cross-covariance, reflection
/// corrected). Stops when the correspondence MSE improves by less than tol
/// or after max_iters.
IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iters = 50,
                    double tol = 1e-7);

struct EvalMetrics {
    double cd_x100 = 0.0;
    double emd_x100 = 0.0;
};

/// ICP-align pred to gt, then report 100·CD/N and 100·EMD/N (per-point
/// means, the ×100 table convention). Requires equal sizes (EMD).
EvalMetrics eval_metrics(const PointCloud& pred, const PointCloud& gt);

}  // namespace splatgrad
