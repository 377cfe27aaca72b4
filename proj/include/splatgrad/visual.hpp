#pragma once

#include "splatgrad/raster.hpp"

namespace splatgrad {

/// Parameters of the edge/corner extraction stage.
struct VisualConfig {
    double kernel_sigma = 1.0;  // σ of the 3×3 Gaussian / derivative kernels
    double harris_eps = 1e-6;   // stabilizer in det(M)/(trace(M)+eps)
};

/// Edge and corner maps after max-normalization and suppression.
/// Values lie in [0, 0.37].
struct EdgeCornerMaps {
    ImageGrid edge;
    ImageGrid corner;
};

struct EdgeMapResult {
    ImageGrid raw_edge;  // |ix| + |iy|
    ImageGrid ix;
    ImageGrid iy;
};

/// Gaussian-derivative gradients and their L1 magnitude.
EdgeMapResult edge_map(const ImageGrid& img, double sigma);

/// Harris response (det(M)/(trace(M)+eps)) with the window-weighted structure
/// tensor built from ix, iy. Sub-roundoff negatives are clamped to 0.
ImageGrid corner_map(const ImageGrid& ix, const ImageGrid& iy, const Kernel3& window, double eps);

/// Divide by max (all zeros when max == 0), then re-map through the
/// piecewise suppression: x for x <= 0.1, else 0.1 + 0.3·(x - 0.1).
/// Throws ContractError on negative input values.
ImageGrid normalize_and_suppress(const ImageGrid& raw);

/// normalize_and_suppress with an externally pinned normalizer, used where
/// the max must be held constant (finite-difference oracles). norm <= 0
/// yields an all-zero map.
ImageGrid normalize_and_suppress_pinned(const ImageGrid& raw, double norm);

/// The max values the two maps would be normalized by. Lets a caller pin
/// them across perturbed evaluations.
struct VisualNorms {
    double edge_max = 0.0;
    double corner_max = 0.0;
};
VisualNorms visual_norms(const ImageGrid& img, const VisualConfig& cfg);

/// Full edge/corner pipeline: derivative kernels → raw edge map → Harris
/// response → per-map normalization → suppression.
EdgeCornerMaps visual_maps(const ImageGrid& img, const VisualConfig& cfg);

/// Same pipeline with pinned normalizers (the gradient contract treats the
/// normalizing max as a constant; oracles evaluate this variant).
EdgeCornerMaps visual_maps_pinned(const ImageGrid& img, const VisualConfig& cfg,
                                  const VisualNorms& norms);

/// Reverse mode through suppression (slopes 1 / 0.3, knee takes 0.3), the
/// detached max, the Harris quotient, the windowed sums, |·| (subgradient 0
/// at 0) and the convolutions. Returns the gradient on img.
ImageGrid visual_maps_pullback(const ImageGrid& img, const VisualConfig& cfg,
                               const ImageGrid& upstream_edge, const ImageGrid& upstream_corner);

/// Preprocessing only (not differentiable): binarize at threshold, then
/// |Sobel_x| + |Sobel_y|. The one-pixel border ring of the output is zero so
/// image boundaries do not read as edges.
ImageGrid sobel_edges(const ImageGrid& img, double threshold);

/// 8-connected components of {pixel > frac_of_max · max(grid)}. Used by the
/// σ² sweep to quantify connectivity.
int count_components_above(const ImageGrid& grid, double frac_of_max);

}  // namespace splatgrad
