#pragma once

#include <vector>

#include "splatgrad/camera.hpp"
#include "splatgrad/raster.hpp"

namespace splatgrad {

/// Gaussian splatting parameters. Activations further than truncation_radius
/// pixels from a point (per axis) are exactly 0 in both the forward pass and
/// the pullback. truncation_radius <= 0 selects the default 9·sqrt(sigma2),
/// far enough out that the cutoff jump (~1e-18) is invisible to
/// finite-difference checks. Explicit radii must be >= 3·sqrt(sigma2).
struct SplatConfig {
    double sigma2 = 0.5;
    int height = 64;
    int width = 64;
    double truncation_radius = 0.0;

    double effective_radius() const;
    void validate() const;  // throws ParameterError
};

/// I[r][c] = Σ_i exp(-(r-v_i)²/(2σ²)) · exp(-(c-u_i)²/(2σ²)), truncated.
/// An empty coordinate list yields an all-zero image.
ImageGrid splat(const PixelCoords& coords, const SplatConfig& cfg);

/// Gradient of <upstream, splat(coords)> with respect to each (u_i, v_i).
/// Truncation matches the forward pass exactly.
void splat_pullback(const PixelCoords& coords, const SplatConfig& cfg, const ImageGrid& upstream,
                    std::vector<double>& grad_u, std::vector<double>& grad_v);

}  // namespace splatgrad
