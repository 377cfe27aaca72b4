#pragma once

#include "splatgrad/camera.hpp"
#include "splatgrad/raster.hpp"
#include "splatgrad/splat.hpp"

namespace splatgrad::serial {

// Plain sequential implementations of the parallelized kernels. Tests hold
// the OpenMP paths bit-identical to these; the bench target compares their
// speed. chamfer_ref is also the O(N²) oracle for the k-d tree backend.

ImageGrid convolve_same(const ImageGrid& img, const Kernel3& k);

ImageGrid convolve_same_pullback(const ImageGrid& img, const Kernel3& k, const ImageGrid& upstream);

/// Naive pixels×points double loop (the definition, no scatter windows).
ImageGrid splat(const PixelCoords& coords, const SplatConfig& cfg);

void splat_pullback(const PixelCoords& coords, const SplatConfig& cfg, const ImageGrid& upstream,
                    std::vector<double>& grad_u, std::vector<double>& grad_v);

struct ChamferRef {
    double value = 0.0;
    GradientCloud grad_a;
};

/// Brute-force symmetric Chamfer with lowest-index tie-breaking.
ChamferRef chamfer_ref(const PointCloud& a, const PointCloud& b);

}  // namespace splatgrad::serial
