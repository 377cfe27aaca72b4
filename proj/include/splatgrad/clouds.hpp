#pragma once

#include <cstdint>

#include "splatgrad/camera.hpp"

namespace splatgrad {

/// n points on a circle of the given radius in the z=0 plane. The default
/// sweep target: 24 points at radius 0.1 project ~1.3 px apart under the
/// default camera.
PointCloud ring_cloud(int n, double radius);

/// n points sampled uniformly on the surface of an axis-aligned cube with
/// edge length `edge`, centered at the origin. Seeded and deterministic.
PointCloud cube_surface_cloud(int n, double edge, std::uint64_t seed);

/// Per-coordinate Gaussian jitter.
PointCloud jitter_cloud(const PointCloud& cloud, double stddev, std::uint64_t seed);

}  // namespace splatgrad
