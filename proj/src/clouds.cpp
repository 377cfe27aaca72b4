#include "splatgrad/clouds.hpp"

#include <cmath>

#include "splatgrad/rng.hpp"

namespace splatgrad {

PointCloud ring_cloud(int n, double radius) {
    PointCloud out;
    out.reserve(n);
    const double step = 6.283185307179586476925286766559 / n;
    for (int i = 0; i < n; ++i) {
        out.push_back(Vec3{radius * std::cos(step * i), radius * std::sin(step * i), 0.0});
    }
    return out;
}

PointCloud cube_surface_cloud(int n, double edge, std::uint64_t seed) {
    Rng rng(seed);
    const double half = edge * 0.5;
    PointCloud out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int face = static_cast<int>(rng.below(6));
        const double s = rng.uniform(-half, half);
        const double t = rng.uniform(-half, half);
        switch (face) {
            case 0: out.push_back(Vec3{half, s, t}); break;
            case 1: out.push_back(Vec3{-half, s, t}); break;
            case 2: out.push_back(Vec3{s, half, t}); break;
            case 3: out.push_back(Vec3{s, -half, t}); break;
            case 4: out.push_back(Vec3{s, t, half}); break;
            default: out.push_back(Vec3{s, t, -half}); break;
        }
    }
    return out;
}

PointCloud jitter_cloud(const PointCloud& cloud, double stddev, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud out = cloud;
    for (Vec3& p : out) {
        p.x += rng.normal(0.0, stddev);
        p.y += rng.normal(0.0, stddev);
        p.z += rng.normal(0.0, stddev);
    }
    return out;
}

}  // namespace splatgrad
