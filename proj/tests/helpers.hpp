#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "splatgrad/camera.hpp"
#include "splatgrad/raster.hpp"
#include "splatgrad/rng.hpp"

namespace testutil {

inline double rel_inf_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 1e-10;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return diff / scale;
}

template <typename F>
std::vector<double> central_fd(std::vector<double> x, double h, F&& f) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f(x);
        x[i] = saved - h;
        const double fm = f(x);
        x[i] = saved;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline splatgrad::ImageGrid random_grid(splatgrad::Rng& rng, int h, int w) {
    splatgrad::ImageGrid g(h, w);
    for (double& v : g.data) v = rng.normal();
    return g;
}

inline splatgrad::PointCloud random_cloud(splatgrad::Rng& rng, int n, double lo = 0.0,
                                          double hi = 1.0) {
    splatgrad::PointCloud c(n);
    for (auto& p : c) {
        p = splatgrad::Vec3{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
    }
    return c;
}

inline double grid_inner(const splatgrad::ImageGrid& a, const splatgrad::ImageGrid& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

inline std::vector<double> flatten(const splatgrad::PointCloud& c) {
    std::vector<double> out;
    out.reserve(c.size() * 3);
    for (const auto& p : c) {
        out.push_back(p.x);
        out.push_back(p.y);
        out.push_back(p.z);
    }
    return out;
}

inline splatgrad::PointCloud unflatten(const std::vector<double>& x) {
    splatgrad::PointCloud c(x.size() / 3);
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = splatgrad::Vec3{x[3 * i], x[3 * i + 1], x[3 * i + 2]};
    }
    return c;
}

inline bool all_finite(const splatgrad::ImageGrid& g) {
    for (double v : g.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// fresh scratch directory under the system temp root
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("splatgrad_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
