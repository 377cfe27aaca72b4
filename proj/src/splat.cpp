#include "splatgrad/splat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splatgrad/errors.hpp"

namespace splatgrad {

double SplatConfig::effective_radius() const {
    return truncation_radius > 0.0 ? truncation_radius : 9.0 * std::sqrt(sigma2);
}

void SplatConfig::validate() const {
    if (!(sigma2 > 0.0)) {
        throw ParameterError("SplatConfig: sigma2 must be positive");
    }
    if (height < 1 || width < 1) {
        throw ParameterError("SplatConfig: image dimensions must be positive");
    }
    if (truncation_radius > 0.0 && truncation_radius < 3.0 * std::sqrt(sigma2)) {
        throw ParameterError("SplatConfig: truncation_radius must be >= 3*sqrt(sigma2)");
    }
}

namespace {

struct Window {
    int r0, r1, c0, c1;  // inclusive pixel ranges touching the point
    bool empty;
};

Window point_window(double u, double v, double radius, int h, int w) {
    Window win;
    win.r0 = std::max(0, static_cast<int>(std::ceil(v - radius)));
    win.r1 = std::min(h - 1, static_cast<int>(std::floor(v + radius)));
    win.c0 = std::max(0, static_cast<int>(std::ceil(u - radius)));
    win.c1 = std::min(w - 1, static_cast<int>(std::floor(u + radius)));
    win.empty = win.r0 > win.r1 || win.c0 > win.c1;
    return win;
}

}  // namespace

ImageGrid splat(const PixelCoords& coords, const SplatConfig& cfg) {
    cfg.validate();
    const int h = cfg.height;
    const int w = cfg.width;
    ImageGrid img(h, w);
    const std::size_t n = coords.size();
    if (n == 0) return img;

    const double radius = cfg.effective_radius();
    const double two_sigma2 = 2.0 * cfg.sigma2;

    std::vector<Window> wins(n);
    std::vector<std::vector<double>> colw(n);
    for (std::size_t i = 0; i < n; ++i) {
        wins[i] = point_window(coords.u[i], coords.v[i], radius, h, w);
        if (wins[i].empty) continue;
        colw[i].resize(wins[i].c1 - wins[i].c0 + 1);
        for (int c = wins[i].c0; c <= wins[i].c1; ++c) {
            const double d = c - coords.u[i];
            colw[i][c - wins[i].c0] = std::exp(-(d * d) / two_sigma2);
        }
    }

    // Row-parallel scatter. Each row accumulates its points in index order,
    // so the result is independent of the thread count and bit-identical to
    // the sequential double loop.
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        double* row = &img.at(r, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const Window& win = wins[i];
            if (win.empty || r < win.r0 || r > win.r1) continue;
            const double d = r - coords.v[i];
            const double wr = std::exp(-(d * d) / two_sigma2);
            const double* cw = colw[i].data();
            for (int c = win.c0; c <= win.c1; ++c) {
                row[c] += wr * cw[c - win.c0];
            }
        }
    }
    return img;
}

void splat_pullback(const PixelCoords& coords, const SplatConfig& cfg, const ImageGrid& upstream,
                    std::vector<double>& grad_u, std::vector<double>& grad_v) {
    cfg.validate();
    if (upstream.height != cfg.height || upstream.width != cfg.width) {
        throw DimensionError("splat_pullback: upstream is " + std::to_string(upstream.height) +
                             "x" + std::to_string(upstream.width) + ", config expects " +
                             std::to_string(cfg.height) + "x" + std::to_string(cfg.width));
    }
    const std::size_t n = coords.size();
    grad_u.assign(n, 0.0);
    grad_v.assign(n, 0.0);
    const double radius = cfg.effective_radius();
    const double two_sigma2 = 2.0 * cfg.sigma2;
    const double inv_sigma2 = 1.0 / cfg.sigma2;

    // d/du exp(-(c-u)²/2σ²) = ((c-u)/σ²)·exp(-(c-u)²/2σ²)
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const Window win = point_window(coords.u[i], coords.v[i], radius, cfg.height, cfg.width);
        if (win.empty) continue;
        double gu = 0.0, gv = 0.0;
        for (int r = win.r0; r <= win.r1; ++r) {
            const double dr = r - coords.v[i];
            const double wr = std::exp(-(dr * dr) / two_sigma2);
            for (int c = win.c0; c <= win.c1; ++c) {
                const double dc = c - coords.u[i];
                const double wc = std::exp(-(dc * dc) / two_sigma2);
                const double up = upstream.at(r, c);
                gu += up * wr * wc * dc * inv_sigma2;
                gv += up * wr * wc * dr * inv_sigma2;
            }
        }
        grad_u[i] = gu;
        grad_v[i] = gv;
    }
}

}  // namespace splatgrad
