#include "splatgrad/visual.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "splatgrad/errors.hpp"

namespace splatgrad {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape mismatch");
    }
}

double grid_max(const ImageGrid& g) {
    double m = 0.0;
    for (double v : g.data) m = std::max(m, v);
    return m;
}

double suppress_value(double x) { return x <= 0.1 ? x : 0.1 + 0.3 * (x - 0.1); }

// Knee (x == 0.1) takes the upper-branch slope.
double suppress_slope(double x) { return x < 0.1 ? 1.0 : 0.3; }

ImageGrid elementwise_mul(const ImageGrid& a, const ImageGrid& b) {
    ImageGrid out(a.height, a.width);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    return out;
}

struct HarrisFields {
    ImageGrid m11, m12, m22, trace, det, response;
};

HarrisFields harris_fields(const ImageGrid& ix, const ImageGrid& iy, const Kernel3& window,
                           double eps) {
    HarrisFields f;
    f.m11 = convolve_same(elementwise_mul(ix, ix), window);
    f.m12 = convolve_same(elementwise_mul(ix, iy), window);
    f.m22 = convolve_same(elementwise_mul(iy, iy), window);
    f.trace = ImageGrid(ix.height, ix.width);
    f.det = ImageGrid(ix.height, ix.width);
    f.response = ImageGrid(ix.height, ix.width);
    for (std::size_t i = 0; i < f.trace.size(); ++i) {
        f.trace.data[i] = f.m11.data[i] + f.m22.data[i] + eps;
        f.det.data[i] = f.m11.data[i] * f.m22.data[i] - f.m12.data[i] * f.m12.data[i];
        // det >= 0 up to roundoff; clamp the sub-roundoff negatives
        f.response.data[i] = std::max(f.det.data[i] / f.trace.data[i], 0.0);
    }
    return f;
}

}  // namespace

EdgeMapResult edge_map(const ImageGrid& img, double sigma) {
    auto [kx, ky] = gaussian_derivative_kernels3(sigma);
    EdgeMapResult out;
    out.ix = convolve_same(img, kx);
    out.iy = convolve_same(img, ky);
    out.raw_edge = ImageGrid(img.height, img.width);
    for (std::size_t i = 0; i < out.raw_edge.size(); ++i) {
        out.raw_edge.data[i] = std::abs(out.ix.data[i]) + std::abs(out.iy.data[i]);
    }
    return out;
}

ImageGrid corner_map(const ImageGrid& ix, const ImageGrid& iy, const Kernel3& window, double eps) {
    require_same_shape(ix, iy, "corner_map");
    return harris_fields(ix, iy, window, eps).response;
}

ImageGrid normalize_and_suppress_pinned(const ImageGrid& raw, double norm) {
    ImageGrid out(raw.height, raw.width);
    if (!(norm > 0.0)) return out;
    const double inv = 1.0 / norm;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.data[i] = suppress_value(raw.data[i] * inv);
    }
    return out;
}

ImageGrid normalize_and_suppress(const ImageGrid& raw) {
    for (double v : raw.data) {
        if (v < 0.0) {
            throw ContractError("normalize_and_suppress: negative input value");
        }
    }
    return normalize_and_suppress_pinned(raw, grid_max(raw));
}

VisualNorms visual_norms(const ImageGrid& img, const VisualConfig& cfg) {
    const EdgeMapResult em = edge_map(img, cfg.kernel_sigma);
    const Kernel3 window = gaussian_kernel3(cfg.kernel_sigma);
    const ImageGrid corner_raw = corner_map(em.ix, em.iy, window, cfg.harris_eps);
    return VisualNorms{grid_max(em.raw_edge), grid_max(corner_raw)};
}

EdgeCornerMaps visual_maps_pinned(const ImageGrid& img, const VisualConfig& cfg,
                                  const VisualNorms& norms) {
    const EdgeMapResult em = edge_map(img, cfg.kernel_sigma);
    const Kernel3 window = gaussian_kernel3(cfg.kernel_sigma);
    const ImageGrid corner_raw = corner_map(em.ix, em.iy, window, cfg.harris_eps);
    EdgeCornerMaps maps;
    maps.edge = normalize_and_suppress_pinned(em.raw_edge, norms.edge_max);
    maps.corner = normalize_and_suppress_pinned(corner_raw, norms.corner_max);
    return maps;
}

EdgeCornerMaps visual_maps(const ImageGrid& img, const VisualConfig& cfg) {
    return visual_maps_pinned(img, cfg, visual_norms(img, cfg));
}

ImageGrid visual_maps_pullback(const ImageGrid& img, const VisualConfig& cfg,
                               const ImageGrid& upstream_edge, const ImageGrid& upstream_corner) {
    require_same_shape(img, upstream_edge, "visual_maps_pullback (edge upstream)");
    require_same_shape(img, upstream_corner, "visual_maps_pullback (corner upstream)");

    auto [kx, ky] = gaussian_derivative_kernels3(cfg.kernel_sigma);
    const Kernel3 window = gaussian_kernel3(cfg.kernel_sigma);
    const ImageGrid ix = convolve_same(img, kx);
    const ImageGrid iy = convolve_same(img, ky);

    ImageGrid raw_edge(img.height, img.width);
    for (std::size_t i = 0; i < raw_edge.size(); ++i) {
        raw_edge.data[i] = std::abs(ix.data[i]) + std::abs(iy.data[i]);
    }
    const HarrisFields hf = harris_fields(ix, iy, window, cfg.harris_eps);

    const double edge_max = grid_max(raw_edge);
    const double corner_max = grid_max(hf.response);

    ImageGrid d_ix(img.height, img.width);
    ImageGrid d_iy(img.height, img.width);

    // Edge path: upstream → suppression slope → detached max → |·| signs.
    if (edge_max > 0.0) {
        const double inv = 1.0 / edge_max;
        for (std::size_t i = 0; i < raw_edge.size(); ++i) {
            const double d_raw = upstream_edge.data[i] * suppress_slope(raw_edge.data[i] * inv) * inv;
            const double sx = ix.data[i] > 0.0 ? 1.0 : (ix.data[i] < 0.0 ? -1.0 : 0.0);
            const double sy = iy.data[i] > 0.0 ? 1.0 : (iy.data[i] < 0.0 ? -1.0 : 0.0);
            d_ix.data[i] += sx * d_raw;
            d_iy.data[i] += sy * d_raw;
        }
    }

    // Corner path: suppression → detached max → Harris quotient rule →
    // windowed-sum adjoints → products with ix, iy.
    if (corner_max > 0.0) {
        const double inv = 1.0 / corner_max;
        ImageGrid d_m11(img.height, img.width);
        ImageGrid d_m12(img.height, img.width);
        ImageGrid d_m22(img.height, img.width);
        for (std::size_t i = 0; i < d_m11.size(); ++i) {
            const double d_resp =
                upstream_corner.data[i] * suppress_slope(hf.response.data[i] * inv) * inv;
            const double tr = hf.trace.data[i];
            const double det = hf.det.data[i];
            d_m11.data[i] = d_resp * (hf.m22.data[i] * tr - det) / (tr * tr);
            d_m22.data[i] = d_resp * (hf.m11.data[i] * tr - det) / (tr * tr);
            d_m12.data[i] = d_resp * (-2.0 * hf.m12.data[i] / tr);
        }
        const ImageGrid d_a = convolve_same_pullback(img, window, d_m11);
        const ImageGrid d_b = convolve_same_pullback(img, window, d_m12);
        const ImageGrid d_d = convolve_same_pullback(img, window, d_m22);
        for (std::size_t i = 0; i < d_ix.size(); ++i) {
            d_ix.data[i] += 2.0 * ix.data[i] * d_a.data[i] + iy.data[i] * d_b.data[i];
            d_iy.data[i] += ix.data[i] * d_b.data[i] + 2.0 * iy.data[i] * d_d.data[i];
        }
    }

    const ImageGrid g_from_ix = convolve_same_pullback(img, kx, d_ix);
    const ImageGrid g_from_iy = convolve_same_pullback(img, ky, d_iy);
    ImageGrid grad(img.height, img.width);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad.data[i] = g_from_ix.data[i] + g_from_iy.data[i];
    }
    return grad;
}

ImageGrid sobel_edges(const ImageGrid& img, double threshold) {
    ImageGrid bin(img.height, img.width);
    for (std::size_t i = 0; i < bin.size(); ++i) {
        bin.data[i] = img.data[i] >= threshold ? 1.0 : 0.0;
    }
    Kernel3 sx;
    sx.taps = {{{-1.0, 0.0, 1.0}, {-2.0, 0.0, 2.0}, {-1.0, 0.0, 1.0}}};
    Kernel3 sy;
    sy.taps = {{{-1.0, -2.0, -1.0}, {0.0, 0.0, 0.0}, {1.0, 2.0, 1.0}}};
    const ImageGrid gx = convolve_same(bin, sx);
    const ImageGrid gy = convolve_same(bin, sy);
    ImageGrid out(img.height, img.width);
    for (int r = 1; r < img.height - 1; ++r) {
        for (int c = 1; c < img.width - 1; ++c) {
            out.at(r, c) = std::abs(gx.at(r, c)) + std::abs(gy.at(r, c));
        }
    }
    return out;
}

int count_components_above(const ImageGrid& grid, double frac_of_max) {
    const double cutoff = frac_of_max * grid_max(grid);
    const int h = grid.height;
    const int w = grid.width;
    std::vector<char> mask(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = grid.data[i] > cutoff ? 1 : 0;

    std::vector<char> seen(grid.size(), 0);
    std::vector<int> stack;
    int components = 0;
    for (int start = 0; start < static_cast<int>(grid.size()); ++start) {
        if (!mask[start] || seen[start]) continue;
        ++components;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int r = p / w, c = p % w;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    const int q = rr * w + cc;
                    if (mask[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
        }
    }
    return components;
}

}  // namespace splatgrad
