#include "splatgrad/serial_ref.hpp"

#include <cmath>

#include "splatgrad/errors.hpp"

namespace splatgrad::serial {

ImageGrid convolve_same(const ImageGrid& img, const Kernel3& k) {
    const int h = img.height;
    const int w = img.width;
    ImageGrid out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int di = -1; di <= 1; ++di) {
                const int rr = r - di;
                if (rr < 0 || rr >= h) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    const int cc = c - dj;
                    if (cc < 0 || cc >= w) continue;
                    acc += k.taps[di + 1][dj + 1] * img.at(rr, cc);
                }
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

ImageGrid convolve_same_pullback(const ImageGrid& img, const Kernel3& k,
                                 const ImageGrid& upstream) {
    const int h = img.height;
    const int w = img.width;
    ImageGrid grad(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int di = -1; di <= 1; ++di) {
                const int rr = r + di;
                if (rr < 0 || rr >= h) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    const int cc = c + dj;
                    if (cc < 0 || cc >= w) continue;
                    acc += k.taps[di + 1][dj + 1] * upstream.at(rr, cc);
                }
            }
            grad.at(r, c) = acc;
        }
    }
    return grad;
}

ImageGrid splat(const PixelCoords& coords, const SplatConfig& cfg) {
    cfg.validate();
    ImageGrid img(cfg.height, cfg.width);
    const double radius = cfg.effective_radius();
    const double two_sigma2 = 2.0 * cfg.sigma2;
    for (int r = 0; r < cfg.height; ++r) {
        for (std::size_t i = 0; i < coords.size(); ++i) {
            const double dr = r - coords.v[i];
            if (std::abs(dr) > radius) continue;
            const double wr = std::exp(-(dr * dr) / two_sigma2);
            for (int c = 0; c < cfg.width; ++c) {
                const double dc = c - coords.u[i];
                if (std::abs(dc) > radius) continue;
                img.at(r, c) += wr * std::exp(-(dc * dc) / two_sigma2);
            }
        }
    }
    return img;
}

void splat_pullback(const PixelCoords& coords, const SplatConfig& cfg, const ImageGrid& upstream,
                    std::vector<double>& grad_u, std::vector<double>& grad_v) {
    cfg.validate();
    if (upstream.height != cfg.height || upstream.width != cfg.width) {
        throw DimensionError("serial splat_pullback: upstream shape mismatch");
    }
    const std::size_t n = coords.size();
    grad_u.assign(n, 0.0);
    grad_v.assign(n, 0.0);
    const double radius = cfg.effective_radius();
    const double two_sigma2 = 2.0 * cfg.sigma2;
    const double inv_sigma2 = 1.0 / cfg.sigma2;
    for (std::size_t i = 0; i < n; ++i) {
        for (int r = 0; r < cfg.height; ++r) {
            const double dr = r - coords.v[i];
            if (std::abs(dr) > radius) continue;
            const double wr = std::exp(-(dr * dr) / two_sigma2);
            for (int c = 0; c < cfg.width; ++c) {
                const double dc = c - coords.u[i];
                if (std::abs(dc) > radius) continue;
                const double wc = std::exp(-(dc * dc) / two_sigma2);
                const double up = upstream.at(r, c);
                grad_u[i] += up * wr * wc * dc * inv_sigma2;
                grad_v[i] += up * wr * wc * dr * inv_sigma2;
            }
        }
    }
}

ChamferRef chamfer_ref(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) {
        throw ParameterError("chamfer_ref: clouds must be nonempty");
    }
    auto d2 = [](const Vec3& x, const Vec3& y) {
        const double dx = x.x - y.x;
        const double dy = x.y - y.y;
        const double dz = x.z - y.z;
        return dx * dx + dy * dy + dz * dz;
    };
    ChamferRef out;
    out.grad_a.assign(a.size(), Vec3{});
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t best = 0;
        double best_d2 = d2(a[i], b[0]);
        for (std::size_t j = 1; j < b.size(); ++j) {
            const double d = d2(a[i], b[j]);
            if (d < best_d2) {
                best_d2 = d;
                best = j;
            }
        }
        out.value += best_d2;
        out.grad_a[i] += (a[i] - b[best]) * 2.0;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        std::size_t best = 0;
        double best_d2 = d2(b[j], a[0]);
        for (std::size_t i = 1; i < a.size(); ++i) {
            const double d = d2(b[j], a[i]);
            if (d < best_d2) {
                best_d2 = d;
                best = i;
            }
        }
        out.value += best_d2;
        out.grad_a[best] += (a[best] - b[j]) * 2.0;
    }
    return out;
}

}  // namespace splatgrad::serial
