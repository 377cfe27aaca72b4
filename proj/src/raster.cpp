#include "splatgrad/raster.hpp"

#include <cmath>
#include <string>

#include "splatgrad/errors.hpp"

namespace splatgrad {

namespace {

void require_at_least_3x3(const ImageGrid& img) {
    if (img.height < 3 || img.width < 3) {
        throw DimensionError("image must be at least 3x3, got " + std::to_string(img.height) +
                             "x" + std::to_string(img.width));
    }
}

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape mismatch (" + std::to_string(a.height) +
                             "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) +
                             "x" + std::to_string(b.width) + ")");
    }
}

}  // namespace

Kernel3 gaussian_kernel3(double sigma) {
    if (!(sigma > 0.0)) {
        throw ParameterError("gaussian_kernel3: sigma must be positive");
    }
    Kernel3 k;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double di = i - 1;
            const double dj = j - 1;
            k.taps[i][j] = std::exp(-(di * di + dj * dj) * inv);
            sum += k.taps[i][j];
        }
    }
    for (auto& row : k.taps)
        for (double& t : row) t /= sum;
    return k;
}

std::pair<Kernel3, Kernel3> gaussian_derivative_kernels3(double sigma) {
    if (!(sigma > 0.0)) {
        throw ParameterError("gaussian_derivative_kernels3: sigma must be positive");
    }
    Kernel3 kx;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    // Largest magnitude sits at (di, |dj|) = (0, 1).
    const double scale = 1.0 / std::exp(-inv);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double di = i - 1;
            const double dj = j - 1;
            kx.taps[i][j] = -dj * std::exp(-(di * di + dj * dj) * inv) * scale;
        }
    }
    Kernel3 ky;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ky.taps[i][j] = kx.taps[j][i];
    return {kx, ky};
}

ImageGrid convolve_same(const ImageGrid& img, const Kernel3& k) {
    require_at_least_3x3(img);
    const int h = img.height;
    const int w = img.width;
    ImageGrid out(h, w);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            // true convolution: out(r,c) = sum k(di,dj)·img(r-di, c-dj)
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
    require_at_least_3x3(img);
    require_same_shape(img, upstream, "convolve_same_pullback");
    const int h = img.height;
    const int w = img.width;
    ImageGrid grad(h, w);
    // Adjoint of zero-padded convolution = zero-padded correlation.
#pragma omp parallel for schedule(static)
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

}  // namespace splatgrad
