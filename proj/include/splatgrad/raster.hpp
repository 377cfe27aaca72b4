#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace splatgrad {

/// Dense row-major H×W grid of doubles. The common currency for projected
/// images, edge maps and corner maps.
struct ImageGrid {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // row-major, height*width entries

    ImageGrid() = default;
    ImageGrid(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const ImageGrid& o) const { return height == o.height && width == o.width; }
};

/// Fixed 3×3 convolution kernel. taps[row][col].
struct Kernel3 {
    std::array<std::array<double, 3>, 3> taps{};
};

/// Normalized 3×3 Gaussian: taps ∝ exp(-(di²+dj²)/(2σ²)), sum = 1.
/// Throws ParameterError for sigma <= 0.
Kernel3 gaussian_kernel3(double sigma);

/// 3×3 Gaussian derivative pair (Kx, Ky). Kx[i][j] ∝ -dj·exp(-(di²+dj²)/(2σ²))
/// so that true convolution with Kx differentiates along columns (x); Ky is
/// the transpose. Each sums to 0 and is scaled so the largest |tap| is 1.
std::pair<Kernel3, Kernel3> gaussian_derivative_kernels3(double sigma);

/// Same-size true convolution (kernel flipped) with zero padding.
/// Requires height, width >= 3.
ImageGrid convolve_same(const ImageGrid& img, const Kernel3& k);

/// Adjoint of convolve_same: gradient of <upstream, convolve_same(img, k)>
/// with respect to img, i.e. correlation of upstream with k (zero padded).
ImageGrid convolve_same_pullback(const ImageGrid& img, const Kernel3& k, const ImageGrid& upstream);

}  // namespace splatgrad
