#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "splatgrad/errors.hpp"
#include "splatgrad/raster.hpp"
#include "splatgrad/serial_ref.hpp"

using namespace splatgrad;

namespace {

Kernel3 identity_kernel() {
    Kernel3 k;
    k.taps[1][1] = 1.0;
    return k;
}

double tap_sum(const Kernel3& k) {
    double s = 0.0;
    for (const auto& row : k.taps)
        for (double t : row) s += t;
    return s;
}

}  // namespace

TEST_CASE("gaussian_kernel3 tends to the uniform kernel for large sigma") {
    const Kernel3 k = gaussian_kernel3(100.0);
    for (const auto& row : k.taps)
        for (double t : row) CHECK(std::abs(t - 1.0 / 9.0) < 1e-6);
}

TEST_CASE("gaussian_kernel3 symmetry at sigma=1") {
    const Kernel3 k = gaussian_kernel3(1.0);
    for (const auto& row : k.taps)
        for (double t : row) CHECK(k.taps[1][1] >= t);
    CHECK(k.taps[0][0] == k.taps[0][2]);
    CHECK(k.taps[0][0] == k.taps[2][0]);
    CHECK(k.taps[0][0] == k.taps[2][2]);
    CHECK(std::abs(tap_sum(k) - 1.0) < 1e-12);
}

TEST_CASE("gaussian_kernel3 taps are strictly positive and normalized") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const Kernel3 k = gaussian_kernel3(rng.uniform(0.1, 10.0));
        for (const auto& row : k.taps)
            for (double t : row) CHECK(t > 0.0);
        CHECK(std::abs(tap_sum(k) - 1.0) < 1e-12);
    }
}

TEST_CASE("gaussian_kernel3 rejects non-positive sigma") {
    CHECK_THROWS_AS(gaussian_kernel3(0.0), ParameterError);
    CHECK_THROWS_AS(gaussian_kernel3(-1.0), ParameterError);
}

TEST_CASE("derivative kernels sum to zero and transpose into each other") {
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
        const auto [kx, ky] = gaussian_derivative_kernels3(rng.uniform(0.3, 4.0));
        CHECK(std::abs(tap_sum(kx)) < 1e-12);
        CHECK(std::abs(tap_sum(ky)) < 1e-12);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) CHECK(ky.taps[r][c] == kx.taps[c][r]);
    }
}

TEST_CASE("derivative kernel center column is zero, max |tap| is one") {
    const auto [kx, ky] = gaussian_derivative_kernels3(1.0);
    for (int r = 0; r < 3; ++r) CHECK(kx.taps[r][1] == 0.0);
    double max_abs = 0.0;
    for (const auto& row : kx.taps)
        for (double t : row) max_abs = std::max(max_abs, std::abs(t));
    CHECK(max_abs == 1.0);
    CHECK_THROWS_AS(gaussian_derivative_kernels3(0.0), ParameterError);
}

TEST_CASE("zero-sum kernel kills constant images in the interior") {
    ImageGrid img(7, 9);
    for (double& v : img.data) v = 3.25;
    const auto [kx, ky] = gaussian_derivative_kernels3(1.0);
    const ImageGrid out = convolve_same(img, kx);
    for (int r = 1; r < img.height - 1; ++r)
        for (int c = 1; c < img.width - 1; ++c) CHECK(std::abs(out.at(r, c)) < 1e-12);
}

TEST_CASE("identity kernel reproduces the image") {
    Rng rng(13);
    const ImageGrid img = testutil::random_grid(rng, 5, 6);
    const ImageGrid out = convolve_same(img, identity_kernel());
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("interior pixel of a known 5x5 convolution matches the 9-term sum") {
    // independent oracle: rebuild the kernel from the formula and take the
    // flipped-kernel dot product by hand
    ImageGrid img(5, 5);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) img.at(r, c) = 1.0 + r * 0.5 + c * c * 0.25;

    double taps[3][3];
    double norm = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            taps[i][j] = std::exp(-((i - 1.0) * (i - 1.0) + (j - 1.0) * (j - 1.0)) / 2.0);
            norm += taps[i][j];
        }
    double expected = 0.0;
    const int r = 2, c = 2;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            expected += taps[di + 1][dj + 1] / norm * img.at(r - di, c - dj);
        }

    const ImageGrid out = convolve_same(img, gaussian_kernel3(1.0));
    CHECK(std::abs(out.at(r, c) - expected) < 1e-12);
}

TEST_CASE("convolution rejects images smaller than the kernel") {
    ImageGrid img(2, 5);
    img.data.assign(10, 0.0);
    CHECK_THROWS_AS(convolve_same(img, identity_kernel()), DimensionError);
}

TEST_CASE("convolution is linear") {
    Rng rng(14);
    const ImageGrid a = testutil::random_grid(rng, 6, 6);
    const ImageGrid b = testutil::random_grid(rng, 6, 6);
    const Kernel3 k = gaussian_kernel3(0.9);
    const double alpha = 1.7, beta = -0.4;
    ImageGrid mix(6, 6);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = alpha * a.data[i] + beta * b.data[i];
    const ImageGrid lhs = convolve_same(mix, k);
    const ImageGrid ca = convolve_same(a, k);
    const ImageGrid cb = convolve_same(b, k);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(std::abs(lhs.data[i] - (alpha * ca.data[i] + beta * cb.data[i])) < 1e-10);
    }
}

TEST_CASE("pullback of zero upstream is zero, identity kernel passes upstream through") {
    Rng rng(15);
    const ImageGrid img = testutil::random_grid(rng, 5, 5);
    const ImageGrid zeros(5, 5);
    const ImageGrid g0 = convolve_same_pullback(img, gaussian_kernel3(1.0), zeros);
    for (double v : g0.data) CHECK(v == 0.0);

    const ImageGrid up = testutil::random_grid(rng, 5, 5);
    const ImageGrid g1 = convolve_same_pullback(img, identity_kernel(), up);
    for (std::size_t i = 0; i < up.size(); ++i) CHECK(g1.data[i] == up.data[i]);
}

TEST_CASE("pullback matches finite differences") {
    Rng rng(16);
    const ImageGrid img = testutil::random_grid(rng, 6, 6);
    const ImageGrid up = testutil::random_grid(rng, 6, 6);
    const Kernel3 k = gaussian_kernel3(1.0);
    const ImageGrid analytic = convolve_same_pullback(img, k, up);
    const auto fd = testutil::central_fd(img.data, 1e-5, [&](const std::vector<double>& flat) {
        ImageGrid x(6, 6);
        x.data = flat;
        return testutil::grid_inner(up, convolve_same(x, k));
    });
    CHECK(testutil::rel_inf_error(analytic.data, fd) < 1e-5);
}

TEST_CASE("adjoint identity holds to 1e-10 on random instances") {
    Rng rng(17);
    for (int i = 0; i < 10; ++i) {
        const ImageGrid a = testutil::random_grid(rng, 7, 5);
        const ImageGrid u = testutil::random_grid(rng, 7, 5);
        const Kernel3 k = i % 2 ? gaussian_kernel3(rng.uniform(0.5, 2.0))
                                : gaussian_derivative_kernels3(rng.uniform(0.5, 2.0)).first;
        const double lhs = testutil::grid_inner(u, convolve_same(a, k));
        const double rhs = testutil::grid_inner(convolve_same_pullback(a, k, u), a);
        CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-10}) < 1e-10);
    }
}

TEST_CASE("pullback rejects mismatched upstream") {
    ImageGrid img(5, 5);
    ImageGrid up(4, 5);
    CHECK_THROWS_AS(convolve_same_pullback(img, identity_kernel(), up), DimensionError);
}

TEST_CASE("parallel convolution is bit-identical to the serial reference") {
    Rng rng(18);
    for (int i = 0; i < 5; ++i) {
        const ImageGrid img = testutil::random_grid(rng, 64, 64);
        const ImageGrid up = testutil::random_grid(rng, 64, 64);
        const Kernel3 k = gaussian_kernel3(rng.uniform(0.5, 2.0));
        CHECK(convolve_same(img, k).data == serial::convolve_same(img, k).data);
        CHECK(convolve_same_pullback(img, k, up).data ==
              serial::convolve_same_pullback(img, k, up).data);
    }
}

TEST_CASE("raster outputs stay finite") {
    Rng rng(19);
    const ImageGrid img = testutil::random_grid(rng, 16, 16);
    CHECK(testutil::all_finite(convolve_same(img, gaussian_kernel3(0.3))));
    const auto [kx, ky] = gaussian_derivative_kernels3(2.5);
    CHECK(testutil::all_finite(convolve_same(img, kx)));
    CHECK(testutil::all_finite(convolve_same(img, ky)));
}
