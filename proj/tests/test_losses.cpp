#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "splatgrad/clouds.hpp"
#include "splatgrad/errors.hpp"
#include "splatgrad/losses.hpp"
#include "splatgrad/serial_ref.hpp"

using namespace splatgrad;

namespace {

// factorial enumeration oracle for EMD, summed in row order like emd()
double emd_brute(const PointCloud& a, const PointCloud& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            total += (a[i] - b[perm[i]]).norm();
        }
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

PointCloud apply_rigid(const PointCloud& c, const Mat3& r, const Vec3& t) {
    PointCloud out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = r.apply(c[i]) + t;
    return out;
}

Mat3 rotation_axis_angle(Vec3 axis, double angle) {
    const double n = axis.norm();
    axis = axis * (1.0 / n);
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    Mat3 r;
    r.m[0][0] = t * axis.x * axis.x + c;
    r.m[0][1] = t * axis.x * axis.y - s * axis.z;
    r.m[0][2] = t * axis.x * axis.z + s * axis.y;
    r.m[1][0] = t * axis.x * axis.y + s * axis.z;
    r.m[1][1] = t * axis.y * axis.y + c;
    r.m[1][2] = t * axis.y * axis.z - s * axis.x;
    r.m[2][0] = t * axis.x * axis.z - s * axis.y;
    r.m[2][1] = t * axis.y * axis.z + s * axis.x;
    r.m[2][2] = t * axis.z * axis.z + c;
    return r;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    const Mat3 d = a.mul(b.transpose());
    const double trace = d.m[0][0] + d.m[1][1] + d.m[2][2];
    return std::acos(std::clamp((trace - 1.0) * 0.5, -1.0, 1.0));
}

}  // namespace

TEST_CASE("chamfer of identical clouds is zero with zero gradient") {
    Rng rng(51);
    const PointCloud c = testutil::random_cloud(rng, 10);
    const ChamferResult r = chamfer(c, c);
    CHECK(r.value == 0.0);
    for (const Vec3& g : r.grad_a) {
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
        CHECK(g.z == 0.0);
    }
}

TEST_CASE("two-point hand evaluation") {
    const PointCloud a{Vec3{0.0, 0.0, 0.0}};
    const PointCloud b{Vec3{1.0, 0.0, 0.0}};
    const ChamferResult r = chamfer(a, b);
    CHECK(r.value == 2.0);
    CHECK(r.grad_a[0].x == -4.0);
    CHECK(r.grad_a[0].y == 0.0);
    CHECK(r.grad_a[0].z == 0.0);
}

TEST_CASE("nearest-neighbor ties resolve to the lowest index") {
    const PointCloud a{Vec3{1.0, 0.0, 0.0}, Vec3{-1.0, 0.0, 0.0}};
    const PointCloud b{Vec3{0.0, 0.0, 0.0}};
    for (NnBackend backend : {NnBackend::BruteForce, NnBackend::KdTree}) {
        const ChamferResult r = chamfer(a, b, backend);
        CHECK(r.value == 3.0);  // 1 + 1 from a-side, 1 from b-side
        CHECK(r.grad_a[0].x == 4.0);   // own term +2, tie scatter +2
        CHECK(r.grad_a[1].x == -2.0);  // own term only
    }
}

TEST_CASE("both backends match the brute-force reference exactly") {
    Rng rng(52);
    for (int t = 0; t < 25; ++t) {
        const int na = 2 + static_cast<int>(rng.below(80));
        const int nb = 2 + static_cast<int>(rng.below(80));
        const PointCloud a = testutil::random_cloud(rng, na);
        const PointCloud b = testutil::random_cloud(rng, nb);
        const serial::ChamferRef ref = serial::chamfer_ref(a, b);
        for (NnBackend backend : {NnBackend::BruteForce, NnBackend::KdTree, NnBackend::Auto}) {
            const ChamferResult r = chamfer(a, b, backend);
            CHECK(r.value == ref.value);
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(r.grad_a[i].x == ref.grad_a[i].x);
                CHECK(r.grad_a[i].y == ref.grad_a[i].y);
                CHECK(r.grad_a[i].z == ref.grad_a[i].z);
            }
        }
    }
}

TEST_CASE("chamfer is symmetric in value and scales quadratically") {
    Rng rng(53);
    const PointCloud a = testutil::random_cloud(rng, 20);
    const PointCloud b = testutil::random_cloud(rng, 24);
    CHECK(chamfer(a, b).value == chamfer(b, a).value);

    for (double s : {0.5, 2.0}) {
        PointCloud sa = a, sb = b;
        for (Vec3& p : sa) p = p * s;
        for (Vec3& p : sb) p = p * s;
        CHECK(std::abs(chamfer(sa, sb).value - s * s * chamfer(a, b).value) < 1e-9);
    }

    CHECK_THROWS_AS(chamfer(PointCloud{}, a), ParameterError);
}

TEST_CASE("chamfer gradient matches finite differences away from ties") {
    Rng rng(54);
    const PointCloud a = testutil::random_cloud(rng, 20);
    const PointCloud b = testutil::random_cloud(rng, 20);
    const ChamferResult r = chamfer(a, b);
    const auto fd =
        testutil::central_fd(testutil::flatten(a), 1e-5, [&](const std::vector<double>& x) {
            return chamfer(testutil::unflatten(x), b).value;
        });
    CHECK(testutil::rel_inf_error(testutil::flatten(r.grad_a), fd) < 1e-6);
}

TEST_CASE("edge/corner loss on identical and offset maps") {
    EdgeCornerMaps a, b;
    a.edge = ImageGrid(8, 8);
    a.corner = ImageGrid(8, 8);
    Rng rng(55);
    for (double& v : a.edge.data) v = rng.uniform(0.0, 0.37);
    for (double& v : a.corner.data) v = rng.uniform(0.0, 0.37);
    b = a;

    const EdgeCornerLoss same = edge_corner_loss(a, b);
    CHECK(same.edge == 0.0);
    CHECK(same.corner == 0.0);
    for (double v : same.upstream_edge.data) CHECK(v == 0.0);

    EdgeCornerMaps shifted = a;
    for (double& v : shifted.edge.data) v += 0.01;
    const EdgeCornerLoss off = edge_corner_loss(shifted, a);
    CHECK(std::abs(off.edge - 0.01) < 1e-12);
    CHECK(off.corner == 0.0);
    const double expect = 1.0 / 64.0;  // d edge / d pred, positive diff
    for (double v : off.upstream_edge.data) CHECK(std::abs(v - expect) < 1e-15);
}

TEST_CASE("edge/corner loss equals an independent recomputation") {
    Rng rng(56);
    EdgeCornerMaps p, g;
    p.edge = testutil::random_grid(rng, 6, 7);
    p.corner = testutil::random_grid(rng, 6, 7);
    g.edge = testutil::random_grid(rng, 6, 7);
    g.corner = testutil::random_grid(rng, 6, 7);
    const EdgeCornerLoss r = edge_corner_loss(p, g);
    double edge = 0.0, corner = 0.0;
    for (std::size_t i = 0; i < p.edge.size(); ++i) {
        edge += std::abs(p.edge.data[i] - g.edge.data[i]);
        corner += std::abs(p.corner.data[i] - g.corner.data[i]);
    }
    edge /= static_cast<double>(p.edge.size());
    corner /= static_cast<double>(p.corner.size());
    CHECK(std::abs(r.edge - edge) < 1e-12);
    CHECK(std::abs(r.corner - corner) < 1e-12);

    EdgeCornerMaps wrong;
    wrong.edge = ImageGrid(5, 7);
    wrong.corner = ImageGrid(6, 7);
    CHECK_THROWS_AS(edge_corner_loss(p, wrong), DimensionError);
}

TEST_CASE("total loss: identical clouds, lambda zero reduction") {
    Rng rng(57);
    const PointCloud cloud = normalize_cloud(testutil::random_cloud(rng, 24));
    const PointCloud other = normalize_cloud(testutil::random_cloud(rng, 24));
    const std::vector<ViewSpec> views = {ViewSpec{0.0, 0.0, 2.5}, ViewSpec{90.0, 20.0, 2.5}};
    const PipelineConfig cfg;

    const TotalLossResult same = total_loss(cloud, cloud, views, LossWeights{20.0, 10.0}, cfg);
    CHECK(same.report.total == 0.0);
    CHECK(same.report.cd == 0.0);
    CHECK(same.report.edge == 0.0);
    CHECK(same.report.corner == 0.0);
    for (const Vec3& g : same.grad) {
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
        CHECK(g.z == 0.0);
    }

    const TotalLossResult cd_only = total_loss(cloud, other, views, LossWeights{0.0, 0.0}, cfg);
    const ChamferResult cd = chamfer(cloud, other);
    CHECK(cd_only.report.total == cd.value);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(cd_only.grad[i].x == cd.grad_a[i].x);
        CHECK(cd_only.grad[i].y == cd.grad_a[i].y);
        CHECK(cd_only.grad[i].z == cd.grad_a[i].z);
    }

    // report invariant
    const TotalLossResult full = total_loss(cloud, other, views, LossWeights{20.0, 10.0}, cfg);
    CHECK(std::abs(full.report.total -
                   (full.report.cd + 20.0 * full.report.edge + 10.0 * full.report.corner)) <
          1e-10);
    CHECK(full.report.per_view.size() == views.size());
}

TEST_CASE("total loss gradient matches finite differences (pinned norms)") {
    const PipelineConfig cfg;
    const LossWeights weights{20.0, 10.0};
    const std::vector<ViewSpec> views = {ViewSpec{45.0, 0.0, 2.5}, ViewSpec{180.0, 20.0, 2.5}};
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
        Rng rng(5800 + attempt);
        const PointCloud pred = normalize_cloud(testutil::random_cloud(rng, 24));
        const PointCloud gt = normalize_cloud(testutil::random_cloud(rng, 24));
        const std::vector<VisualNorms> norms = capture_pred_norms(pred, views, cfg);
        const TotalLossResult base = total_loss_pinned(pred, gt, views, weights, cfg, norms);
        const auto fd =
            testutil::central_fd(testutil::flatten(pred), 1e-5, [&](const std::vector<double>& x) {
                return total_loss_pinned(testutil::unflatten(x), gt, views, weights, cfg, norms)
                    .report.total;
            });
        ok = testutil::rel_inf_error(testutil::flatten(base.grad), fd) < 1e-4;
    }
    CHECK(ok);
}

TEST_CASE("emd basics") {
    Rng rng(59);
    const PointCloud c = testutil::random_cloud(rng, 6);
    CHECK(emd(c, c) == 0.0);

    const PointCloud a{Vec3{0.0, 0.0, 0.0}, Vec3{1.0, 0.0, 0.0}};
    const PointCloud b{Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 0.0, 0.0}};
    CHECK(emd(a, b) == 0.0);

    CHECK_THROWS_AS(emd(a, c), ParameterError);
    CHECK_THROWS_AS(emd(PointCloud{}, PointCloud{}), ParameterError);
}

TEST_CASE("emd equals factorial enumeration") {
    Rng rng(60);
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + static_cast<int>(rng.below(6));  // up to 7
        const PointCloud a = testutil::random_cloud(rng, n);
        const PointCloud b = testutil::random_cloud(rng, n);
        CHECK(emd(a, b) == emd_brute(a, b));
    }
}

TEST_CASE("emd symmetry, triangle inequality, scaling") {
    Rng rng(61);
    for (int t = 0; t < 10; ++t) {
        const int n = 2 + static_cast<int>(rng.below(5));  // up to 6
        const PointCloud a = testutil::random_cloud(rng, n);
        const PointCloud b = testutil::random_cloud(rng, n);
        const PointCloud c = testutil::random_cloud(rng, n);
        const double ab = emd_brute(a, b);
        const double ba = emd_brute(b, a);
        const double bc = emd_brute(b, c);
        const double ac = emd_brute(a, c);
        CHECK(std::abs(ab - ba) < 1e-12);
        CHECK(ac <= ab + bc + 1e-12);
        CHECK(emd(a, b) >= 0.0);

        for (double s : {0.5, 2.0}) {
            PointCloud sa = a, sb = b;
            for (Vec3& p : sa) p = p * s;
            for (Vec3& p : sb) p = p * s;
            CHECK(std::abs(emd(sa, sb) - s * emd(a, b)) < 1e-9);
        }
    }
}

TEST_CASE("icp recovers a small rigid transform") {
    Rng rng(62);
    const PointCloud src = normalize_cloud(testutil::random_cloud(rng, 128));
    const Mat3 r = rotation_axis_angle(Vec3{rng.normal(), rng.normal(), rng.normal()}, 0.12);
    const Vec3 t{0.03, -0.02, 0.04};
    const PointCloud dst = apply_rigid(src, r, t);

    const IcpResult icp = icp_align(src, dst, 100, 1e-14);
    CHECK(rotation_angle_between(icp.rotation, r) < 1e-6);
    CHECK((icp.translation - t).norm() < 1e-6);
    CHECK(chamfer(icp.aligned, dst).value < 1e-10);
    CHECK_FALSE(icp.degenerate);
}

TEST_CASE("icp on identical clouds stops immediately with the identity") {
    Rng rng(63);
    const PointCloud c = testutil::random_cloud(rng, 64);
    const IcpResult icp = icp_align(c, c);
    CHECK(icp.iterations == 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(icp.rotation.m[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);
        }
    CHECK(icp.translation.norm() < 1e-12);
}

TEST_CASE("icp improves a noisy transformed copy and MSE never increases") {
    Rng rng(64);
    const PointCloud src = normalize_cloud(testutil::random_cloud(rng, 128));
    const Mat3 r = rotation_axis_angle(Vec3{0.3, 1.0, -0.2}, 0.1);
    PointCloud dst = apply_rigid(src, r, Vec3{0.02, 0.01, -0.03});
    dst = jitter_cloud(dst, 0.01, 991);

    const double before = chamfer(src, dst).value;
    const IcpResult icp = icp_align(src, dst);
    const double after = chamfer(icp.aligned, dst).value;
    CHECK(after < before);
    for (std::size_t i = 1; i < icp.mse_history.size(); ++i) {
        CHECK(icp.mse_history[i] <= icp.mse_history[i - 1] + 1e-15);
    }
}

TEST_CASE("icp flags degenerate rank-deficient configurations") {
    PointCloud line;
    for (int i = 0; i < 10; ++i) line.push_back(Vec3{0.1 * i, 0.0, 0.0});
    PointCloud shifted = line;
    for (Vec3& p : shifted) p.x += 0.25;
    const IcpResult icp = icp_align(line, shifted, 10, 1e-9);
    CHECK(icp.degenerate);
    // translation-only fallback still matches the clouds
    CHECK(chamfer(icp.aligned, shifted).value < 1e-9);
}

TEST_CASE("eval metrics: identical, rotated, jittered") {
    Rng rng(65);
    const PointCloud gt = normalize_cloud(testutil::random_cloud(rng, 256));

    const EvalMetrics same = eval_metrics(gt, gt);
    CHECK(same.cd_x100 == 0.0);
    CHECK(same.emd_x100 == 0.0);

    const Mat3 r = rotation_axis_angle(Vec3{0.0, 1.0, 0.0}, 10.0 * 0.017453292519943295);
    const PointCloud rotated = apply_rigid(gt, r, Vec3{});
    const EvalMetrics rot = eval_metrics(rotated, gt);
    CHECK(rot.cd_x100 < 0.1);
    CHECK(rot.emd_x100 < 0.1);

    // per-point jitter: cd_x100 ~ 100·2·E|eps|^2 within a factor of 2
    const double sigma = 0.02;
    const PointCloud jittered = jitter_cloud(gt, sigma, 777);
    const EvalMetrics jit = eval_metrics(jittered, gt);
    const double predicted = 100.0 * 2.0 * 3.0 * sigma * sigma;
    CHECK(jit.cd_x100 > predicted / 2.0);
    CHECK(jit.cd_x100 < predicted * 2.0);

    CHECK_THROWS_AS(eval_metrics(testutil::random_cloud(rng, 8), gt), ParameterError);
}
