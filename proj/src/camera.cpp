#include "splatgrad/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splatgrad/errors.hpp"
#include "splatgrad/rng.hpp"

namespace splatgrad {

namespace {
constexpr double kDegToRad = 0.017453292519943295;
}

Mat3 rotation_from_view(const ViewSpec& view) {
    const double az = view.azimuth_deg * kDegToRad;
    const double el = view.elevation_deg * kDegToRad;
    const double ca = std::cos(az), sa = std::sin(az);
    const double ce = std::cos(el), se = std::sin(el);
    Mat3 ry;
    ry.m[0][0] = ca;  ry.m[0][1] = 0.0; ry.m[0][2] = sa;
    ry.m[1][0] = 0.0; ry.m[1][1] = 1.0; ry.m[1][2] = 0.0;
    ry.m[2][0] = -sa; ry.m[2][1] = 0.0; ry.m[2][2] = ca;
    Mat3 rx;
    rx.m[0][0] = 1.0; rx.m[0][1] = 0.0; rx.m[0][2] = 0.0;
    rx.m[1][0] = 0.0; rx.m[1][1] = ce;  rx.m[1][2] = -se;
    rx.m[2][0] = 0.0; rx.m[2][1] = se;  rx.m[2][2] = ce;
    return rx.mul(ry);
}

PixelCoords project(const PointCloud& cloud, const ViewSpec& view, const CameraIntrinsics& intr) {
    const Mat3 r = rotation_from_view(view);
    const std::size_t n = cloud.size();
    PixelCoords out;
    out.u.resize(n);
    out.v.resize(n);
    out.depth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 p = r.apply(cloud[i]) + Vec3{0.0, 0.0, view.distance};
        if (!(p.z > 0.0)) {
            throw ProjectionError(i, "point " + std::to_string(i) +
                                         " has non-positive camera depth " + std::to_string(p.z));
        }
        const double qx = intr.fx * p.x + intr.cx * p.z;
        const double qy = intr.fy * p.y + intr.cy * p.z;
        out.u[i] = -qx / p.z;
        out.v[i] = -qy / p.z;
        out.depth[i] = p.z;
    }
    return out;
}

GradientCloud project_pullback(const PointCloud& cloud, const ViewSpec& view,
                               const CameraIntrinsics& intr,
                               const std::vector<double>& upstream_u,
                               const std::vector<double>& upstream_v) {
    const std::size_t n = cloud.size();
    if (upstream_u.size() != n || upstream_v.size() != n) {
        throw DimensionError("project_pullback: upstream length " +
                             std::to_string(upstream_u.size()) + "/" +
                             std::to_string(upstream_v.size()) + " vs cloud size " +
                             std::to_string(n));
    }
    const Mat3 r = rotation_from_view(view);
    const Mat3 rt = r.transpose();
    GradientCloud grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 p = r.apply(cloud[i]) + Vec3{0.0, 0.0, view.distance};
        const double du = upstream_u[i];
        const double dv = upstream_v[i];
        // u = -fx·x/z - cx, v = -fy·y/z - cy
        const Vec3 g_cam{-intr.fx / p.z * du, -intr.fy / p.z * dv,
                         (intr.fx * p.x * du + intr.fy * p.y * dv) / (p.z * p.z)};
        grad[i] = rt.apply(g_cam);
    }
    return grad;
}

PointCloud normalize_cloud(const PointCloud& cloud) {
    if (cloud.empty()) {
        throw ParameterError("normalize_cloud: empty cloud");
    }
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-lo.x, -lo.y, -lo.z};
    for (const Vec3& p : cloud) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    if (!(extent > 0.0)) {
        throw DegenerateCloudError("normalize_cloud: zero extent on all axes");
    }
    const Vec3 center{(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5, (lo.z + hi.z) * 0.5};
    PointCloud out(cloud.size());
    const double inv = 1.0 / extent;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out[i] = (cloud[i] - center) * inv;
    }
    return out;
}

std::vector<ViewSpec> sample_views(const std::vector<ViewSpec>& pool, std::size_t k,
                                   std::uint64_t seed) {
    if (k > pool.size()) {
        throw ParameterError("sample_views: k=" + std::to_string(k) + " exceeds pool size " +
                             std::to_string(pool.size()));
    }
    Rng rng(seed);
    std::vector<ViewSpec> out;
    out.reserve(k);
    for (std::size_t idx : rng.pick_distinct(pool.size(), k)) {
        out.push_back(pool[idx]);
    }
    return out;
}

std::vector<ViewSpec> default_angle_pool(double distance) {
    std::vector<ViewSpec> pool;
    for (double el : {0.0, 20.0}) {
        for (int a = 0; a < 8; ++a) {
            pool.push_back(ViewSpec{45.0 * a, el, distance});
        }
    }
    return pool;
}

}  // namespace splatgrad
