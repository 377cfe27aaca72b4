#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace splatgrad {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

struct Mat3 {
    double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    static Mat3 identity() { return Mat3{}; }

    Vec3 apply(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }

    Mat3 transpose() const {
        Mat3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t.m[i][j] = m[j][i];
        return t;
    }

    Mat3 mul(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
            }
        return r;
    }
};

/// Ordered point set in normalized coordinates. The optimized variable.
using PointCloud = std::vector<Vec3>;
/// Per-point gradient, same length as the cloud it differentiates.
using GradientCloud = std::vector<Vec3>;

/// Pinhole intrinsics. Defaults place a centered unit cube at distance 2.5
/// inside a 64×64 image.
struct CameraIntrinsics {
    double fx = 120.0;
    double fy = 120.0;
    double cx = -32.0;
    double cy = -32.0;
};

/// Virtual camera pose: azimuth/elevation in degrees plus the distance the
/// camera sits from the origin along its optical axis.
struct ViewSpec {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double distance = 2.5;
};

/// Continuous pixel coordinates of a projected cloud. u is the column
/// coordinate, v the row coordinate; depth is camera-frame z (always > 0 for
/// a valid projection). Stored as parallel arrays.
struct PixelCoords {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> depth;

    std::size_t size() const { return u.size(); }
};

/// R = Rx(elevation)·Ry(azimuth), right-handed, angles in degrees.
Mat3 rotation_from_view(const ViewSpec& view);

/// Projects each point: q = K·(R·p + t) with t = (0,0,distance), then
/// (u, v) = (-q_x/q_z, -q_y/q_z). The sign flip after the homogeneous divide
/// is what lands a centered unit cube inside the image with the negative
/// principal-point offsets of the default intrinsics.
/// Throws ProjectionError (with the point index) if any depth is <= 0.
PixelCoords project(const PointCloud& cloud, const ViewSpec& view, const CameraIntrinsics& intr);

/// Reverse-mode counterpart of project: maps per-point upstream (du, dv)
/// pairs to gradients on the 3D coordinates. upstream_u/v must match the
/// cloud length.
GradientCloud project_pullback(const PointCloud& cloud, const ViewSpec& view,
                               const CameraIntrinsics& intr,
                               const std::vector<double>& upstream_u,
                               const std::vector<double>& upstream_v);

/// Centers the axis-aligned bounding box at the origin and scales uniformly
/// so the longest box edge is 1. Throws DegenerateCloudError when every axis
/// has zero extent, ParameterError when the cloud is empty.
PointCloud normalize_cloud(const PointCloud& cloud);

/// k distinct views from the pool, uniform without replacement, reproducible
/// from the seed. Throws ParameterError if k > pool size.
std::vector<ViewSpec> sample_views(const std::vector<ViewSpec>& pool, std::size_t k,
                                   std::uint64_t seed);

/// The default 16-view pool: azimuth 0..315 step 45, elevation {0, 20}.
std::vector<ViewSpec> default_angle_pool(double distance = 2.5);

}  // namespace splatgrad
