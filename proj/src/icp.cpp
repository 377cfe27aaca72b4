#include <Eigen/Core>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "splatgrad/errors.hpp"
#include "splatgrad/kdtree.hpp"
#include "splatgrad/losses.hpp"

namespace splatgrad {

namespace {

Vec3 centroid(const PointCloud& pts) {
    Vec3 c;
    for (const Vec3& p : pts) c += p;
    return c * (1.0 / static_cast<double>(pts.size()));
}

struct RigidStep {
    Mat3 rotation;
    Vec3 translation;
    bool degenerate = false;
};

// Closed-form rigid fit of moving→fixed pairs: SVD of the cross-covariance,
// with the reflection corrected through the sign of det(V·Uᵀ). Falls back to
// the identity rotation when the covariance drops below rank 2.
RigidStep solve_rigid(const PointCloud& moving, const PointCloud& fixed_pts) {
    const Vec3 cm = centroid(moving);
    const Vec3 cf = centroid(fixed_pts);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < moving.size(); ++i) {
        const Vec3 p = moving[i] - cm;
        const Vec3 q = fixed_pts[i] - cf;
        const Eigen::Vector3d ep(p.x, p.y, p.z);
        const Eigen::Vector3d eq(q.x, q.y, q.z);
        h += ep * eq.transpose();
    }
    RigidStep step;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300)) {
        // rank <= 1: rotation is ill-defined
        step.degenerate = true;
        step.rotation = Mat3::identity();
        step.translation = cf - cm;
        return step;
    }
    Eigen::Matrix3d r = svd.matrixV() * svd.matrixU().transpose();
    if (r.determinant() < 0.0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixV() * flip * svd.matrixU().transpose();
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) step.rotation.m[i][j] = r(i, j);
    const Vec3 rcm = step.rotation.apply(cm);
    step.translation = cf - rcm;
    return step;
}

}  // namespace

IcpResult icp_align(const PointCloud& src, const PointCloud& dst, int max_iters, double tol) {
    if (src.empty() || dst.empty()) {
        throw ParameterError("icp_align: clouds must be nonempty");
    }
    const KdTree3 tree(dst);

    IcpResult out;
    out.rotation = Mat3::identity();
    out.translation = Vec3{};
    PointCloud current = src;
    PointCloud matched(src.size());
    double prev_mse = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < current.size(); ++i) {
            matched[i] = dst[tree.nearest(current[i]).index];
        }
        const RigidStep step = solve_rigid(current, matched);
        out.degenerate = out.degenerate || step.degenerate;

        // compose the increment into the total transform and re-apply from src
        out.rotation = step.rotation.mul(out.rotation);
        out.translation = step.rotation.apply(out.translation) + step.translation;
        for (std::size_t i = 0; i < src.size(); ++i) {
            current[i] = out.rotation.apply(src[i]) + out.translation;
        }

        double mse = 0.0;
        for (std::size_t i = 0; i < current.size(); ++i) {
            mse += (current[i] - matched[i]).norm2();
        }
        mse /= static_cast<double>(current.size());
        out.mse_history.push_back(mse);
        out.iterations = iter + 1;
        if (std::abs(prev_mse - mse) < tol) break;
        prev_mse = mse;
    }

    out.aligned = std::move(current);
    return out;
}

}  // namespace splatgrad
