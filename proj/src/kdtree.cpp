#include "splatgrad/kdtree.hpp"

#include <algorithm>
#include <limits>

#include "splatgrad/errors.hpp"

namespace splatgrad {

namespace {

double axis_value(const Vec3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree3::KdTree3(const PointCloud& points) : points_(points) {
    if (points_.empty()) {
        throw ParameterError("KdTree3: empty point set");
    }
    nodes_.reserve(points_.size());
    std::vector<std::size_t> idx(points_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    root_ = build(idx, 0, idx.size());
}

int KdTree3::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
    if (lo >= hi) return -1;
    // split along the longest axis of this subset's bounding box
    Vec3 mn = points_[idx[lo]];
    Vec3 mx = mn;
    for (std::size_t i = lo; i < hi; ++i) {
        const Vec3& p = points_[idx[i]];
        mn.x = std::min(mn.x, p.x);
        mn.y = std::min(mn.y, p.y);
        mn.z = std::min(mn.z, p.z);
        mx.x = std::max(mx.x, p.x);
        mx.y = std::max(mx.y, p.y);
        mx.z = std::max(mx.z, p.z);
    }
    int axis = 0;
    double best = mx.x - mn.x;
    if (mx.y - mn.y > best) {
        axis = 1;
        best = mx.y - mn.y;
    }
    if (mx.z - mn.z > best) axis = 2;

    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                         const double va = axis_value(points_[a], axis);
                         const double vb = axis_value(points_[b], axis);
                         if (va != vb) return va < vb;
                         return a < b;  // deterministic order for duplicates
                     });
    Node node;
    node.point = idx[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(idx, lo, mid);
    const int right = build(idx, mid + 1, hi);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KdTree3::search(int node, const Vec3& q, Hit& best) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.point];
    const double d2 = dist2(q, p);
    if (d2 < best.dist2 || (d2 == best.dist2 && n.point < best.index)) {
        best.dist2 = d2;
        best.index = n.point;
    }
    const double delta = axis_value(q, n.axis) - axis_value(p, n.axis);
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, q, best);
    // visit the far side on exact equality too, so index tie-breaking sees
    // every candidate at the winning distance
    if (delta * delta <= best.dist2) {
        search(far, q, best);
    }
}

KdTree3::Hit KdTree3::nearest(const Vec3& query) const {
    Hit best{points_.size(), std::numeric_limits<double>::infinity()};
    search(root_, query, best);
    return best;
}

}  // namespace splatgrad
