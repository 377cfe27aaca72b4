#pragma once

#include <cstddef>
#include <vector>

#include "splatgrad/camera.hpp"

namespace splatgrad {

/// Static 3-d tree over a point set for exact nearest-neighbor queries.
/// Ties on squared distance resolve to the lowest point index, matching the
/// brute-force scan order, so both backends return identical results.
class KdTree3 {
  public:
    explicit KdTree3(const PointCloud& points);

    struct Hit {
        std::size_t index;
        double dist2;
    };

    Hit nearest(const Vec3& query) const;

    std::size_t size() const { return points_.size(); }

  private:
    struct Node {
        int left = -1;
        int right = -1;
        std::size_t point;  // index into points_
        int axis = 0;
    };

    int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi);
    void search(int node, const Vec3& q, Hit& best) const;

    PointCloud points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace splatgrad
