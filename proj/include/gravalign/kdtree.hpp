#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gravalign/geom.hpp"

namespace gravalign {

/// Exact nearest-neighbour index over a fixed 3D point set. Ties in distance
/// resolve to the lower point index.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double sq_dist = 0.0;
  };

  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const { return points_.size(); }
  Neighbor nearest(const Point3& q) const;
  /// Up to k neighbours sorted by (distance, index).
  std::vector<Neighbor> k_nearest(const Point3& q, std::size_t k) const;

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <class Visitor>
  void search(std::int32_t node, const Point3& q, Visitor& v) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace gravalign
