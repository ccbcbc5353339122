#include "gravalign/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "gravalign/errors.hpp"

namespace gravalign {

namespace {

constexpr std::uint32_t kLeafSize = 8;

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::DimensionOverflow, "too many points for the spatial index");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({-1, 0.0, begin, end, -1, -1});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

// Left subtree holds coordinates <= split, right subtree >= split.
template <class Visitor>
void KdTree::search(std::int32_t node, const Point3& q, Visitor& v) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t idx = order_[i];
      v.offer({idx, (points_[idx] - q).squaredNorm()});
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff <= 0.0 ? n.left : n.right;
  const std::int32_t far = diff <= 0.0 ? n.right : n.left;
  search(near, q, v);
  if (diff * diff <= v.bound()) search(far, q, v);
}

KdTree::Neighbor KdTree::nearest(const Point3& q) const {
  if (points_.empty()) throw Error(ErrorKind::InsufficientPoints, "empty spatial index");
  struct Best {
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    bool any = false;
    void offer(const Neighbor& c) {
      if (!any || closer(c, best)) {
        best = c;
        any = true;
      }
    }
    double bound() const { return best.sq_dist; }
  } v;
  search(0, q, v);
  return v.best;
}

std::vector<KdTree::Neighbor> KdTree::k_nearest(const Point3& q, std::size_t k) const {
  if (points_.empty()) throw Error(ErrorKind::InsufficientPoints, "empty spatial index");
  k = std::min(k, points_.size());
  struct Heap {
    std::size_t k;
    std::vector<Neighbor> heap;  // max-heap on (distance, index)
    void offer(const Neighbor& c) {
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    double bound() const {
      return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().sq_dist;
    }
  } v{k, {}};
  v.heap.reserve(k);
  search(0, q, v);
  std::sort(v.heap.begin(), v.heap.end(), closer);
  return v.heap;
}

}  // namespace gravalign
