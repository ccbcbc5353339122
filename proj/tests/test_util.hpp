#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gravalign/geom.hpp"
#include "gravalign/lie.hpp"
#include "gravalign/posegraph.hpp"

namespace gat {

using namespace gravalign;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Point3 random_point(std::mt19937_64& rng, double r = 1.0) {
  return {uniform(rng, -r, r), uniform(rng, -r, r), uniform(rng, -r, r)};
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  return v.normalized();
}

/// Rotation with angle uniform in [0, max_angle].
inline Rotation3 random_rotation(std::mt19937_64& rng, double max_angle = kPi - 0.1) {
  return exp_so3(random_unit(rng) * uniform(rng, 0.0, max_angle));
}

inline Sim3Pose random_sim3(std::mt19937_64& rng, double max_angle = kPi - 0.1) {
  return {std::exp(uniform(rng, -1.0, 1.0)), random_rotation(rng, max_angle), random_point(rng, 3.0)};
}

inline SimY3Pose random_simy3(std::mt19937_64& rng, double max_yaw = kPi - 0.1) {
  return {std::exp(uniform(rng, -1.0, 1.0)), uniform(rng, -max_yaw, max_yaw), random_point(rng, 3.0)};
}

inline std::vector<Point3> random_cloud(std::mt19937_64& rng, std::size_t n, double r = 1.0) {
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = random_point(rng, r);
  return pts;
}

inline double pose_distance(const Sim3Pose& a, const Sim3Pose& b) {
  return std::abs(a.s - b.s) + rotation_angle(a.R * b.R.transpose()) + (a.t - b.t).norm();
}

struct GraphFixture {
  ChunkGraph graph;
  std::vector<Sim3Pose> truth;  // truth[0] is the identity
};

/// Consistent graph over K chunks: a random walk of poses, exact adjacency
/// measurements and `loops` exact loop edges between non-consecutive chunks
/// (none when K < 3).
inline GraphFixture random_graph(std::mt19937_64& rng, int k, Group mode, int loops) {
  GraphFixture f;
  f.graph.num_chunks = k;
  f.graph.mode = mode;
  f.truth.push_back(Sim3Pose::identity());
  for (int i = 1; i < k; ++i) {
    Sim3Pose step = mode == Group::Sim3 ? random_sim3(rng, 0.6) : random_simy3(rng, 0.6).to_sim3();
    step.s = std::exp(uniform(rng, -0.2, 0.2));
    step.t = random_point(rng, 1.0);
    f.truth.push_back(compose(f.truth.back(), step));
  }
  auto rel = [&](int i, int j) { return compose(inverse(f.truth[i]), f.truth[j]); };
  for (int i = 0; i + 1 < k; ++i) f.graph.add_adjacency(i, rel(i, i + 1), uniform(rng, 0.5, 2.0));
  if (k >= 3) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    for (int n = 0; n < loops;) {
      int i = pick(rng), j = pick(rng);
      if (i > j) std::swap(i, j);
      if (j - i < 2) continue;
      f.graph.add_loop(i, j, rel(i, j), uniform(rng, 0.5, 2.0));
      ++n;
    }
  }
  return f;
}

/// Initial guess: each truth pose moved by a random tangent of size `amount`.
inline std::vector<Sim3Pose> perturb(std::mt19937_64& rng, const std::vector<Sim3Pose>& poses,
                                     Group mode, double amount) {
  std::vector<Sim3Pose> out;
  for (const auto& p : poses) {
    if (mode == Group::Sim3) {
      Vector7d v;
      for (int i = 0; i < 7; ++i) v[i] = uniform(rng, -amount, amount);
      out.push_back(compose(p, exp_sim3(TangentSim3::from_vector(v))));
    } else {
      Vector5d v;
      for (int i = 0; i < 5; ++i) v[i] = uniform(rng, -amount, amount);
      out.push_back(compose(p, exp_simy3(TangentSimY3::from_vector(v)).to_sim3()));
    }
  }
  return out;
}

/// Largest pose_distance after mapping est onto truth through the first pose.
inline double gauge_aligned_error(const std::vector<Sim3Pose>& est, const std::vector<Sim3Pose>& truth) {
  const Sim3Pose g = compose(truth[0], inverse(est[0]));
  double worst = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    worst = std::max(worst, pose_distance(compose(g, est[i]), truth[i]));
  }
  return worst;
}

}  // namespace gat
