#include "gravalign/gravity_ransac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gravalign/errors.hpp"
#include "gravalign/parallel.hpp"
#include "gravalign/rng.hpp"
#include "gravalign/procrustes.hpp"

namespace gravalign {

void RansacConfig::validate() const {
  if (iterations < 1) throw Error(ErrorKind::InvalidConfig, "iterations must be >= 1");
  if (sample_size < 2) throw Error(ErrorKind::InvalidConfig, "sample_size must be >= 2");
  if (!(inlier_threshold > 0.0)) throw Error(ErrorKind::InvalidConfig, "threshold must be > 0");
  if (!(top_confidence_fraction > 0.0 && top_confidence_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "top_confidence_fraction must be in (0, 1]");
  }
}

std::vector<double> joint_confidence(const std::vector<double>& psi_g,
                                     const std::vector<double>& psi_c) {
  if (psi_g.size() != psi_c.size()) {
    throw Error(ErrorKind::DimensionMismatch, "confidence grids differ in size");
  }
  std::vector<double> out(psi_g.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(std::max(psi_g[i], kConfidenceFloor)) *
             std::log(std::max(psi_c[i], kConfidenceFloor));
  }
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

struct Trial {
  bool ok = false;
  Rotation3 rotation = Rotation3::Identity();
  std::size_t inliers = 0;
};

}  // namespace

NormalizedPoints normalize_pointmap_scale(const std::vector<Point3>& pts) {
  if (pts.empty()) throw Error(ErrorKind::InsufficientPoints, "no points to normalize");
  Point3 center;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> coord(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) coord[i] = pts[i][axis];
    center[axis] = median_of(std::move(coord));
  }
  std::vector<double> dist(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) dist[i] = (pts[i] - center).norm();
  const double scale = median_of(std::move(dist));
  if (!(scale >= 1e-12)) throw Error(ErrorKind::ZeroScale, "median distance to center vanishes");
  NormalizedPoints out;
  out.scale = scale;
  out.points.reserve(pts.size());
  for (const auto& p : pts) out.points.push_back(p / scale);
  return out;
}

GravityEstimate estimate_gravity_rotation(const Pointmap& pm_g, const Pointmap& pm_c,
                                          const RansacConfig& cfg) {
  cfg.validate();
  pm_g.validate();
  pm_c.validate();
  if (pm_g.height != pm_c.height || pm_g.width != pm_c.width) {
    throw Error(ErrorKind::DimensionMismatch, "pointmaps differ in size");
  }
  if (!pm_g.has_confidence() || !pm_c.has_confidence()) {
    throw Error(ErrorKind::InvalidArgument, "both pointmaps need confidence grids");
  }

  const std::vector<double> psi = joint_confidence(pm_g.confidence, pm_c.confidence);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pm_g.size(); ++i) {
    if (pm_g.valid(i) && pm_c.valid(i)) order.push_back(i);
  }
  if (order.size() < 3) throw Error(ErrorKind::InsufficientPoints, "fewer than 3 valid pixels");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return psi[x] > psi[y]; });
  const auto keep = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil(cfg.top_confidence_fraction * static_cast<double>(order.size()))));
  order.resize(std::min(keep, order.size()));

  std::vector<Point3> xg, xc;
  xg.reserve(order.size());
  xc.reserve(order.size());
  for (std::size_t i : order) {
    xg.push_back(pm_g.points[i]);
    xc.push_back(pm_c.points[i]);
  }
  const NormalizedPoints ng = normalize_pointmap_scale(xg);
  const NormalizedPoints nc = normalize_pointmap_scale(xc);
  const std::size_t n = ng.points.size();
  const bool use_all = cfg.sample_size >= n;
  // Every trial sees the same sample when it covers all points.
  const auto trials = static_cast<std::size_t>(use_all ? 1 : cfg.iterations);
  const double thr2 = cfg.inlier_threshold * cfg.inlier_threshold;

  std::vector<Trial> results(trials);
  parallel_for(trials, [&](std::size_t it) {
    Correspondences sample;
    if (use_all) {
      sample.source = nc.points;
      sample.target = ng.points;
    } else {
      std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(it)));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      sample.source.reserve(cfg.sample_size);
      sample.target.reserve(cfg.sample_size);
      for (std::size_t k = 0; k < cfg.sample_size; ++k) {
        const std::size_t idx = pick(rng);
        sample.source.push_back(nc.points[idx]);
        sample.target.push_back(ng.points[idx]);
      }
    }
    Trial t;
    try {
      t.rotation = rigid_vectors_registration(sample);  // scale is discarded
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateConfiguration) throw;
      results[it] = t;
      return;
    }
    t.ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      if ((ng.points[k] - t.rotation * nc.points[k]).squaredNorm() < thr2) ++t.inliers;
    }
    results[it] = t;
  });

  GravityEstimate best;
  bool found = false;
  for (std::size_t it = 0; it < trials; ++it) {
    const Trial& t = results[it];
    if (!t.ok) continue;
    if (!found || t.inliers > best.inlier_count) {
      found = true;
      best.rotation = t.rotation;
      best.inlier_count = t.inliers;
      best.best_iteration = static_cast<int>(it);
    }
  }
  if (!found) throw Error(ErrorKind::DegenerateConfiguration, "every RANSAC sample was degenerate");
  for (const auto& t : results) {
    if (t.ok && t.inliers > best.inlier_count) {
      throw Error(ErrorKind::InvalidArgument, "best trial is not the inlier maximum");
    }
  }
  best.kept_points = n;
  best.inlier_ratio = static_cast<double>(best.inlier_count) / static_cast<double>(n);
  return best;
}

}  // namespace gravalign
