#include "gravalign/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "gravalign/errors.hpp"
#include "gravalign/kdtree.hpp"
#include "gravalign/parallel.hpp"
#include "gravalign/procrustes.hpp"

namespace gravalign {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double rmse(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

double percent_below(const std::vector<double>& v, double thr) {
  std::size_t n = 0;
  for (double x : v) n += x < thr ? 1 : 0;
  return 100.0 * static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

double geodesic_rotation_error(const Rotation3& r1, const Rotation3& r2) {
  return rad2deg(rotation_angle(r2 * r1.transpose()));
}

RotationErrorStats rotation_stats(std::span<const Rotation3> pred, std::span<const Rotation3> gt) {
  if (pred.size() != gt.size()) throw Error(ErrorKind::LengthMismatch, "rotation lists differ in length");
  if (pred.empty()) throw Error(ErrorKind::InsufficientPoints, "no rotations to evaluate");
  RotationErrorStats s;
  s.errors.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) s.errors.push_back(geodesic_rotation_error(pred[i], gt[i]));
  s.mean = mean(s.errors);
  s.median = median(s.errors);
  s.acc_1 = percent_below(s.errors, 1.0);
  s.acc_2 = percent_below(s.errors, 2.0);
  s.acc_5 = percent_below(s.errors, 5.0);
  return s;
}

PoseErrorStats ape(std::span<const Sim3Pose> pred, std::span<const Sim3Pose> gt, Group mode,
                   bool align) {
  if (pred.size() != gt.size()) throw Error(ErrorKind::LengthMismatch, "pose lists differ in length");
  if (pred.size() < 2) throw Error(ErrorKind::InsufficientPoints, "need at least two poses");

  PoseErrorStats out;
  if (align) {
    Correspondences c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      c.source.push_back(pred[i].t);
      c.target.push_back(gt[i].t);
    }
    try {
      out.alignment = fit_similarity(c, mode);
    } catch (const Error& e) {
      throw Error(ErrorKind::DegenerateConfiguration,
                  std::string("trajectory alignment failed: ") + e.what());
    }
  }

  std::vector<Rotation3> pr, gr;
  std::vector<double> terr, yerr;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Sim3Pose p = compose(out.alignment, pred[i]);
    pr.push_back(p.R);
    gr.push_back(gt[i].R);
    terr.push_back((p.t - gt[i].t).norm());
    yerr.push_back(std::abs(p.t.y() - gt[i].t.y()));
  }
  out.rotation = rotation_stats(pr, gr);
  out.ape_r = rmse(out.rotation.errors);
  out.ape_t = rmse(terr);
  out.delta_y = median(yerr);
  return out;
}

std::vector<Point3> estimate_normals(std::span<const Point3> pts, std::size_t k) {
  const KdTree tree(pts);
  std::vector<Point3> normals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto nn = tree.k_nearest(pts[i], k);
    Point3 mu = Point3::Zero();
    for (const auto& n : nn) mu += pts[n.index];
    mu /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nn) {
      const Point3 d = pts[n.index] - mu;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    normals[i] = es.eigenvectors().col(0).normalized();
  });
  return normals;
}

std::vector<double> nearest_distances(std::span<const Point3> from, std::span<const Point3> to) {
  const KdTree tree(to);
  std::vector<double> d(from.size());
  parallel_for(from.size(), [&](std::size_t i) { d[i] = std::sqrt(tree.nearest(from[i]).sq_dist); });
  return d;
}

StructureStats structure_metrics(std::span<const Point3> pred_in, std::span<const Point3> gt,
                                 const StructureOptions& opt) {
  if (pred_in.size() < opt.k_normals || gt.size() < opt.k_normals || pred_in.empty() || gt.empty()) {
    throw Error(ErrorKind::InsufficientPoints, "clouds need at least k_normals points");
  }
  std::vector<Point3> pred(pred_in.begin(), pred_in.end());
  if (opt.align) {
    if (pred.size() != gt.size()) {
      throw Error(ErrorKind::LengthMismatch, "alignment needs index-corresponding clouds");
    }
    Correspondences c{pred, {gt.begin(), gt.end()}, {}};
    pred = apply_pose(fit_similarity(c, opt.align_group), pred);
  }

  const KdTree gt_tree(gt);
  const KdTree pred_tree(pred);
  std::vector<double> acc(pred.size()), comp(gt.size());
  std::vector<std::size_t> nn_pred(pred.size()), nn_gt(gt.size());
  parallel_for(pred.size(), [&](std::size_t i) {
    const auto n = gt_tree.nearest(pred[i]);
    acc[i] = std::sqrt(n.sq_dist);
    nn_pred[i] = n.index;
  });
  parallel_for(gt.size(), [&](std::size_t i) {
    const auto n = pred_tree.nearest(gt[i]);
    comp[i] = std::sqrt(n.sq_dist);
    nn_gt[i] = n.index;
  });

  const auto n_pred = estimate_normals(pred, opt.k_normals);
  const auto n_gt = estimate_normals(gt, opt.k_normals);
  double nc_pred = 0.0, nc_gt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) nc_pred += std::abs(n_pred[i].dot(n_gt[nn_pred[i]]));
  for (std::size_t i = 0; i < gt.size(); ++i) nc_gt += std::abs(n_gt[i].dot(n_pred[nn_gt[i]]));

  StructureStats s;
  s.acc = mean(acc);
  s.comp = mean(comp);
  s.acc_median = median(acc);
  s.comp_median = median(comp);
  s.nc = 0.5 * (nc_pred / static_cast<double>(pred.size()) + nc_gt / static_cast<double>(gt.size()));
  s.nc = std::clamp(s.nc, 0.0, 1.0);
  return s;
}

}  // namespace gravalign
