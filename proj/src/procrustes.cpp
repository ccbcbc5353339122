#include "gravalign/procrustes.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "gravalign/errors.hpp"

namespace gravalign {

namespace {

void check_inputs(const Correspondences& c, std::size_t min_points) {
  if (c.source.size() != c.target.size()) {
    throw Error(ErrorKind::LengthMismatch, "source and target sizes differ");
  }
  if (!c.weights.empty() && c.weights.size() != c.source.size()) {
    throw Error(ErrorKind::LengthMismatch, "weights size differs from correspondences");
  }
  if (c.source.size() < min_points) {
    throw Error(ErrorKind::InsufficientPoints, "need at least " + std::to_string(min_points) +
                                                   " correspondences, got " +
                                                   std::to_string(c.source.size()));
  }
  for (double w : c.weights) {
    if (!(std::isfinite(w) && w > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "weights must be positive and finite");
    }
  }
}

double weight_at(const Correspondences& c, std::size_t i) {
  return c.weights.empty() ? 1.0 : c.weights[i];
}

struct Centered {
  Point3 mu_source = Point3::Zero();
  Point3 mu_target = Point3::Zero();
  Eigen::MatrixX3d source;  // rows scaled by sqrt(w)
  Eigen::MatrixX3d target;
  double weight_sum = 0.0;
};

Centered center(const Correspondences& c) {
  Centered out;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight_at(c, i);
    out.mu_source += w * c.source[i];
    out.mu_target += w * c.target[i];
    out.weight_sum += w;
  }
  out.mu_source /= out.weight_sum;
  out.mu_target /= out.weight_sum;
  out.source.resize(static_cast<Eigen::Index>(n), 3);
  out.target.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(weight_at(c, i));
    const auto row = static_cast<Eigen::Index>(i);
    out.source.row(row) = sw * (c.source[i] - out.mu_source).transpose();
    out.target.row(row) = sw * (c.target[i] - out.mu_target).transpose();
  }
  return out;
}

// Singular values of a tall matrix through its R factor; QR keeps the small
// singular values accurate to machine precision relative to the largest.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  const Eigen::Index cols = m.cols();
  if (m.rows() < cols) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
}

void require_rank(const Eigen::MatrixXd& m, Eigen::Index rank, const char* what) {
  const Eigen::VectorXd sv = singular_values(m);
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  if (!(largest > 0.0) || sv.size() < rank || !(sv(rank - 1) > kRankEpsilon * largest)) {
    throw Error(ErrorKind::DegenerateConfiguration, what);
  }
}

double rms_scale(const Centered& c) {
  const double src = c.source.squaredNorm();
  const double dst = c.target.squaredNorm();
  return std::sqrt(dst / src);
}

}  // namespace

Sim3Pose procrustes(const Correspondences& c) {
  check_inputs(c, 3);
  const Centered cc = center(c);
  require_rank(cc.source, 2, "source points are collinear or coincident");
  require_rank(cc.target, 2, "target points are collinear or coincident");

  const double s = rms_scale(cc);
  const Eigen::Matrix3d h = (s * cc.source).transpose() * cc.target;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d v = svd.matrixV();
  const Eigen::Matrix3d& u = svd.matrixU();
  if ((v * u.transpose()).determinant() < 0.0) v.col(2) *= -1.0;
  const Rotation3 r = v * u.transpose();
  return {s, r, cc.mu_target - s * r * cc.mu_source};
}

SimY3Pose ga_procrustes(const Correspondences& c) {
  check_inputs(c, 2);
  const Centered cc = center(c);

  Eigen::MatrixX2d src_xz(cc.source.rows(), 2), dst_xz(cc.target.rows(), 2);
  src_xz << cc.source.col(0), cc.source.col(2);
  dst_xz << cc.target.col(0), cc.target.col(2);
  require_rank(src_xz, 1, "source points collapse to one vertical line");
  require_rank(dst_xz, 1, "target points collapse to one vertical line");
  if (!(cc.source.squaredNorm() > 0.0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "source points coincide");
  }

  const double s = rms_scale(cc);
  const Eigen::Matrix2d h = (s * src_xz).transpose() * dst_xz;
  // A vanishing rotational part of H leaves every yaw equally good.
  const double rot_part = std::hypot(h(0, 0) + h(1, 1), h(0, 1) - h(1, 0));
  if (!(rot_part > kRankEpsilon * s * src_xz.norm() * dst_xz.norm())) {
    throw Error(ErrorKind::DegenerateConfiguration, "yaw is unobservable from the xz projections");
  }
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d v = svd.matrixV();
  const Eigen::Matrix2d& u = svd.matrixU();
  if ((v * u.transpose()).determinant() < 0.0) v.col(1) *= -1.0;
  const Eigen::Matrix2d r2 = v * u.transpose();

  // On (x, z) a y rotation acts as [[cos, sin], [-sin, cos]].
  const double yaw = std::atan2(r2(0, 1), r2(0, 0));
  const Rotation3 ry = rot_y(yaw);
  return {s, wrap_angle(yaw), cc.mu_target - s * ry * cc.mu_source};
}

Sim3Pose fit_similarity(const Correspondences& c, Group mode) {
  return mode == Group::Sim3 ? procrustes(c) : ga_procrustes(c).to_sim3();
}

double weighted_residual(const Correspondences& c, const Sim3Pose& pose) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    sum += weight_at(c, i) * (c.target[i] - pose(c.source[i])).squaredNorm();
  }
  return sum;
}

Rotation3 rigid_vectors_registration(const Correspondences& c, double* scale) {
  check_inputs(c, 2);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  double src = 0.0, dst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = weight_at(c, i);
    h += w * c.source[i] * c.target[i].transpose();
    src += w * c.source[i].squaredNorm();
    dst += w * c.target[i].squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || !(sv(1) > kRankEpsilon * sv(0))) {
    throw Error(ErrorKind::DegenerateConfiguration, "vectors span less than a plane");
  }
  Eigen::Matrix3d v = svd.matrixV();
  const Eigen::Matrix3d& u = svd.matrixU();
  if ((v * u.transpose()).determinant() < 0.0) v.col(2) *= -1.0;
  if (scale != nullptr) *scale = std::sqrt(dst / src);
  return v * u.transpose();
}

}  // namespace gravalign
