#include "gravalign/geom.hpp"

#include <cmath>

#include "gravalign/errors.hpp"

namespace gravalign {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::RotationNearPi: return "RotationNearPi";
    case ErrorKind::EmptyOverlap: return "EmptyOverlap";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroScale: return "ZeroScale";
    case ErrorKind::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorKind::MissingAdjacency: return "MissingAdjacency";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InsufficientLoopOverlap: return "InsufficientLoopOverlap";
    case ErrorKind::FrameTagMismatch: return "FrameTagMismatch";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

const char* to_string(Group g) { return g == Group::Sim3 ? "sim3" : "simy3"; }

const char* to_string(FrameTag t) {
  switch (t) {
    case FrameTag::Camera: return "camera";
    case FrameTag::Gravity: return "gravity";
    case FrameTag::World: return "world";
  }
  return "unknown";
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Rotation3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Rotation3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Rotation3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

bool is_rotation(const Eigen::Matrix3d& m, double tol) {
  if (!m.allFinite()) return false;
  const double orth = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orth <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

bool is_yaw_only(const Rotation3& r, double tol) {
  return std::abs(r(0, 1)) <= tol && std::abs(r(1, 0)) <= tol && std::abs(r(1, 2)) <= tol &&
         std::abs(r(2, 1)) <= tol && std::abs(r(1, 1) - 1.0) <= tol;
}

double rotation_angle(const Rotation3& r) {
  // atan2 form avoids the loss of precision of acos near 0 and pi.
  const Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * v.norm();
  const double cos_theta = 0.5 * (r.trace() - 1.0);
  return std::atan2(sin_theta, cos_theta);
}

Eigen::Matrix4d Sim3Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = s * R;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Sim3Pose compose(const Sim3Pose& a, const Sim3Pose& b) {
  return {a.s * b.s, a.R * b.R, a.s * (a.R * b.t) + a.t};
}

SimY3Pose compose(const SimY3Pose& a, const SimY3Pose& b) {
  return {a.s * b.s, wrap_angle(a.yaw + b.yaw), a.s * (a.rotation() * b.t) + a.t};
}

Sim3Pose inverse(const Sim3Pose& p) {
  const Rotation3 rt = p.R.transpose();
  return {1.0 / p.s, rt, -(rt * p.t) / p.s};
}

SimY3Pose inverse(const SimY3Pose& p) {
  const Rotation3 rt = rot_y(-p.yaw);
  return {1.0 / p.s, wrap_angle(-p.yaw), -(rt * p.t) / p.s};
}

std::vector<Point3> apply_pose(const Sim3Pose& pose, std::span<const Point3> pts) {
  std::vector<Point3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(pose(p));
  return out;
}

std::vector<Point3> apply_pose(const SimY3Pose& pose, std::span<const Point3> pts) {
  return apply_pose(pose.to_sim3(), pts);
}

SimY3Pose to_simy3(const Sim3Pose& p, double tol) {
  if (!is_yaw_only(p.R, tol)) {
    throw Error(ErrorKind::InvalidArgument, "rotation has roll/pitch components");
  }
  return {p.s, std::atan2(p.R(0, 2), p.R(0, 0)), p.t};
}

SimY3Pose project_to_simy3(const Sim3Pose& p) {
  // argmax_theta trace(R_y(theta)^T R)
  const double yaw = std::atan2(p.R(0, 2) - p.R(2, 0), p.R(0, 0) + p.R(2, 2));
  return {p.s, wrap_angle(yaw), p.t};
}

bool approx_equal(const Sim3Pose& a, const Sim3Pose& b, double tol) {
  return std::abs(a.s - b.s) <= tol && rotation_angle(a.R.transpose() * b.R) <= tol &&
         (a.t - b.t).norm() <= tol;
}

bool approx_equal(const SimY3Pose& a, const SimY3Pose& b, double tol) {
  return std::abs(a.s - b.s) <= tol && std::abs(wrap_angle(a.yaw - b.yaw)) <= tol &&
         (a.t - b.t).norm() <= tol;
}

std::size_t Pointmap::count_valid() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < points.size(); ++i) n += valid(i) ? 1 : 0;
  return n;
}

void Pointmap::validate() const {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorKind::InvalidArgument, "pointmap dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (points.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "pointmap has " + std::to_string(points.size()) +
                                                  " points, expected " + std::to_string(n));
  }
  if (!confidence.empty()) {
    if (confidence.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "confidence grid does not match pointmap");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid(i)) continue;
      if (!(std::isfinite(confidence[i]) && confidence[i] > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "confidences must be positive and finite");
      }
    }
  }
}

namespace {

Pointmap rotate_pointmap(const Pointmap& pm, const Rotation3& r, FrameTag tag) {
  Pointmap out = pm;
  out.tag = tag;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.valid(i)) out.points[i] = r * pm.points[i];
  }
  return out;
}

}  // namespace

Pointmap camera_to_gravity_frame(const Pointmap& pm, const FrameRotation& fr) {
  if (pm.tag != FrameTag::Camera) {
    throw Error(ErrorKind::FrameTagMismatch, "expected a camera-frame pointmap");
  }
  return rotate_pointmap(pm, fr.matrix(), FrameTag::Gravity);
}

Pointmap gravity_to_camera_frame(const Pointmap& pm, const FrameRotation& fr) {
  if (pm.tag != FrameTag::Gravity) {
    throw Error(ErrorKind::FrameTagMismatch, "expected a gravity-frame pointmap");
  }
  return rotate_pointmap(pm, fr.matrix().transpose(), FrameTag::Camera);
}

Pointmap transform_pointmap(const Pointmap& pm, const Sim3Pose& pose, FrameTag tag) {
  Pointmap out = pm;
  out.tag = tag;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.valid(i)) out.points[i] = pose(pm.points[i]);
  }
  return out;
}

}  // namespace gravalign
