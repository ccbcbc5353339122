#pragma once

#include <Eigen/Core>

#include "gravalign/geom.hpp"

namespace gravalign {

using Vector7d = Eigen::Matrix<double, 7, 1>;
using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;

// Tangent coordinates are ordered (nu, omega, sigma): translation part,
// rotation part (axis-angle, radians) and log-scale.
struct TangentSim3 {
  Eigen::Vector3d nu = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  double sigma = 0.0;

  Vector7d vector() const;
  static TangentSim3 from_vector(const Vector7d& v);
};

// (nu, theta, sigma) with theta the rotation about +y.
struct TangentSimY3 {
  Eigen::Vector3d nu = Eigen::Vector3d::Zero();
  double theta = 0.0;
  double sigma = 0.0;

  Vector5d vector() const;
  static TangentSimY3 from_vector(const Vector5d& v);
};

TangentSim3 embed(const TangentSimY3& xi);

Rotation3 exp_so3(const Eigen::Vector3d& omega);

/// Throws RotationNearPi when the angle exceeds pi - 1e-6.
Eigen::Vector3d log_so3(const Rotation3& r);

/// Maps nu to the translation of exp(xi): t = W(omega, sigma) nu with
///   W = A I + B K + C K^2,   K = [omega]x,
///   A = int_0^1 e^{sigma u} du,
///   B = (1/theta) int_0^1 e^{sigma u} sin(theta u) du,
///   C = (1/theta^2) int_0^1 e^{sigma u} (1 - cos(theta u)) du.
/// Series expansions take over below 1e-6 in theta or |sigma|.
Eigen::Matrix3d sim3_translation_jacobian(const Eigen::Vector3d& omega, double sigma);

inline constexpr double kSeriesThreshold = 1e-6;
inline constexpr double kLogAngleLimit = kPi - 1e-6;

Sim3Pose exp_sim3(const TangentSim3& xi);
TangentSim3 log_sim3(const Sim3Pose& p);

SimY3Pose exp_simy3(const TangentSimY3& xi);
TangentSimY3 log_simy3(const SimY3Pose& p);

/// 4x4 matrix form [[sigma I + [omega]x, nu], [0, 0]].
Eigen::Matrix4d hat(const TangentSim3& xi);

/// Adjoint of a group element: log(p exp(xi) p^-1) = Ad(p) xi.
Matrix7d adjoint(const Sim3Pose& p);

/// Lie bracket matrix: [xi, eta] = ad(xi) eta.
Matrix7d ad(const TangentSim3& xi);

/// Right Jacobian: exp(xi + d) ~ exp(xi) exp(J_r(xi) d). Evaluated from the
/// power series of (I - exp(-ad)) / ad, which is entire.
Matrix7d right_jacobian(const TangentSim3& xi);
Matrix7d right_jacobian_inverse(const TangentSim3& xi);

}  // namespace gravalign
