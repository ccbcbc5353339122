#include "gravalign/lie.hpp"

#include <Eigen/LU>
#include <array>
#include <cmath>

#include "gravalign/errors.hpp"

namespace gravalign {

Vector7d TangentSim3::vector() const {
  Vector7d v;
  v << nu, omega, sigma;
  return v;
}

TangentSim3 TangentSim3::from_vector(const Vector7d& v) {
  return {v.head<3>(), v.segment<3>(3), v(6)};
}

Vector5d TangentSimY3::vector() const {
  Vector5d v;
  v << nu, theta, sigma;
  return v;
}

TangentSimY3 TangentSimY3::from_vector(const Vector5d& v) { return {v.head<3>(), v(3), v(4)}; }

TangentSim3 embed(const TangentSimY3& xi) {
  return {xi.nu, Eigen::Vector3d(0.0, xi.theta, 0.0), xi.sigma};
}

Rotation3 exp_so3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  if (theta < 1e-8) {
    return Rotation3::Identity() + k + 0.5 * k * k;
  }
  const double half = std::sin(0.5 * theta) / theta;
  return Rotation3::Identity() + (std::sin(theta) / theta) * k + (2.0 * half * half) * k * k;
}

Eigen::Vector3d log_so3(const Rotation3& r) {
  const Eigen::Vector3d v =
      0.5 * Eigen::Vector3d(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = v.norm();
  const double cos_theta = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta > kLogAngleLimit) {
    throw Error(ErrorKind::RotationNearPi,
                "rotation angle " + std::to_string(theta) + " too close to pi for log");
  }
  if (theta < 1e-8) return v * (1.0 + theta * theta / 6.0);
  return v * (theta / sin_theta);
}

namespace {

// m_k(sigma) = int_0^1 u^k e^{sigma u} du for k = 0..4.
std::array<double, 5> exp_moments(double sigma) {
  std::array<double, 5> m{};
  if (std::abs(sigma) < 1.0) {
    // sum_n sigma^n / (n! (n + k + 1))
    for (int k = 0; k < 5; ++k) {
      double term = 1.0, sum = 0.0;
      for (int n = 0; n < 40; ++n) {
        if (n > 0) term *= sigma / n;
        sum += term / (n + k + 1);
        if (std::abs(term) < 1e-20) break;
      }
      m[k] = sum;
    }
    return m;
  }
  const double e = std::exp(sigma);
  m[0] = std::expm1(sigma) / sigma;
  for (int k = 1; k < 5; ++k) m[k] = (e - k * m[k - 1]) / sigma;
  return m;
}

}  // namespace

Eigen::Matrix3d sim3_translation_jacobian(const Eigen::Vector3d& omega, double sigma) {
  const double theta = omega.norm();
  const double theta2 = theta * theta;
  double a, b, c;
  if (theta < kSeriesThreshold) {
    const auto m = exp_moments(sigma);
    a = m[0];
    b = m[1] - theta2 / 6.0 * m[3];
    c = 0.5 * m[2] - theta2 / 24.0 * m[4];
  } else if (std::abs(sigma) < kSeriesThreshold) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sh = std::sin(0.5 * theta);
    const double one_minus_cos = 2.0 * sh * sh;
    a = 1.0 + sigma / 2.0 + sigma * sigma / 6.0;
    b = one_minus_cos / theta2 + sigma * (st - theta * ct) / (theta2 * theta);
    c = (theta - st) / (theta2 * theta) +
        sigma * (0.5 - (theta * st - one_minus_cos) / theta2) / theta2;
  } else {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double es = std::exp(sigma);
    const double denom = sigma * sigma + theta2;
    a = std::expm1(sigma) / sigma;
    b = (es * (sigma * st - theta * ct) + theta) / (theta * denom);
    c = (a - (es * (sigma * ct + theta * st) - sigma) / denom) / theta2;
  }
  const Eigen::Matrix3d k = skew(omega);
  return a * Eigen::Matrix3d::Identity() + b * k + c * k * k;
}

Sim3Pose exp_sim3(const TangentSim3& xi) {
  return {std::exp(xi.sigma), exp_so3(xi.omega), sim3_translation_jacobian(xi.omega, xi.sigma) * xi.nu};
}

TangentSim3 log_sim3(const Sim3Pose& p) {
  if (!(p.s > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  TangentSim3 xi;
  xi.omega = log_so3(p.R);
  xi.sigma = std::log(p.s);
  xi.nu = sim3_translation_jacobian(xi.omega, xi.sigma).partialPivLu().solve(p.t);
  return xi;
}

SimY3Pose exp_simy3(const TangentSimY3& xi) {
  const Sim3Pose p = exp_sim3(embed(xi));
  // R_y(theta) is exp of theta * e_y exactly, so the angle is theta itself.
  return {p.s, wrap_angle(xi.theta), p.t};
}

TangentSimY3 log_simy3(const SimY3Pose& p) {
  if (std::abs(wrap_angle(p.yaw)) > kLogAngleLimit) {
    throw Error(ErrorKind::RotationNearPi, "yaw too close to pi for log");
  }
  const TangentSim3 xi = log_sim3(p.to_sim3());
  if (std::abs(xi.omega.x()) > 1e-9 || std::abs(xi.omega.z()) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "log of a yaw-only pose left the y subalgebra");
  }
  return {xi.nu, xi.omega.y(), xi.sigma};
}

Eigen::Matrix4d hat(const TangentSim3& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.omega) + xi.sigma * Eigen::Matrix3d::Identity();
  m.topRightCorner<3, 1>() = xi.nu;
  return m;
}

Matrix7d adjoint(const Sim3Pose& p) {
  Matrix7d a = Matrix7d::Zero();
  a.block<3, 3>(0, 0) = p.s * p.R;
  a.block<3, 3>(0, 3) = skew(p.t) * p.R;
  a.block<3, 1>(0, 6) = -p.t;
  a.block<3, 3>(3, 3) = p.R;
  a(6, 6) = 1.0;
  return a;
}

Matrix7d ad(const TangentSim3& xi) {
  Matrix7d a = Matrix7d::Zero();
  const Eigen::Matrix3d k = skew(xi.omega);
  a.block<3, 3>(0, 0) = k + xi.sigma * Eigen::Matrix3d::Identity();
  a.block<3, 3>(0, 3) = skew(xi.nu);
  a.block<3, 1>(0, 6) = -xi.nu;
  a.block<3, 3>(3, 3) = k;
  return a;
}

Matrix7d right_jacobian(const TangentSim3& xi) {
  // sum_{n>=0} (-ad)^n / (n+1)!
  const Matrix7d minus_ad = -ad(xi);
  Matrix7d term = Matrix7d::Identity();
  Matrix7d sum = Matrix7d::Identity();
  for (int n = 1; n < 200; ++n) {
    term = term * minus_ad / static_cast<double>(n + 1);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  return sum;
}

Matrix7d right_jacobian_inverse(const TangentSim3& xi) {
  return right_jacobian(xi).partialPivLu().inverse();
}

}  // namespace gravalign
