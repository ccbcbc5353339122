#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <span>
#include <vector>

namespace gravalign {

// y is the vertical (up) axis everywhere in this library.
using Point3 = Eigen::Vector3d;
using Rotation3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Right-handed elementary rotations about +x, +y, +z.
Rotation3 rot_x(double a);
Rotation3 rot_y(double a);
Rotation3 rot_z(double a);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

bool is_rotation(const Eigen::Matrix3d& m, double tol = 1e-9);

/// True when `r` is a rotation about the y axis only (off-axis entries below tol).
bool is_yaw_only(const Rotation3& r, double tol = 1e-9);

/// Geodesic angle of a rotation in radians, in [0, pi].
double rotation_angle(const Rotation3& r);

enum class Group : std::uint8_t { Sim3, SimY3 };

const char* to_string(Group g);

/// Yaw-only rotation. The lifted matrix is
///   [[cos, 0, sin], [0, 1, 0], [-sin, 0, cos]].
struct RotationY {
  double angle = 0.0;

  Rotation3 matrix() const { return rot_y(angle); }
};

/// Similarity transform p -> s R p + t.
struct Sim3Pose {
  double s = 1.0;
  Rotation3 R = Rotation3::Identity();
  Point3 t = Point3::Zero();

  static Sim3Pose identity() { return {}; }

  Point3 operator()(const Point3& p) const { return s * (R * p) + t; }
  Eigen::Matrix4d matrix() const;
};

/// Similarity transform restricted to yaw rotations. Yaw is kept in (-pi, pi].
struct SimY3Pose {
  double s = 1.0;
  double yaw = 0.0;
  Point3 t = Point3::Zero();

  static SimY3Pose identity() { return {}; }

  Rotation3 rotation() const { return rot_y(yaw); }
  Sim3Pose to_sim3() const { return {s, rotation(), t}; }
  Point3 operator()(const Point3& p) const { return s * (rotation() * p) + t; }
};

Sim3Pose compose(const Sim3Pose& a, const Sim3Pose& b);
SimY3Pose compose(const SimY3Pose& a, const SimY3Pose& b);
Sim3Pose inverse(const Sim3Pose& p);
SimY3Pose inverse(const SimY3Pose& p);

inline Sim3Pose operator*(const Sim3Pose& a, const Sim3Pose& b) { return compose(a, b); }
inline SimY3Pose operator*(const SimY3Pose& a, const SimY3Pose& b) { return compose(a, b); }

std::vector<Point3> apply_pose(const Sim3Pose& pose, std::span<const Point3> pts);
std::vector<Point3> apply_pose(const SimY3Pose& pose, std::span<const Point3> pts);

/// Extracts the yaw of a yaw-only Sim3 pose. Throws InvalidArgument when the
/// rotation has roll/pitch components above `tol`.
SimY3Pose to_simy3(const Sim3Pose& p, double tol = 1e-9);

/// Nearest yaw-only pose: keeps s and t, replaces R by the closest y rotation.
SimY3Pose project_to_simy3(const Sim3Pose& p);

/// Component-wise comparison: |s1 - s2|, geodesic rotation distance and
/// translation distance all below `tol`.
bool approx_equal(const Sim3Pose& a, const Sim3Pose& b, double tol);
bool approx_equal(const SimY3Pose& a, const SimY3Pose& b, double tol);

enum class FrameTag : std::uint8_t { Camera = 0, Gravity = 1, World = 2 };

const char* to_string(FrameTag t);

/// H x W grid of points, row-major. Non-finite points mark invalid pixels and
/// are skipped by every consumer. `confidence` is either empty or H*W long.
struct Pointmap {
  int height = 0;
  int width = 0;
  std::vector<Point3> points;
  std::vector<double> confidence;
  FrameTag tag = FrameTag::Camera;

  std::size_t size() const { return points.size(); }
  bool has_confidence() const { return !confidence.empty(); }
  bool valid(std::size_t i) const { return points[i].allFinite(); }
  std::size_t count_valid() const;

  /// Throws DimensionMismatch / InvalidArgument if the invariants are broken.
  void validate() const;
};

/// Roll (about z) and pitch (about x) taking a camera frame to its
/// gravity-aligned frame: X_gravity = R_x(pitch) R_z(roll) X_camera.
struct FrameRotation {
  double roll = 0.0;
  double pitch = 0.0;

  Rotation3 matrix() const { return rot_x(pitch) * rot_z(roll); }
};

Pointmap camera_to_gravity_frame(const Pointmap& pm, const FrameRotation& fr);
Pointmap gravity_to_camera_frame(const Pointmap& pm, const FrameRotation& fr);

/// Applies a pose to every valid pixel of a pointmap; invalid pixels stay invalid.
Pointmap transform_pointmap(const Pointmap& pm, const Sim3Pose& pose, FrameTag tag);

}  // namespace gravalign
