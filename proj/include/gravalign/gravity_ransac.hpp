#pragma once

#include <cstdint>
#include <vector>

#include "gravalign/geom.hpp"

namespace gravalign {

struct RansacConfig {
  int iterations = 5000;
  std::size_t sample_size = 50000;  // clamped to the number of kept points
  double inlier_threshold = 0.05;   // on scale-normalized points
  double top_confidence_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GravityEstimate {
  Rotation3 rotation = Rotation3::Identity();  // camera -> gravity
  std::size_t inlier_count = 0;
  double inlier_ratio = 0.0;
  int best_iteration = 0;
  std::size_t kept_points = 0;
};

/// Confidences are clamped below at 1 + 1e-6 before taking logs.
inline constexpr double kConfidenceFloor = 1.0 + 1e-6;

/// Per-pixel log(psi_g) * log(psi_c).
std::vector<double> joint_confidence(const std::vector<double>& psi_g,
                                     const std::vector<double>& psi_c);

struct NormalizedPoints {
  std::vector<Point3> points;
  double scale = 1.0;
};

/// Divides points by the median distance to their component-wise median.
/// The center is not subtracted.
NormalizedPoints normalize_pointmap_scale(const std::vector<Point3>& pts);

/// Camera-to-gravity rotation between a gravity-frame and a camera-frame
/// pointmap of the same image, by RANSAC over rotation-only Procrustes.
GravityEstimate estimate_gravity_rotation(const Pointmap& pm_g, const Pointmap& pm_c,
                                          const RansacConfig& cfg = {});

}  // namespace gravalign
