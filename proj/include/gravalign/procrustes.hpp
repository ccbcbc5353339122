#pragma once

#include <vector>

#include "gravalign/geom.hpp"

namespace gravalign {

/// Paired points: the fitted pose maps source[i] onto target[i]. `weights`
/// is empty (uniform) or one positive weight per pair.
struct Correspondences {
  std::vector<Point3> source;
  std::vector<Point3> target;
  std::vector<double> weights;

  std::size_t size() const { return source.size(); }
};

/// Relative threshold on singular values used by the rank checks.
inline constexpr double kRankEpsilon = 1e-9;

/// Weighted closed-form similarity fit. Scale is the ratio of weighted rms
/// spreads; rotation is Kabsch on H = (s P~)^T diag(w) Q~ with the sign of
/// the last singular vector flipped when needed so that det(R) = +1.
Sim3Pose procrustes(const Correspondences& c);

/// Same fit with the rotation constrained to yaw: the centered clouds are
/// projected to the xz-plane and a 2D rotation is fitted there.
SimY3Pose ga_procrustes(const Correspondences& c);

/// Pose fit for either group, returned as a Sim3 pose.
Sim3Pose fit_similarity(const Correspondences& c, Group mode);

/// Weighted sum of squared residuals sum_i w_i |target_i - pose(source_i)|^2.
double weighted_residual(const Correspondences& c, const Sim3Pose& pose);

/// Rotation-only Kabsch between raw (uncentered) vectors: the rotation R
/// maximizing sum_i w_i target_i . (R source_i). `scale` receives the rms
/// ratio when non-null.
Rotation3 rigid_vectors_registration(const Correspondences& c, double* scale = nullptr);

}  // namespace gravalign
