#pragma once

#include <span>
#include <vector>

#include "gravalign/geom.hpp"

namespace gravalign {

/// Geodesic distance in degrees, computed from trace(R2 R1^T) in the
/// equivalent atan2 form that stays accurate near 0 and 180 degrees.
double geodesic_rotation_error(const Rotation3& r1, const Rotation3& r2);

struct RotationErrorStats {
  std::vector<double> errors;  // degrees
  double mean = 0.0;
  double median = 0.0;
  double acc_1 = 0.0;  // % of errors strictly below 1 degree
  double acc_2 = 0.0;
  double acc_5 = 0.0;
};

RotationErrorStats rotation_stats(std::span<const Rotation3> pred, std::span<const Rotation3> gt);

struct PoseErrorStats {
  double ape_r = 0.0;    // degrees, RMSE
  double ape_t = 0.0;    // scene units, RMSE
  double delta_y = 0.0;  // median |y error|
  Sim3Pose alignment;    // applied to the prediction before comparing
  RotationErrorStats rotation;
};

/// Absolute pose error. With `align` the predicted trajectory is first fitted
/// to the ground truth over pose translations in `mode`'s group.
PoseErrorStats ape(std::span<const Sim3Pose> pred, std::span<const Sim3Pose> gt, Group mode,
                   bool align = true);

struct StructureOptions {
  bool align = true;            // Procrustes over index correspondences
  Group align_group = Group::Sim3;
  std::size_t k_normals = 16;
};

struct StructureStats {
  double acc = 0.0;
  double comp = 0.0;
  double nc = 0.0;
  double acc_median = 0.0;
  double comp_median = 0.0;
};

/// Per-point unit normals from PCA over the k nearest neighbours (self included).
std::vector<Point3> estimate_normals(std::span<const Point3> pts, std::size_t k);

/// Distance from each point of `from` to its nearest neighbour in `to`.
std::vector<double> nearest_distances(std::span<const Point3> from, std::span<const Point3> to);

/// ACC (pred -> gt), COMP (gt -> pred), and NC, the average over both
/// directions of |n_p . n_nn(p)|.
StructureStats structure_metrics(std::span<const Point3> pred, std::span<const Point3> gt,
                                 const StructureOptions& opt = {});

}  // namespace gravalign
