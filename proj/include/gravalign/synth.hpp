#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gravalign/geom.hpp"
#include "gravalign/pipeline.hpp"

namespace gravalign {

enum class TrajectoryKind { Orbit, Lawnmower, LoopClosure };

const char* to_string(TrajectoryKind k);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Orbit;
  int num_frames = 60;
  double radius = 2.0;          // orbit radius
  double height = 1.4;          // mean camera height
  double sweep_deg = 300.0;     // orbit arc
  double loop_extra_deg = 60.0; // LoopClosure: orbit of 360 + this
  int passes = 3;               // lawnmower lanes
  double pitch_deg = 10.0;      // mean downward pitch
  double pitch_amp_deg = 4.0;
  double roll_amp_deg = 4.0;
  double height_amp = 0.1;
};

/// Room with the floor at y = 0 and walls at x = +-room.x/2, z = +-room.z/2.
struct SceneSpec {
  std::uint64_t seed = 0;
  Eigen::Vector3d room{8.0, 3.0, 8.0};
  int num_boxes = 6;
  int scene_points = 40000;
  int height = 24;  // pointmap rows
  int width = 32;   // pointmap columns
  double fov_deg = 70.0;  // horizontal field of view
  double max_depth = 15.0;
  TrajectorySpec trajectory;
  int loop_min_gap = 25;          // frames
  double loop_max_distance = 0.3; // camera centers
  double loop_max_yaw_deg = 20.0;
  int max_loops = 2;

  int points_per_frame() const { return height * width; }
  /// Throws InvalidSpec.
  void validate() const;
};

struct LoopPair {
  int frame_a = 0;
  int frame_b = 0;
  double distance = 0.0;
  double yaw_diff_deg = 0.0;
};

struct GroundTruth {
  std::vector<SimY3Pose> gravity_to_world;
  std::vector<Sim3Pose> camera_to_world;
  std::vector<FrameRotation> camera_to_gravity;
  std::vector<Point3> scene;
  std::vector<LoopPair> loops;
};

/// Per-frame pointmaps in world coordinates (tag World, confidence 1) and
/// the ground truth they were rendered from.
struct SyntheticSequence {
  SceneSpec spec;
  std::vector<Pointmap> frames;
  GroundTruth gt;

  std::vector<LoopDetection> loop_detections() const;
};

/// Deterministic in spec.seed. Visibility is frustum containment only.
SyntheticSequence generate(const SceneSpec& spec);

struct NoiseSpec {
  double point_sigma = 0.0;        // additive isotropic Gaussian noise
  double outlier_fraction = 0.0;   // pixels replaced by bounding-box uniform points
  double confidence_floor = 1e-3;  // confidence of outlier pixels
  // Per-frame pose drift inside a chunk, drawn in drift_group's tangent space
  // and applied about the chunk origin. The reference frame is left exact.
  Group drift_group = Group::Sim3;
  double drift_rotation = 0.0;     // radians per axis
  double drift_translation = 0.0;  // scene units per axis
  double drift_scale = 0.0;        // log-scale

  bool is_zero() const;
  void validate() const;
};

/// Adds drift, Gaussian noise and outliers. Confidence becomes
/// 1 / (1 + |noise|), or the floor for outliers. Invalid pixels stay invalid.
std::vector<Pointmap> corrupt(std::span<const Pointmap> pointmaps, const NoiseSpec& noise,
                              std::uint64_t seed);

struct ProviderOptions {
  FrameTag frame = FrameTag::Gravity;  // Camera or Gravity reference frames
  NoiseSpec noise;
  double scale_sigma = 0.0;  // per-chunk log-normal scale ambiguity
  std::uint64_t seed = 0;
};

/// Chunk predictions rendered from a synthetic sequence, in the camera or
/// gravity frame of the chunk's first frame.
class SyntheticProvider : public ChunkProvider {
 public:
  SyntheticProvider(SyntheticSequence seq, ProviderOptions opt);

  int num_frames() const override { return static_cast<int>(seq_.frames.size()); }
  Chunk predict(std::span<const int> frames) const override;

  /// Ground-truth pose mapping the chunk prediction for `frames` into world.
  Sim3Pose chunk_to_world(std::span<const int> frames) const;
  const SyntheticSequence& sequence() const { return seq_; }
  const ProviderOptions& options() const { return opt_; }

 private:
  std::uint64_t chunk_seed(std::span<const int> frames) const;
  double chunk_scale(std::span<const int> frames) const;

  SyntheticSequence seq_;
  ProviderOptions opt_;
};

/// Ground-truth world points in the order fuse() emits them for these chunks.
std::vector<Point3> ground_truth_cloud(const SyntheticSequence& seq,
                                       std::span<const FrameRange> chunks);

/// Same-image pointmaps in the gravity and camera frames, as input for
/// camera-to-gravity estimation. Confidences are exp(c) with c the usual
/// noise confidence, so they stay above 1. Outlier pixels corrupt the
/// camera side and get the floor confidence on both sides.
struct GravityPair {
  Pointmap gravity;
  Pointmap camera;
  Rotation3 camera_to_gravity = Rotation3::Identity();
};

GravityPair gravity_pair(const SyntheticSequence& seq, int frame, const NoiseSpec& noise,
                         std::uint64_t seed);

}  // namespace gravalign
