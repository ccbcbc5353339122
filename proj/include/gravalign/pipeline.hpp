#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gravalign/chunk_align.hpp"
#include "gravalign/geom.hpp"
#include "gravalign/posegraph.hpp"

namespace gravalign {

/// Inclusive frame index range.
struct FrameRange {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  bool contains(int f) const { return f >= first && f <= last; }
  std::vector<int> frames() const;
  bool operator==(const FrameRange&) const = default;
};

struct PipelineConfig {
  int chunk_size = 25;
  int overlap = 7;
  int loop_chunk_size = 3;
  Group mode = Group::SimY3;
  IrlsConfig irls;
  LmConfig lm;

  void validate() const;
};

struct LoopDetection {
  int frame_a = 0;
  int frame_b = 0;
};

/// Source of chunk predictions: pointmaps of the requested frames, all
/// expressed in the reference frame of the first requested frame.
class ChunkProvider {
 public:
  virtual ~ChunkProvider() = default;
  virtual int num_frames() const = 0;
  /// Must be safe to call concurrently.
  virtual Chunk predict(std::span<const int> frames) const = 0;
};

struct EdgeDiagnostics {
  EdgeKind kind = EdgeKind::Adjacency;
  int i = 0;
  int j = 0;
  std::size_t correspondences = 0;
  double residual = 0.0;
  int iterations = 0;
  IrlsStop stop = IrlsStop::Converged;
  Sim3Pose measurement;
};

struct FusedCloud {
  std::vector<Point3> points;
  std::vector<int> source_frame;
  std::vector<int> source_chunk;
};

struct Reconstruction {
  Group mode = Group::SimY3;
  std::vector<FrameRange> chunks;
  std::vector<Sim3Pose> poses;  // chunk -> global (chunk 0's reference frame)
  FusedCloud cloud;
  std::vector<EdgeDiagnostics> edges;
  std::vector<LoopDetection> skipped_loops;
  std::vector<double> cost_trace;
  LmStop lm_stop = LmStop::GradientTolerance;
};

/// Sliding windows of at most chunk_size frames, consecutive windows sharing
/// exactly `overlap` frames. Windows that would add no new frame are dropped,
/// so a shorter tail window always has at least overlap + 1 frames.
std::vector<FrameRange> make_chunks(int num_frames, const PipelineConfig& cfg);

/// Two ranges of 2 * loop_chunk_size frames, [f - L, f + L - 1] around each
/// loop frame, shifted inward at the sequence ends.
std::pair<FrameRange, FrameRange> make_loop_chunks(const LoopDetection& d, int num_frames,
                                                   const PipelineConfig& cfg);

/// Sorted union of both loop ranges: the frames of the combined loop chunk
/// predicted for a detection.
std::vector<int> loop_chunk_frames(const LoopDetection& d, int num_frames, const PipelineConfig& cfg);

/// Chunking, adjacent and loop alignment, chain initialization, pose graph
/// optimization and fusion into chunk 0's frame.
Reconstruction reconstruct(const ChunkProvider& provider, std::span<const LoopDetection> loops,
                           const PipelineConfig& cfg);

/// Maps every valid pixel of every chunk through its pose.
FusedCloud fuse(std::span<const Chunk> chunks, std::span<const Sim3Pose> poses);

}  // namespace gravalign
