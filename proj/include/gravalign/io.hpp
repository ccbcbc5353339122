#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gravalign/geom.hpp"
#include "gravalign/gravity_ransac.hpp"
#include "gravalign/metrics.hpp"
#include "gravalign/pipeline.hpp"
#include "gravalign/posegraph.hpp"
#include "gravalign/synth.hpp"

namespace gravalign {

using Json = nlohmann::json;
namespace fs = std::filesystem;

// ---- binary pointmap files ----------------------------------------------
//
// 16-byte header: "PMP1", u32 height, u32 width, u8 channels (3 = points,
// 1 = confidence), u8 frame tag, 2 zero bytes. Then float32 little-endian
// values, row-major, channel-interleaved. NaN marks invalid pixels.

inline constexpr std::size_t kPointmapHeaderSize = 16;
/// Files whose payload would exceed this many bytes are rejected.
inline constexpr std::uint64_t kMaxPointmapBytes = std::uint64_t{1} << 36;

struct PointmapFile {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint8_t channels = 3;
  FrameTag tag = FrameTag::Camera;
  std::vector<float> data;
};

std::vector<std::uint8_t> encode_pointmap_file(const PointmapFile& f);
/// Throws BadMagic, BadHeader, DimensionOverflow or TruncatedFile.
PointmapFile decode_pointmap_file(const std::vector<std::uint8_t>& bytes);

PointmapFile read_pointmap_file(const fs::path& path);
void write_pointmap_file(const PointmapFile& f, const fs::path& path);

/// Points only; confidence is stored in a separate one-channel file.
void write_pointmap(const Pointmap& pm, const fs::path& path);
Pointmap read_pointmap(const fs::path& path);
void write_confidence(const Pointmap& pm, const fs::path& path);
/// Loads a one-channel file into pm.confidence (dimensions must match).
void read_confidence(Pointmap& pm, const fs::path& path);

// ---- PLY ----------------------------------------------------------------

using Color = std::array<std::uint8_t, 3>;

/// binary_little_endian 1.0, float x y z and, when colors are given, uchar
/// red green blue.
void write_ply(const fs::path& path, const std::vector<Point3>& pts,
               const std::vector<Color>* colors = nullptr);
std::vector<Point3> read_ply(const fs::path& path, std::vector<Color>* colors = nullptr);

// ---- JSON ---------------------------------------------------------------

Group parse_group(const std::string& s);
FrameTag parse_frame_tag(const std::string& s);

/// {"group": "sim3", "s", "R": [9 row-major], "t": [3]} or
/// {"group": "simy3", "s", "yaw", "t": [3]}.
Json pose_to_json(const Sim3Pose& p, Group g = Group::Sim3);
Sim3Pose pose_from_json(const Json& j);

Json graph_to_json(const ChunkGraph& g);
ChunkGraph graph_from_json(const Json& j);

Json gravity_to_json(const GravityEstimate& e);

Json to_json(const RotationErrorStats& s);
Json to_json(const PoseErrorStats& s);
Json to_json(const StructureStats& s);

Json read_json(const fs::path& path);
void write_json(const Json& j, const fs::path& path);
void write_text(const std::string& text, const fs::path& path);

// ---- sequence manifests ---------------------------------------------------

struct FrameEntry {
  int id = 0;
  fs::path pointmap;
  fs::path confidence;  // may be empty
};

struct ChunkEntry {
  std::vector<int> frames;
  std::vector<fs::path> pointmaps;
  std::vector<fs::path> confidences;
};

/// {"frames": [{"id", "pointmap", "confidence"}], "loops": [{"a", "b"}]},
/// optionally with "chunks": [{"frames", "pointmaps", "confidences"}] holding
/// chunk predictions in their own reference frames. Relative paths resolve
/// against the manifest's directory.
struct Manifest {
  std::vector<FrameEntry> frames;
  std::vector<ChunkEntry> chunks;
  std::vector<LoopDetection> loops;
};

Manifest read_manifest(const fs::path& path);
/// Paths are written as given (relative paths stay relative).
void write_manifest(const Manifest& m, const fs::path& path);

/// Serves stored chunk predictions; chunks not stored are assembled from the
/// per-frame pointmaps when those share one frame tag. Loads everything up
/// front, so predict() is safe to call concurrently.
class ManifestProvider : public ChunkProvider {
 public:
  explicit ManifestProvider(const Manifest& m);

  int num_frames() const override { return num_frames_; }
  Chunk predict(std::span<const int> frames) const override;

 private:
  int num_frames_ = 0;
  std::vector<Pointmap> frames_;
  std::vector<Chunk> chunks_;
};

/// Loads a manifest as a single chunk: its only stored chunk, or its frames.
Chunk load_chunk(const Manifest& m);

// ---- ground truth and results --------------------------------------------

struct GtChunk {
  std::vector<int> frames;
  FrameTag tag = FrameTag::Gravity;
  Sim3Pose chunk_to_world;
};

struct GroundTruthFile {
  std::vector<Sim3Pose> camera_to_world;
  std::vector<SimY3Pose> gravity_to_world;
  std::vector<FrameRotation> camera_to_gravity;
  std::vector<GtChunk> chunks;
  std::vector<LoopPair> loops;
};

Json ground_truth_to_json(const GroundTruthFile& gt);
GroundTruthFile ground_truth_from_json(const Json& j);

struct PoseFileEntry {
  FrameRange range;
  Sim3Pose pose;
};

/// {"mode", "chunks": [{"index", "first", "last", "pose"}]}
Json poses_to_json(const Reconstruction& r);
std::vector<PoseFileEntry> poses_from_json(const Json& j, Group* mode = nullptr);

Json diagnostics_to_json(const Reconstruction& r, const PipelineConfig& cfg);

}  // namespace gravalign
