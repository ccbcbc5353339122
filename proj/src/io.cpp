#include "gravalign/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "gravalign/errors.hpp"

namespace gravalign {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const char* data, std::size_t n) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

FrameTag tag_from_byte(std::uint8_t b) {
  if (b > 2) throw Error(ErrorKind::BadHeader, "unknown frame tag " + std::to_string(b));
  return static_cast<FrameTag>(b);
}

}  // namespace

std::vector<std::uint8_t> encode_pointmap_file(const PointmapFile& f) {
  if (f.channels != 1 && f.channels != 3) throw Error(ErrorKind::BadHeader, "channels must be 1 or 3");
  const std::uint64_t count = std::uint64_t{f.height} * f.width * f.channels;
  if (f.data.size() != count) throw Error(ErrorKind::DimensionMismatch, "data length does not match header");
  std::vector<std::uint8_t> out{'P', 'M', 'P', '1'};
  out.reserve(kPointmapHeaderSize + 4 * count);
  put_u32(out, f.height);
  put_u32(out, f.width);
  out.push_back(f.channels);
  out.push_back(static_cast<std::uint8_t>(f.tag));
  out.push_back(0);
  out.push_back(0);
  for (float v : f.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

PointmapFile decode_pointmap_file(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PMP1", 4) != 0) {
    throw Error(ErrorKind::BadMagic, "not a PMP1 pointmap file");
  }
  if (bytes.size() < kPointmapHeaderSize) throw Error(ErrorKind::TruncatedFile, "header is cut short");
  PointmapFile f;
  f.height = get_u32(bytes.data() + 4);
  f.width = get_u32(bytes.data() + 8);
  f.channels = bytes[12];
  f.tag = tag_from_byte(bytes[13]);
  if (f.channels != 1 && f.channels != 3) throw Error(ErrorKind::BadHeader, "channels must be 1 or 3");
  // height * width fits in 64 bits; compare before multiplying further.
  const std::uint64_t pixels = std::uint64_t{f.height} * f.width;
  if (pixels > kMaxPointmapBytes / (4u * f.channels)) {
    throw Error(ErrorKind::DimensionOverflow, "pointmap dimensions too large");
  }
  const std::size_t n = static_cast<std::size_t>(pixels * f.channels * 4);
  const std::size_t have = bytes.size() - kPointmapHeaderSize;
  if (have < n) throw Error(ErrorKind::TruncatedFile, "data is cut short");
  if (have > n) throw Error(ErrorKind::BadHeader, "trailing bytes after data");
  f.data.resize(n / 4);
  const std::uint8_t* p = bytes.data() + kPointmapHeaderSize;
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return f;
}

PointmapFile read_pointmap_file(const fs::path& path) { return decode_pointmap_file(read_bytes(path)); }

void write_pointmap_file(const PointmapFile& f, const fs::path& path) {
  const auto bytes = encode_pointmap_file(f);
  write_bytes(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_pointmap(const Pointmap& pm, const fs::path& path) {
  pm.validate();
  PointmapFile f;
  f.height = static_cast<std::uint32_t>(pm.height);
  f.width = static_cast<std::uint32_t>(pm.width);
  f.channels = 3;
  f.tag = pm.tag;
  f.data.reserve(3 * pm.size());
  for (const auto& p : pm.points) {
    for (int a = 0; a < 3; ++a) f.data.push_back(static_cast<float>(p[a]));
  }
  write_pointmap_file(f, path);
}

Pointmap read_pointmap(const fs::path& path) {
  const PointmapFile f = read_pointmap_file(path);
  if (f.channels != 3) throw Error(ErrorKind::BadHeader, path.string() + " is not a 3-channel pointmap");
  if (f.height > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      f.width > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorKind::DimensionOverflow, "pointmap dimensions too large");
  }
  Pointmap pm;
  pm.height = static_cast<int>(f.height);
  pm.width = static_cast<int>(f.width);
  pm.tag = f.tag;
  pm.points.resize(f.data.size() / 3);
  for (std::size_t i = 0; i < pm.points.size(); ++i) {
    pm.points[i] = {f.data[3 * i], f.data[3 * i + 1], f.data[3 * i + 2]};
  }
  return pm;
}

void write_confidence(const Pointmap& pm, const fs::path& path) {
  if (!pm.has_confidence()) throw Error(ErrorKind::InvalidArgument, "pointmap has no confidence");
  PointmapFile f;
  f.height = static_cast<std::uint32_t>(pm.height);
  f.width = static_cast<std::uint32_t>(pm.width);
  f.channels = 1;
  f.tag = pm.tag;
  for (double c : pm.confidence) f.data.push_back(static_cast<float>(c));
  write_pointmap_file(f, path);
}

void read_confidence(Pointmap& pm, const fs::path& path) {
  const PointmapFile f = read_pointmap_file(path);
  if (f.channels != 1) throw Error(ErrorKind::BadHeader, path.string() + " is not a confidence map");
  if (static_cast<int>(f.height) != pm.height || static_cast<int>(f.width) != pm.width) {
    throw Error(ErrorKind::DimensionMismatch, "confidence map size differs from its pointmap");
  }
  pm.confidence.assign(f.data.begin(), f.data.end());
}

// ---- PLY ----------------------------------------------------------------

void write_ply(const fs::path& path, const std::vector<Point3>& pts, const std::vector<Color>* colors) {
  if (colors && colors->size() != pts.size()) {
    throw Error(ErrorKind::LengthMismatch, "one color per point required");
  }
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\nelement vertex " << pts.size()
    << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (colors) h << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  h << "end_header\n";
  std::vector<std::uint8_t> out;
  const std::string header = h.str();
  out.assign(header.begin(), header.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(pts[i][a])));
    if (colors) out.insert(out.end(), (*colors)[i].begin(), (*colors)[i].end());
  }
  write_bytes(path, reinterpret_cast<const char*>(out.data()), out.size());
}

std::vector<Point3> read_ply(const fs::path& path, std::vector<Color>* colors) {
  const auto bytes = read_bytes(path);
  const std::string marker = "end_header\n";
  const std::string text(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(bytes.size(), 4096)));
  const auto end = text.find(marker);
  if (text.rfind("ply\n", 0) != 0 || end == std::string::npos) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a PLY file");
  }
  std::istringstream h(text.substr(0, end));
  std::string line;
  std::size_t count = 0;
  bool rgb = false, le = false;
  std::vector<std::string> props;
  while (std::getline(h, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      le = fmt == "binary_little_endian";
    } else if (kw == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") throw Error(ErrorKind::BadHeader, "only vertex elements are supported");
    } else if (kw == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    }
  }
  const std::vector<std::string> xyz = {"float x", "float y", "float z"};
  const std::vector<std::string> xyzrgb = {"float x", "float y", "float z", "uchar red", "uchar green", "uchar blue"};
  if (props == xyzrgb) rgb = true;
  else if (props != xyz) throw Error(ErrorKind::BadHeader, "unsupported PLY vertex layout");
  if (!le) throw Error(ErrorKind::BadHeader, "only binary_little_endian PLY is supported");

  const std::size_t stride = rgb ? 15 : 12;
  const std::size_t start = end + marker.size();
  if (bytes.size() - start < count * stride) throw Error(ErrorKind::TruncatedFile, "PLY vertex data cut short");
  std::vector<Point3> pts(count);
  if (colors) colors->assign(rgb ? count : 0, Color{});
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = bytes.data() + start + i * stride;
    for (int a = 0; a < 3; ++a) pts[i][a] = std::bit_cast<float>(get_u32(p + 4 * a));
    if (rgb && colors) (*colors)[i] = {p[12], p[13], p[14]};
  }
  return pts;
}

// ---- JSON ---------------------------------------------------------------

Group parse_group(const std::string& s) {
  if (s == "sim3") return Group::Sim3;
  if (s == "simy3") return Group::SimY3;
  throw Error(ErrorKind::InvalidArgument, "unknown group '" + s + "'");
}

FrameTag parse_frame_tag(const std::string& s) {
  if (s == "camera") return FrameTag::Camera;
  if (s == "gravity") return FrameTag::Gravity;
  if (s == "world") return FrameTag::World;
  throw Error(ErrorKind::InvalidArgument, "unknown frame tag '" + s + "'");
}

namespace {

Json vec3(const Point3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Point3 vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::InvalidArgument, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Json pose_to_json(const Sim3Pose& p, Group g) {
  Json j;
  j["group"] = to_string(g);
  j["s"] = p.s;
  if (g == Group::SimY3) {
    j["yaw"] = to_simy3(p, 1e-9).yaw;
  } else {
    Json r = Json::array();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r.push_back(p.R(a, b));
    j["R"] = r;
  }
  j["t"] = vec3(p.t);
  return j;
}

Sim3Pose pose_from_json(const Json& j) {
  Sim3Pose p;
  p.s = j.at("s").get<double>();
  if (!(p.s > 0) || !std::isfinite(p.s)) throw Error(ErrorKind::InvalidArgument, "pose scale must be positive");
  if (j.contains("yaw")) {
    p.R = rot_y(j.at("yaw").get<double>());
  } else {
    const Json& r = j.at("R");
    if (!r.is_array() || r.size() != 9) throw Error(ErrorKind::InvalidArgument, "R must hold 9 values");
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) p.R(a, b) = r[3 * a + b].get<double>();
    if (!is_rotation(p.R, 1e-6)) throw Error(ErrorKind::InvalidArgument, "R is not a rotation");
  }
  p.t = vec3_from(j.at("t"));
  return p;
}

Json graph_to_json(const ChunkGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    Json je = {{"type", e.kind == EdgeKind::Adjacency ? "adjacency" : "loop"},
               {"i", e.i},
               {"j", e.j},
               {"pose", pose_to_json(e.measurement, g.mode)}};
    if (e.weight != 1.0) je["weight"] = e.weight;
    edges.push_back(je);
  }
  return {{"mode", to_string(g.mode)}, {"K", g.num_chunks}, {"edges", edges}};
}

ChunkGraph graph_from_json(const Json& j) {
  ChunkGraph g;
  g.mode = parse_group(j.at("mode").get<std::string>());
  g.num_chunks = j.at("K").get<int>();
  for (const auto& je : j.at("edges")) {
    GraphEdge e;
    const std::string type = je.at("type").get<std::string>();
    if (type == "adjacency") e.kind = EdgeKind::Adjacency;
    else if (type == "loop") e.kind = EdgeKind::Loop;
    else throw Error(ErrorKind::InvalidArgument, "unknown edge type '" + type + "'");
    e.i = je.at("i").get<int>();
    e.j = je.at("j").get<int>();
    e.measurement = pose_from_json(je.at("pose"));
    e.weight = je.value("weight", 1.0);
    g.edges.push_back(e);
  }
  g.validate();
  return g;
}

Json gravity_to_json(const GravityEstimate& e) {
  Json r = Json::array();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r.push_back(e.rotation(a, b));
  return {{"rotation", r},
          {"inlier_count", e.inlier_count},
          {"inlier_ratio", e.inlier_ratio},
          {"best_iteration", e.best_iteration},
          {"kept_points", e.kept_points}};
}

Json to_json(const RotationErrorStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"acc_1", s.acc_1},
          {"acc_2", s.acc_2}, {"acc_5", s.acc_5}, {"errors", s.errors}};
}

Json to_json(const PoseErrorStats& s) {
  return {{"ape_r", s.ape_r},
          {"ape_t", s.ape_t},
          {"delta_y", s.delta_y},
          {"rotation", to_json(s.rotation)},
          {"alignment", pose_to_json(s.alignment)}};
}

Json to_json(const StructureStats& s) {
  return {{"acc", s.acc}, {"comp", s.comp}, {"nc", s.nc},
          {"acc_median", s.acc_median}, {"comp_median", s.comp_median}};
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
}

void write_text(const std::string& text, const fs::path& path) {
  write_bytes(path, text.data(), text.size());
}

void write_json(const Json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

// ---- manifests -----------------------------------------------------------

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

Pointmap load_frame(const fs::path& points, const fs::path& confidence) {
  Pointmap pm = read_pointmap(points);
  if (!confidence.empty()) read_confidence(pm, confidence);
  return pm;
}

}  // namespace

Manifest read_manifest(const fs::path& path) {
  const Json j = read_json(path);
  const fs::path base = path.parent_path();
  Manifest m;
  try {
    for (const auto& jf : j.value("frames", Json::array())) {
      FrameEntry f;
      f.id = jf.at("id").get<int>();
      f.pointmap = resolve(base, jf.at("pointmap").get<std::string>());
      if (jf.contains("confidence") && !jf["confidence"].is_null()) {
        f.confidence = resolve(base, jf["confidence"].get<std::string>());
      }
      m.frames.push_back(f);
    }
    for (const auto& jc : j.value("chunks", Json::array())) {
      ChunkEntry c;
      c.frames = jc.at("frames").get<std::vector<int>>();
      for (const auto& p : jc.at("pointmaps")) c.pointmaps.push_back(resolve(base, p.get<std::string>()));
      for (const auto& p : jc.value("confidences", Json::array())) {
        c.confidences.push_back(resolve(base, p.get<std::string>()));
      }
      if (c.pointmaps.size() != c.frames.size() ||
          (!c.confidences.empty() && c.confidences.size() != c.frames.size())) {
        throw Error(ErrorKind::LengthMismatch, "chunk entry lists differ in length");
      }
      m.chunks.push_back(std::move(c));
    }
    for (const auto& jl : j.value("loops", Json::array())) {
      m.loops.push_back({jl.at("a").get<int>(), jl.at("b").get<int>()});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  Json frames = Json::array();
  for (const auto& f : m.frames) {
    Json jf = {{"id", f.id}, {"pointmap", f.pointmap.generic_string()}};
    if (!f.confidence.empty()) jf["confidence"] = f.confidence.generic_string();
    frames.push_back(jf);
  }
  Json j = {{"frames", frames}};
  if (!m.chunks.empty()) {
    Json chunks = Json::array();
    for (const auto& c : m.chunks) {
      Json pm = Json::array(), cf = Json::array();
      for (const auto& p : c.pointmaps) pm.push_back(p.generic_string());
      for (const auto& p : c.confidences) cf.push_back(p.generic_string());
      chunks.push_back({{"frames", c.frames}, {"pointmaps", pm}, {"confidences", cf}});
    }
    j["chunks"] = chunks;
  }
  Json loops = Json::array();
  for (const auto& l : m.loops) loops.push_back({{"a", l.frame_a}, {"b", l.frame_b}});
  j["loops"] = loops;
  write_json(j, path);
}

ManifestProvider::ManifestProvider(const Manifest& m) {
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    if (m.frames[i].id != static_cast<int>(i)) {
      throw Error(ErrorKind::InvalidArgument, "frame ids must be 0, 1, 2, ... in order");
    }
    frames_.push_back(load_frame(m.frames[i].pointmap, m.frames[i].confidence));
    frames_.back().validate();
  }
  num_frames_ = static_cast<int>(frames_.size());
  for (const auto& ce : m.chunks) {
    Chunk c;
    c.frames = ce.frames;
    for (std::size_t k = 0; k < ce.frames.size(); ++k) {
      c.pointmaps.push_back(load_frame(ce.pointmaps[k], ce.confidences.empty() ? fs::path{} : ce.confidences[k]));
    }
    c.validate();
    num_frames_ = std::max(num_frames_, c.frames.back() + 1);
    chunks_.push_back(std::move(c));
  }
}

Chunk ManifestProvider::predict(std::span<const int> frames) const {
  for (const auto& c : chunks_) {
    if (std::equal(c.frames.begin(), c.frames.end(), frames.begin(), frames.end())) return c;
  }
  Chunk c;
  for (int f : frames) {
    if (f < 0 || f >= static_cast<int>(frames_.size())) {
      throw Error(ErrorKind::InvalidArgument,
                  "no stored prediction covers frames starting at " + std::to_string(frames.front()));
    }
    c.frames.push_back(f);
    c.pointmaps.push_back(frames_[static_cast<std::size_t>(f)]);
  }
  return c;
}

Chunk load_chunk(const Manifest& m) {
  const ManifestProvider p(m);
  if (m.chunks.size() == 1) return p.predict(m.chunks.front().frames);
  if (!m.chunks.empty()) throw Error(ErrorKind::InvalidArgument, "manifest holds several chunks");
  std::vector<int> ids;
  for (const auto& f : m.frames) ids.push_back(f.id);
  Chunk c = p.predict(ids);
  c.validate();
  return c;
}

// ---- ground truth and results --------------------------------------------

Json ground_truth_to_json(const GroundTruthFile& gt) {
  Json frames = Json::array();
  for (std::size_t f = 0; f < gt.camera_to_world.size(); ++f) {
    frames.push_back({{"id", f},
                      {"camera_to_world", pose_to_json(gt.camera_to_world[f])},
                      {"gravity_to_world", pose_to_json(gt.gravity_to_world[f].to_sim3(), Group::SimY3)},
                      {"roll", gt.camera_to_gravity[f].roll},
                      {"pitch", gt.camera_to_gravity[f].pitch}});
  }
  Json chunks = Json::array();
  for (const auto& c : gt.chunks) {
    chunks.push_back({{"frames", c.frames}, {"tag", to_string(c.tag)}, {"pose", pose_to_json(c.chunk_to_world)}});
  }
  Json loops = Json::array();
  for (const auto& l : gt.loops) {
    loops.push_back({{"a", l.frame_a}, {"b", l.frame_b}, {"distance", l.distance}, {"yaw_diff_deg", l.yaw_diff_deg}});
  }
  return {{"frames", frames}, {"chunks", chunks}, {"loops", loops}};
}

GroundTruthFile ground_truth_from_json(const Json& j) {
  GroundTruthFile gt;
  try {
    for (const auto& jf : j.value("frames", Json::array())) {
      gt.camera_to_world.push_back(pose_from_json(jf.at("camera_to_world")));
      gt.gravity_to_world.push_back(to_simy3(pose_from_json(jf.at("gravity_to_world")), 1e-9));
      gt.camera_to_gravity.push_back({jf.at("roll").get<double>(), jf.at("pitch").get<double>()});
    }
    for (const auto& jc : j.value("chunks", Json::array())) {
      gt.chunks.push_back({jc.at("frames").get<std::vector<int>>(),
                           parse_frame_tag(jc.at("tag").get<std::string>()), pose_from_json(jc.at("pose"))});
    }
    for (const auto& jl : j.value("loops", Json::array())) {
      gt.loops.push_back({jl.at("a").get<int>(), jl.at("b").get<int>(), jl.value("distance", 0.0),
                          jl.value("yaw_diff_deg", 0.0)});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("ground truth: ") + e.what());
  }
  return gt;
}

Json poses_to_json(const Reconstruction& r) {
  Json chunks = Json::array();
  for (std::size_t k = 0; k < r.poses.size(); ++k) {
    chunks.push_back({{"index", k},
                      {"first", r.chunks[k].first},
                      {"last", r.chunks[k].last},
                      {"pose", pose_to_json(r.poses[k], r.mode)}});
  }
  return {{"mode", to_string(r.mode)}, {"chunks", chunks}};
}

std::vector<PoseFileEntry> poses_from_json(const Json& j, Group* mode) {
  std::vector<PoseFileEntry> out;
  try {
    if (mode) *mode = parse_group(j.at("mode").get<std::string>());
    for (const auto& jc : j.at("chunks")) {
      out.push_back({{jc.at("first").get<int>(), jc.at("last").get<int>()}, pose_from_json(jc.at("pose"))});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("poses: ") + e.what());
  }
  return out;
}

Json diagnostics_to_json(const Reconstruction& r, const PipelineConfig& cfg) {
  Json edges = Json::array();
  for (const auto& e : r.edges) {
    edges.push_back({{"type", e.kind == EdgeKind::Adjacency ? "adjacency" : "loop"},
                     {"i", e.i},
                     {"j", e.j},
                     {"correspondences", e.correspondences},
                     {"residual", e.residual},
                     {"iterations", e.iterations},
                     {"stop", to_string(e.stop)},
                     {"measurement", pose_to_json(e.measurement, r.mode)}});
  }
  Json skipped = Json::array();
  for (const auto& l : r.skipped_loops) skipped.push_back({{"a", l.frame_a}, {"b", l.frame_b}});
  return {{"config",
           {{"mode", to_string(cfg.mode)},
            {"chunk_size", cfg.chunk_size},
            {"overlap", cfg.overlap},
            {"loop_chunk_size", cfg.loop_chunk_size},
            {"irls_max_iters", cfg.irls.max_iters},
            {"stride", cfg.irls.stride},
            {"lm_max_iters", cfg.lm.max_iters}}},
          {"num_chunks", r.chunks.size()},
          {"fused_points", r.cloud.points.size()},
          {"edges", edges},
          {"skipped_loops", skipped},
          {"cost_trace", r.cost_trace},
          {"lm_stop", to_string(r.lm_stop)}};
}

}  // namespace gravalign
