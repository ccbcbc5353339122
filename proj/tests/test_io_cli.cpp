#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "gravalign/cli.hpp"
#include "gravalign/errors.hpp"
#include "gravalign/io.hpp"
#include "test_util.hpp"

using namespace gravalign;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("gravalign_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gravalign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Pointmap sample_pointmap(std::mt19937_64& rng, int h, int w) {
  Pointmap pm;
  pm.height = h;
  pm.width = w;
  pm.tag = FrameTag::Gravity;
  for (int i = 0; i < h * w; ++i) {
    // float-representable values so the round trip is exact
    const Point3 p = gat::random_point(rng, 5.0);
    Point3 q;
    for (int a = 0; a < 3; ++a) {
      const float f = static_cast<float>(p[a]);
      q[a] = static_cast<double>(f);
    }
    pm.points.push_back(q);
  }
  pm.points[3] = Point3::Constant(std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < h * w; ++i) pm.confidence.push_back(static_cast<float>(gat::uniform(rng, 0.1, 3.0)));
  return pm;
}

}  // namespace

TEST_CASE("pointmap files round-trip bit-exactly") {
  TempDir dir("pmp");
  std::mt19937_64 rng(61);
  const Pointmap pm = sample_pointmap(rng, 7, 9);
  write_pointmap(pm, dir.path / "a.pmp");
  write_confidence(pm, dir.path / "a.conf.pmp");
  Pointmap back = read_pointmap(dir.path / "a.pmp");
  read_confidence(back, dir.path / "a.conf.pmp");
  CHECK(back.height == 7);
  CHECK(back.width == 9);
  CHECK(back.tag == FrameTag::Gravity);
  CHECK_FALSE(back.valid(3));
  for (std::size_t i = 0; i < pm.size(); ++i) {
    if (i == 3) continue;
    CHECK(back.points[i] == pm.points[i]);
    CHECK(back.confidence[i] == pm.confidence[i]);
  }
  write_pointmap(back, dir.path / "b.pmp");
  CHECK(file_bytes(dir.path / "a.pmp") == file_bytes(dir.path / "b.pmp"));
  CHECK(file_bytes(dir.path / "a.pmp").size() == kPointmapHeaderSize + 7 * 9 * 3 * 4);
}

TEST_CASE("pointmap header layout and decode errors") {
  PointmapFile f;
  f.height = 2;
  f.width = 3;
  f.channels = 1;
  f.tag = FrameTag::World;
  f.data = {1, 2, 3, 4, 5, 6};
  const auto bytes = encode_pointmap_file(f);
  REQUIRE(bytes.size() == 16 + 24);
  CHECK(std::memcmp(bytes.data(), "PMP1", 4) == 0);
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 1);
  CHECK(bytes[13] == 2);
  float v = 0;
  std::memcpy(&v, bytes.data() + 16 + 4, 4);
  CHECK(v == 2.0f);
  CHECK(decode_pointmap_file(bytes).data == f.data);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(kind_of([&] { decode_pointmap_file(bad); }) == ErrorKind::BadMagic);
  CHECK(kind_of([&] { decode_pointmap_file({bytes.begin(), bytes.begin() + 10}); }) == ErrorKind::TruncatedFile);
  CHECK(kind_of([&] { decode_pointmap_file({bytes.begin(), bytes.end() - 1}); }) == ErrorKind::TruncatedFile);
  auto extra = bytes;
  extra.push_back(0);
  CHECK(kind_of([&] { decode_pointmap_file(extra); }) == ErrorKind::BadHeader);
  auto channels = bytes;
  channels[12] = 2;
  CHECK(kind_of([&] { decode_pointmap_file(channels); }) == ErrorKind::BadHeader);
  auto tag = bytes;
  tag[13] = 9;
  CHECK(kind_of([&] { decode_pointmap_file(tag); }) == ErrorKind::BadHeader);
  auto huge = bytes;
  for (int i = 4; i < 12; ++i) huge[i] = 0xFF;
  CHECK(kind_of([&] { decode_pointmap_file(huge); }) == ErrorKind::DimensionOverflow);

  TempDir dir("pmp_err");
  CHECK(kind_of([&] { read_pointmap(dir.path / "missing.pmp"); }) == ErrorKind::Io);
  write_pointmap_file(f, dir.path / "conf.pmp");
  CHECK(kind_of([&] { read_pointmap(dir.path / "conf.pmp"); }) == ErrorKind::BadHeader);
}

TEST_CASE("PLY header and payload") {
  TempDir dir("ply");
  const std::vector<Point3> pts = {{1, 2, 3}, {-1, 0.5, 0.25}};
  const std::vector<Color> colors = {Color{255, 0, 0}, Color{0, 128, 255}};
  write_ply(dir.path / "c.ply", pts, &colors);
  const auto bytes = file_bytes(dir.path / "c.ply");
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.rfind("ply\nformat binary_little_endian 1.0\n", 0) == 0);
  CHECK(text.find("element vertex 2\n") != std::string::npos);
  CHECK(text.find("property float x\n") != std::string::npos);
  CHECK(text.find("property uchar red\n") != std::string::npos);
  const std::size_t body = text.find("end_header\n") + 11;
  CHECK(bytes.size() - body == 2 * 15);
  std::vector<Color> back_colors;
  const auto back = read_ply(dir.path / "c.ply", &back_colors);
  CHECK(back == pts);
  CHECK(back_colors == colors);
  write_ply(dir.path / "p.ply", pts);
  CHECK(read_ply(dir.path / "p.ply") == pts);
}

TEST_CASE("pose and graph JSON round trips") {
  std::mt19937_64 rng(62);
  const Sim3Pose p = gat::random_sim3(rng);
  CHECK(approx_equal(pose_from_json(pose_to_json(p)), p, 1e-15));
  const SimY3Pose y = gat::random_simy3(rng);
  const Json jy = pose_to_json(y.to_sim3(), Group::SimY3);
  CHECK(jy.at("group") == "simy3");
  CHECK(jy.at("yaw").get<double>() == doctest::Approx(y.yaw));
  CHECK(approx_equal(pose_from_json(jy), y.to_sim3(), 1e-15));
  // Serialization is exact through text.
  CHECK(approx_equal(pose_from_json(Json::parse(pose_to_json(p).dump())), p, 0.0));
  CHECK(kind_of([&] { pose_to_json(p, Group::SimY3); }) == ErrorKind::InvalidArgument);

  const gat::GraphFixture f = gat::random_graph(rng, 6, Group::SimY3, 2);
  const ChunkGraph g = graph_from_json(graph_to_json(f.graph));
  CHECK(g.num_chunks == 6);
  CHECK(g.mode == Group::SimY3);
  REQUIRE(g.edges.size() == f.graph.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    CHECK(g.edges[e].kind == f.graph.edges[e].kind);
    CHECK(g.edges[e].weight == f.graph.edges[e].weight);
    CHECK(approx_equal(g.edges[e].measurement, f.graph.edges[e].measurement, 1e-15));
  }
  CHECK(parse_group("sim3") == Group::Sim3);
  CHECK(parse_frame_tag("world") == FrameTag::World);
  CHECK(kind_of([] { parse_group("se3"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("manifest round trip and provider") {
  TempDir dir("manifest");
  std::mt19937_64 rng(63);
  Manifest m;
  for (int f = 0; f < 3; ++f) {
    const Pointmap pm = sample_pointmap(rng, 4, 5);
    const std::string name = "f" + std::to_string(f);
    write_pointmap(pm, dir.path / (name + ".pmp"));
    write_confidence(pm, dir.path / (name + ".conf.pmp"));
    m.frames.push_back({f, name + ".pmp", name + ".conf.pmp"});
  }
  m.loops.push_back({0, 2});
  write_manifest(m, dir.path / "manifest.json");
  const Manifest back = read_manifest(dir.path / "manifest.json");
  REQUIRE(back.frames.size() == 3);
  CHECK(back.frames[1].pointmap == dir.path / "f1.pmp");
  CHECK(back.loops.size() == 1);
  const ManifestProvider provider(back);
  CHECK(provider.num_frames() == 3);
  const Chunk c = provider.predict(std::vector<int>{1, 2});
  CHECK(c.frames == std::vector<int>{1, 2});
  CHECK(c.pointmaps[0].has_confidence());
  CHECK(load_chunk(back).frames.size() == 3);

  Manifest gap = back;
  gap.frames[2].id = 5;
  CHECK(kind_of([&] { ManifestProvider{gap}; }) == ErrorKind::InvalidArgument);
}

TEST_CASE("cli usage errors and help") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"bogus"}).code == 1);
  const CliResult missing = cli({"synth"});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
  CHECK(cli({"synth", "-o", "/tmp/x", "--trajectory", "spiral"}).code == 1);
  CHECK(cli({"eval-pose", "/nonexistent/poses.json", "/nonexistent/gt.json"}).code == 1);
  TempDir dir("cli_bad");
  write_text("{not json", dir.path / "bad.json");
  CHECK(cli({"eval-pose", (dir.path / "bad.json").string(), (dir.path / "bad.json").string()}).code == 2);
}

TEST_CASE("cli end to end") {
  TempDir dir("cli_e2e");
  const std::string seq = (dir.path / "seq").string();
  const std::string out = (dir.path / "rec").string();
  REQUIRE(cli({"synth", "-o", seq, "--seed", "3", "--trajectory", "orbit", "--frames", "24", "--height", "12",
               "--width", "16", "--scene-points", "5000", "--chunk-size", "8", "--overlap", "3"})
              .code == 0);
  CHECK(fs::exists(fs::path(seq) / "manifest.json"));
  CHECK(fs::exists(fs::path(seq) / "gt.json"));
  CHECK(fs::exists(fs::path(seq) / "gt_fused.ply"));
  const CliResult bad = cli({"reconstruct", seq + "/manifest.json", "-o", out, "--chunk-size", "8", "--overlap", "8"});
  CHECK(bad.code == 1);
  REQUIRE(cli({"reconstruct", seq + "/manifest.json", "-o", out, "--chunk-size", "8", "--overlap", "3"}).code == 0);
  for (const char* f : {"poses.json", "fused.ply", "diagnostics.json"}) CHECK(fs::exists(fs::path(out) / f));

  const CliResult ev = cli({"eval-pose", out + "/poses.json", seq + "/gt.json"});
  REQUIRE(ev.code == 0);
  const Json report = Json::parse(ev.out);
  CHECK(report.at("type") == "pose");
  CHECK(report.at("ape_t").get<double>() < 1e-5);
  CHECK(report.at("ape_r").get<double>() < 1e-3);

  const CliResult es = cli({"eval-structure", out + "/fused.ply", seq + "/gt_fused.ply"});
  REQUIRE(es.code == 0);
  const Json sr = Json::parse(es.out);
  CHECK(sr.at("acc").get<double>() < 1e-5);
  CHECK(sr.at("nc").get<double>() > 0.9);

  // Chunk 1 aligned onto chunk 0 reproduces their ground-truth relative pose.
  const Manifest full = read_manifest(seq + "/manifest.json");
  REQUIRE(full.chunks.size() >= 2);
  const std::string m0 = (dir.path / "c0.json").string(), m1 = (dir.path / "c1.json").string();
  write_manifest({{}, {full.chunks[0]}, {}}, m0);
  write_manifest({{}, {full.chunks[1]}, {}}, m1);
  const CliResult al = cli({"align", m0, m1, "--mode", "simy3"});
  REQUIRE(al.code == 0);
  const GroundTruthFile gt = ground_truth_from_json(read_json(seq + "/gt.json"));
  auto gt_pose = [&](const std::vector<int>& frames) {
    for (const auto& c : gt.chunks) {
      if (c.frames == frames) return c.chunk_to_world;
    }
    FAIL("chunk missing from ground truth");
    return Sim3Pose{};
  };
  const Sim3Pose rel = compose(inverse(gt_pose(full.chunks[0].frames)), gt_pose(full.chunks[1].frames));
  CHECK(gat::pose_distance(pose_from_json(Json::parse(al.out)), rel) < 1e-5);
  const std::string both = seq + "/manifest.json";
  CHECK(cli({"align", both, both}).code == 2);

  const std::string fr = seq + "/frames/frame_0002";
  const CliResult gr = cli({"gravity", fr + ".pmp", fr + ".pmp", "--gravity-confidence", fr + ".conf.pmp",
                            "--camera-confidence", fr + ".conf.pmp", "--iterations", "20", "--sample-size", "50"});
  REQUIRE(gr.code == 0);
  CHECK(Json::parse(gr.out).contains("rotation"));
}
