#include "gravalign/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <string>

#include "gravalign/chunk_align.hpp"
#include "gravalign/errors.hpp"
#include "gravalign/gravity_ransac.hpp"
#include "gravalign/io.hpp"
#include "gravalign/metrics.hpp"
#include "gravalign/pipeline.hpp"
#include "gravalign/rng.hpp"
#include "gravalign/synth.hpp"

namespace gravalign {

namespace {

// Invalid flag combinations detected after parsing; reported as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Config>
void check_usage(const Config& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

const std::map<std::string, Group> kGroups{{"sim3", Group::Sim3}, {"simy3", Group::SimY3}};

std::string frame_name(const char* prefix, int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d", prefix, id);
  return buf;
}

void emit(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) out << j.dump(2) << "\n";
  else write_json(j, path);
}

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string output;
  std::string trajectory = "loop";
  int frames = 80;
  int height = 24, width = 32;
  int scene_points = 40000;
  int boxes = 6;
  std::string frame = "gravity";
  double point_sigma = 0, outliers = 0, drift_rot = 0, drift_trans = 0, drift_scale = 0, scale_sigma = 0;
  std::string drift_group = "sim3";
  int chunk_size = 25, overlap = 7, loop_chunk_size = 3;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SceneSpec spec;
  spec.seed = a.seed;
  spec.num_boxes = a.boxes;
  spec.scene_points = a.scene_points;
  spec.height = a.height;
  spec.width = a.width;
  spec.trajectory.num_frames = a.frames;
  spec.trajectory.kind = a.trajectory == "orbit"       ? TrajectoryKind::Orbit
                         : a.trajectory == "lawnmower" ? TrajectoryKind::Lawnmower
                                                       : TrajectoryKind::LoopClosure;
  PipelineConfig cfg;
  cfg.chunk_size = a.chunk_size;
  cfg.overlap = a.overlap;
  cfg.loop_chunk_size = a.loop_chunk_size;
  check_usage(cfg);
  check_usage(spec);

  ProviderOptions opt;
  opt.frame = parse_frame_tag(a.frame);
  opt.seed = derive_seed(a.seed, 77);
  opt.scale_sigma = a.scale_sigma;
  opt.noise.point_sigma = a.point_sigma;
  opt.noise.outlier_fraction = a.outliers;
  opt.noise.drift_group = parse_group(a.drift_group);
  opt.noise.drift_rotation = a.drift_rot;
  opt.noise.drift_translation = a.drift_trans;
  opt.noise.drift_scale = a.drift_scale;

  const SyntheticProvider provider(generate(spec), opt);
  const SyntheticSequence& seq = provider.sequence();
  const fs::path dir(a.output);
  fs::create_directories(dir);

  Manifest m;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const std::string name = frame_name("frame", static_cast<int>(f));
    const fs::path pm = fs::path("frames") / (name + ".pmp"), cf = fs::path("frames") / (name + ".conf.pmp");
    write_pointmap(seq.frames[f], dir / pm);
    write_confidence(seq.frames[f], dir / cf);
    m.frames.push_back({static_cast<int>(f), pm, cf});
  }
  m.loops = seq.loop_detections();

  GroundTruthFile gt;
  gt.camera_to_world = seq.gt.camera_to_world;
  gt.gravity_to_world = seq.gt.gravity_to_world;
  gt.camera_to_gravity = seq.gt.camera_to_gravity;
  gt.loops = seq.gt.loops;

  std::vector<std::vector<int>> predicted;
  const auto ranges = make_chunks(provider.num_frames(), cfg);
  for (const auto& r : ranges) predicted.push_back(r.frames());
  for (const auto& d : m.loops) predicted.push_back(loop_chunk_frames(d, provider.num_frames(), cfg));

  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const Chunk c = provider.predict(predicted[k]);
    const fs::path sub = fs::path("chunks") / frame_name("chunk", static_cast<int>(k));
    ChunkEntry e;
    e.frames = c.frames;
    for (std::size_t i = 0; i < c.frames.size(); ++i) {
      const std::string name = frame_name("frame", c.frames[i]);
      e.pointmaps.push_back(sub / (name + ".pmp"));
      e.confidences.push_back(sub / (name + ".conf.pmp"));
      write_pointmap(c.pointmaps[i], dir / e.pointmaps.back());
      write_confidence(c.pointmaps[i], dir / e.confidences.back());
    }
    m.chunks.push_back(std::move(e));
    gt.chunks.push_back({c.frames, opt.frame, provider.chunk_to_world(c.frames)});
  }

  write_manifest(m, dir / "manifest.json");
  write_json(ground_truth_to_json(gt), dir / "gt.json");
  write_ply(dir / "gt_fused.ply", ground_truth_cloud(seq, ranges));
  out << "wrote " << seq.frames.size() << " frames, " << predicted.size() << " chunk predictions, "
      << m.loops.size() << " loops to " << dir.string() << "\n";
  return 0;
}

struct ReconstructArgs {
  std::string manifest, output, mode = "simy3", jacobian = "numeric";
  int chunk_size = 25, overlap = 7, loop_chunk_size = 3, irls_iters = 10, stride = 1, lm_iters = 100;
  bool no_loops = false;
};

Color chunk_color(int k) {
  static const Color palette[] = {{230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
                                  {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230}};
  return palette[k % 8];
}

int run_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  PipelineConfig cfg;
  cfg.mode = kGroups.at(a.mode);
  cfg.chunk_size = a.chunk_size;
  cfg.overlap = a.overlap;
  cfg.loop_chunk_size = a.loop_chunk_size;
  cfg.irls.max_iters = a.irls_iters;
  cfg.irls.stride = a.stride;
  cfg.lm.max_iters = a.lm_iters;
  cfg.lm.jacobian = a.jacobian == "analytic" ? JacobianMode::Analytic : JacobianMode::NumericCentral;
  check_usage(cfg);

  const Manifest m = read_manifest(a.manifest);
  const ManifestProvider provider(m);
  const std::vector<LoopDetection> loops = a.no_loops ? std::vector<LoopDetection>{} : m.loops;
  const Reconstruction r = reconstruct(provider, loops, cfg);

  const fs::path dir(a.output);
  fs::create_directories(dir);
  write_json(poses_to_json(r), dir / "poses.json");
  std::vector<Color> colors;
  colors.reserve(r.cloud.points.size());
  for (int k : r.cloud.source_chunk) colors.push_back(chunk_color(k));
  write_ply(dir / "fused.ply", r.cloud.points, &colors);
  write_json(diagnostics_to_json(r, cfg), dir / "diagnostics.json");
  out << "reconstructed " << r.chunks.size() << " chunks, " << r.cloud.points.size() << " points ("
      << to_string(r.lm_stop) << ")\n";
  return 0;
}

struct AlignArgs {
  std::string a, b, mode = "simy3", output;
  int irls_iters = 10, stride = 1;
};

int run_align(const AlignArgs& a, std::ostream& out) {
  IrlsConfig irls;
  irls.max_iters = a.irls_iters;
  irls.stride = a.stride;
  const Group mode = kGroups.at(a.mode);
  const Chunk ca = load_chunk(read_manifest(a.a));
  const Chunk cb = load_chunk(read_manifest(a.b));
  const ChunkAlignment al = align_chunks(ca, cb, overlap_by_frame_id(ca, cb), mode, irls);
  Json j = pose_to_json(al.pose, mode);
  j["iterations"] = al.iterations;
  j["stop"] = to_string(al.stop);
  j["residual"] = al.residual;
  j["correspondences"] = al.weights.size();
  emit(j, a.output, out);
  return 0;
}

struct GravityArgs {
  std::string gravity, camera, gravity_conf, camera_conf, output;
  RansacConfig cfg;
};

int run_gravity(const GravityArgs& a, std::ostream& out) {
  Pointmap g = read_pointmap(a.gravity);
  Pointmap c = read_pointmap(a.camera);
  read_confidence(g, a.gravity_conf);
  read_confidence(c, a.camera_conf);
  emit(gravity_to_json(estimate_gravity_rotation(g, c, a.cfg)), a.output, out);
  return 0;
}

struct EvalPoseArgs {
  std::string poses, gt, output;
  bool no_align = false;
};

int run_eval_pose(const EvalPoseArgs& a, std::ostream& out) {
  Group mode = Group::Sim3;
  const auto pred = poses_from_json(read_json(a.poses), &mode);
  const GroundTruthFile gt = ground_truth_from_json(read_json(a.gt));
  std::vector<Sim3Pose> p, g;
  for (const auto& e : pred) {
    const auto it = std::find_if(gt.chunks.begin(), gt.chunks.end(), [&](const GtChunk& c) {
      return !c.frames.empty() && c.frames.front() == e.range.first && c.frames.back() == e.range.last &&
             static_cast<int>(c.frames.size()) == e.range.size();
    });
    if (it == gt.chunks.end()) {
      throw Error(ErrorKind::InvalidArgument, "no ground-truth pose for chunk [" +
                                                  std::to_string(e.range.first) + ", " +
                                                  std::to_string(e.range.last) + "]");
    }
    p.push_back(e.pose);
    g.push_back(it->chunk_to_world);
  }
  const PoseErrorStats s = ape(p, g, mode, !a.no_align);
  Json j = to_json(s);
  j["type"] = "pose";
  j["config"] = {{"mode", to_string(mode)}, {"align", !a.no_align}, {"num_poses", p.size()}};
  emit(j, a.output, out);
  return 0;
}

struct EvalStructureArgs {
  std::string pred, gt, output, align_group = "sim3";
  bool no_align = false;
  std::size_t k_normals = 16;
};

int run_eval_structure(const EvalStructureArgs& a, std::ostream& out) {
  const auto pred = read_ply(a.pred);
  const auto gt = read_ply(a.gt);
  StructureOptions opt;
  opt.align = !a.no_align;
  opt.align_group = kGroups.at(a.align_group);
  opt.k_normals = a.k_normals;
  const StructureStats s = structure_metrics(pred, gt, opt);
  Json j = to_json(s);
  j["type"] = "structure";
  j["config"] = {{"align", opt.align},
                 {"align_group", to_string(opt.align_group)},
                 {"k_normals", opt.k_normals},
                 {"num_pred", pred.size()},
                 {"num_gt", gt.size()}};
  emit(j, a.output, out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gravity-aligned chunk alignment and reconstruction", "gravalign"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  auto mode_check = CLI::IsMember({"sim3", "simy3"});

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
  synth->add_option("-o,--output", sa.output, "Output directory")->required();
  synth->add_option("--seed", sa.seed, "Random seed");
  synth->add_option("--trajectory", sa.trajectory)->check(CLI::IsMember({"orbit", "lawnmower", "loop"}));
  synth->add_option("--frames", sa.frames)->check(CLI::Range(2, 100000));
  synth->add_option("--height", sa.height)->check(CLI::Range(1, 10000));
  synth->add_option("--width", sa.width)->check(CLI::Range(1, 10000));
  synth->add_option("--scene-points", sa.scene_points)->check(CLI::Range(100, 100000000));
  synth->add_option("--boxes", sa.boxes)->check(CLI::Range(0, 1000));
  synth->add_option("--frame", sa.frame, "Chunk reference frame")->check(CLI::IsMember({"camera", "gravity"}));
  synth->add_option("--point-sigma", sa.point_sigma)->check(CLI::NonNegativeNumber);
  synth->add_option("--outliers", sa.outliers)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--drift-group", sa.drift_group)->check(mode_check);
  synth->add_option("--drift-rot", sa.drift_rot, "Per-frame drift, radians")->check(CLI::NonNegativeNumber);
  synth->add_option("--drift-trans", sa.drift_trans)->check(CLI::NonNegativeNumber);
  synth->add_option("--drift-scale", sa.drift_scale)->check(CLI::NonNegativeNumber);
  synth->add_option("--scale-sigma", sa.scale_sigma, "Per-chunk log-scale ambiguity")->check(CLI::NonNegativeNumber);
  synth->add_option("--chunk-size", sa.chunk_size)->check(CLI::Range(2, 100000));
  synth->add_option("--overlap", sa.overlap)->check(CLI::Range(1, 100000));
  synth->add_option("--loop-chunk-size", sa.loop_chunk_size)->check(CLI::Range(1, 100000));

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Chunked reconstruction of a sequence manifest");
  rec->add_option("manifest", ra.manifest)->required()->check(CLI::ExistingFile);
  rec->add_option("-o,--output", ra.output, "Output directory")->required();
  rec->add_option("--mode", ra.mode)->check(mode_check);
  rec->add_option("--chunk-size", ra.chunk_size)->check(CLI::Range(2, 100000));
  rec->add_option("--overlap", ra.overlap)->check(CLI::Range(1, 100000));
  rec->add_option("--loop-chunk-size", ra.loop_chunk_size)->check(CLI::Range(1, 100000));
  rec->add_option("--irls-iters", ra.irls_iters)->check(CLI::Range(1, 100000));
  rec->add_option("--stride", ra.stride)->check(CLI::Range(1, 100000));
  rec->add_option("--lm-iters", ra.lm_iters)->check(CLI::Range(1, 100000));
  rec->add_option("--jacobian", ra.jacobian)->check(CLI::IsMember({"numeric", "analytic"}));
  rec->add_flag("--no-loops", ra.no_loops, "Ignore the manifest's loop detections");
  rec->add_option("--seed", seed);

  AlignArgs aa;
  auto* align = app.add_subcommand("align", "Align chunk B onto chunk A over shared frames");
  align->add_option("a", aa.a)->required()->check(CLI::ExistingFile);
  align->add_option("b", aa.b)->required()->check(CLI::ExistingFile);
  align->add_option("--mode", aa.mode)->check(mode_check);
  align->add_option("--irls-iters", aa.irls_iters)->check(CLI::Range(1, 100000));
  align->add_option("--stride", aa.stride)->check(CLI::Range(1, 100000));
  align->add_option("-o,--output", aa.output, "Pose JSON path (default: stdout)");
  align->add_option("--seed", seed);

  GravityArgs ga;
  auto* grav = app.add_subcommand("gravity", "Camera-to-gravity rotation by RANSAC");
  grav->add_option("gravity", ga.gravity, "Gravity-frame pointmap")->required()->check(CLI::ExistingFile);
  grav->add_option("camera", ga.camera, "Camera-frame pointmap")->required()->check(CLI::ExistingFile);
  grav->add_option("--gravity-confidence", ga.gravity_conf)->required()->check(CLI::ExistingFile);
  grav->add_option("--camera-confidence", ga.camera_conf)->required()->check(CLI::ExistingFile);
  grav->add_option("--iterations", ga.cfg.iterations)->check(CLI::Range(1, 100000000));
  grav->add_option("--sample-size", ga.cfg.sample_size)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
  grav->add_option("--threshold", ga.cfg.inlier_threshold)->check(CLI::PositiveNumber);
  grav->add_option("--top-fraction", ga.cfg.top_confidence_fraction)->check(CLI::Range(1e-12, 1.0));
  grav->add_option("--seed", ga.cfg.seed);
  grav->add_option("-o,--output", ga.output, "Estimate JSON path (default: stdout)");

  EvalPoseArgs ea;
  auto* evp = app.add_subcommand("eval-pose", "Absolute pose error against ground truth");
  evp->add_option("poses", ea.poses)->required()->check(CLI::ExistingFile);
  evp->add_option("gt", ea.gt)->required()->check(CLI::ExistingFile);
  evp->add_flag("--no-align", ea.no_align, "Compare without trajectory alignment");
  evp->add_option("-o,--output", ea.output, "Report JSON path (default: stdout)");
  evp->add_option("--seed", seed);

  EvalStructureArgs es;
  auto* evs = app.add_subcommand("eval-structure", "ACC, COMP and NC between two PLY clouds");
  evs->add_option("pred", es.pred)->required()->check(CLI::ExistingFile);
  evs->add_option("gt", es.gt)->required()->check(CLI::ExistingFile);
  evs->add_flag("--no-align", es.no_align, "Skip the Procrustes pre-alignment");
  evs->add_option("--align-group", es.align_group)->check(mode_check);
  evs->add_option("--k-normals", es.k_normals)->check(CLI::Range(std::size_t{3}, std::size_t{1000}));
  evs->add_option("-o,--output", es.output, "Report JSON path (default: stdout)");
  evs->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*synth) return run_synth(sa, out);
    if (*rec) return run_reconstruct(ra, out);
    if (*align) return run_align(aa, out);
    if (*grav) return run_gravity(ga, out);
    if (*evp) return run_eval_pose(ea, out);
    if (*evs) return run_eval_structure(es, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace gravalign
