#include "gravalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gravalign/errors.hpp"
#include "gravalign/lie.hpp"
#include "gravalign/parallel.hpp"
#include "gravalign/rng.hpp"

namespace gravalign {

const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::Orbit: return "orbit";
    case TrajectoryKind::Lawnmower: return "lawnmower";
    case TrajectoryKind::LoopClosure: return "loop";
  }
  return "?";
}

void SceneSpec::validate() const {
  auto fail = [](const char* m) { throw Error(ErrorKind::InvalidSpec, m); };
  if (!(room.x() > 0 && room.y() > 0 && room.z() > 0)) fail("room extents must be positive");
  if (num_boxes < 0) fail("num_boxes must be non-negative");
  if (height < 1 || width < 1 || points_per_frame() < 100) fail("need at least 100 points per frame");
  if (scene_points < points_per_frame()) fail("scene_points below points per frame");
  if (!(fov_deg > 1.0 && fov_deg < 170.0)) fail("fov_deg must lie in (1, 170)");
  if (!(max_depth > 0.1)) fail("max_depth must exceed the near plane");
  const TrajectorySpec& t = trajectory;
  if (t.num_frames < 2) fail("need at least two frames");
  if (!(t.radius > 0)) fail("radius must be positive");
  if (t.passes < 1) fail("passes must be >= 1");
  if (!(t.sweep_deg > 0) || t.loop_extra_deg < 0) fail("sweep angles must be positive");
  if (t.height <= 0 || t.height >= room.y()) fail("camera height must lie inside the room");
  if (loop_min_gap < 1 || !(loop_max_distance > 0) || max_loops < 0) fail("bad loop parameters");
}

namespace {

constexpr double kNear = 0.1;

struct CameraState {
  Point3 center;
  double yaw = 0.0, pitch = 0.0, roll = 0.0;
};

void fill_orientation(const TrajectorySpec& t, double phase, CameraState& c) {
  c.pitch = deg2rad(t.pitch_deg + t.pitch_amp_deg * std::sin(3.0 * phase));
  c.roll = deg2rad(t.roll_amp_deg * std::sin(2.0 * phase + 0.5));
}

std::vector<CameraState> orbit(const TrajectorySpec& t, double sweep) {
  std::vector<CameraState> out(static_cast<std::size_t>(t.num_frames));
  for (int f = 0; f < t.num_frames; ++f) {
    const double phi = deg2rad(sweep) * f / (t.num_frames - 1);
    CameraState& c = out[static_cast<std::size_t>(f)];
    c.center = {t.radius * std::sin(phi), t.height + t.height_amp * std::sin(2.0 * phi),
                t.radius * std::cos(phi)};
    c.yaw = wrap_angle(phi + kPi);  // facing the room center
    fill_orientation(t, phi, c);
  }
  return out;
}

std::vector<CameraState> lawnmower(const TrajectorySpec& t, const Eigen::Vector3d& room) {
  // Lanes plus their U-turns stay within 40% of the room half-extents.
  const double rz = 0.35 * room.z();
  const double r = t.passes == 1 ? 0.0 : rz / (t.passes - 1);
  const double rx = std::max(0.4 * room.x() - r, 0.1 * room.x());
  std::vector<Eigen::Vector2d> path;  // (x, z)
  const int samples = 200;
  for (int p = 0; p < t.passes; ++p) {
    const double z = t.passes == 1 ? 0.0 : -rz + 2.0 * rz * p / (t.passes - 1);
    const double dir = p % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < samples; ++i) {
      const double x = dir * (-rx + 2.0 * rx * i / (samples - 1));
      path.emplace_back(x, z);
    }
    if (p + 1 < t.passes) {
      for (int i = 1; i < samples; ++i) {
        const double a = kPi * i / samples;
        path.emplace_back(dir * (rx + r * std::sin(a)), z + r * (1.0 - std::cos(a)));
      }
    }
  }
  std::vector<double> arc(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) arc[i] = arc[i - 1] + (path[i] - path[i - 1]).norm();

  std::vector<CameraState> out(static_cast<std::size_t>(t.num_frames));
  for (int f = 0; f < t.num_frames; ++f) {
    const double s = arc.back() * f / (t.num_frames - 1);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(arc.begin(), arc.end(), s) - arc.begin());
    i = std::clamp<std::size_t>(i, 1, path.size() - 1);
    const double seg = arc[i] - arc[i - 1];
    const double u = seg > 0 ? (s - arc[i - 1]) / seg : 0.0;
    const Eigen::Vector2d p = path[i - 1] + u * (path[i] - path[i - 1]);
    const Eigen::Vector2d d = path[i] - path[i - 1];
    const double phase = 2.0 * kPi * s / arc.back();
    CameraState& c = out[static_cast<std::size_t>(f)];
    c.center = {p.x(), t.height + t.height_amp * std::sin(2.0 * phase), p.y()};
    c.yaw = std::atan2(d.x(), d.y());
    fill_orientation(t, phase, c);
  }
  return out;
}

struct Surface {
  Point3 origin, u, v;  // points origin + a u + b v, a, b in [0, 1]
  double area() const { return u.cross(v).norm(); }
};

std::vector<Point3> sample_scene(const SceneSpec& spec, std::mt19937_64& rng) {
  const double X = spec.room.x(), Y = spec.room.y(), Z = spec.room.z();
  std::vector<Surface> surfaces = {
      {{-X / 2, 0, -Z / 2}, {X, 0, 0}, {0, 0, Z}},   // floor
      {{-X / 2, 0, -Z / 2}, {X, 0, 0}, {0, Y, 0}},   // z = -Z/2
      {{-X / 2, 0, Z / 2}, {X, 0, 0}, {0, Y, 0}},    // z = +Z/2
      {{-X / 2, 0, -Z / 2}, {0, 0, Z}, {0, Y, 0}},   // x = -X/2
      {{X / 2, 0, -Z / 2}, {0, 0, Z}, {0, Y, 0}},    // x = +X/2
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int b = 0; b < spec.num_boxes; ++b) {
    const double sx = 0.3 + 0.7 * unit(rng), sz = 0.3 + 0.7 * unit(rng);
    const double sy = 0.3 + 0.9 * unit(rng);
    const double cx = (unit(rng) - 0.5) * 0.8 * (X - sx);
    const double cz = (unit(rng) - 0.5) * 0.8 * (Z - sz);
    const Point3 lo{cx - sx / 2, 0, cz - sz / 2};
    surfaces.push_back({lo + Point3(0, sy, 0), {sx, 0, 0}, {0, 0, sz}});
    surfaces.push_back({lo, {sx, 0, 0}, {0, sy, 0}});
    surfaces.push_back({lo + Point3(0, 0, sz), {sx, 0, 0}, {0, sy, 0}});
    surfaces.push_back({lo, {0, 0, sz}, {0, sy, 0}});
    surfaces.push_back({lo + Point3(sx, 0, 0), {0, 0, sz}, {0, sy, 0}});
  }
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& s : surfaces) cumulative.push_back(total += s.area());

  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(spec.scene_points));
  for (int i = 0; i < spec.scene_points; ++i) {
    const double pick = unit(rng) * total;
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    k = std::min(k, surfaces.size() - 1);
    const Surface& s = surfaces[k];
    const double a = unit(rng), b = unit(rng);
    pts.push_back(s.origin + a * s.u + b * s.v);
  }
  return pts;
}

Pointmap render_frame(const SceneSpec& spec, const std::vector<Point3>& scene, const Sim3Pose& cam,
                      std::uint64_t seed) {
  const double tan_h = std::tan(deg2rad(spec.fov_deg) / 2.0);
  const double tan_v = tan_h * spec.height / spec.width;
  const Rotation3 rt = cam.R.transpose();
  std::vector<std::pair<double, std::size_t>> visible;  // (raster key, index)
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Point3 pc = rt * (scene[i] - cam.t);
    const double z = pc.z();
    if (z <= kNear || z >= spec.max_depth) continue;
    const double u = pc.x() / (z * tan_h), v = pc.y() / (z * tan_v);
    if (std::abs(u) >= 1.0 || std::abs(v) >= 1.0) continue;
    const double row = std::floor((1.0 - v) / 2.0 * spec.height);
    const double col = (u + 1.0) / 2.0 * spec.width;
    visible.emplace_back(row * spec.width + col, i);
  }
  const std::size_t n = static_cast<std::size_t>(spec.points_per_frame());
  if (visible.size() > n) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, visible.size() - 1);
      std::swap(visible[i], visible[pick(rng)]);
    }
    visible.resize(n);
  }
  std::sort(visible.begin(), visible.end());

  Pointmap pm;
  pm.height = spec.height;
  pm.width = spec.width;
  pm.tag = FrameTag::World;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  pm.points.assign(n, Point3::Constant(nan));
  pm.confidence.assign(n, 1.0);
  for (std::size_t i = 0; i < visible.size(); ++i) pm.points[i] = scene[visible[i].second];
  return pm;
}

std::vector<LoopPair> find_loops(const SceneSpec& spec, const GroundTruth& gt) {
  std::vector<LoopPair> candidates;
  const int n = static_cast<int>(gt.camera_to_world.size());
  for (int b = 0; b < n; ++b) {
    LoopPair best{-1, b, std::numeric_limits<double>::infinity(), 0.0};
    for (int a = 0; a + spec.loop_min_gap < b; ++a) {
      const double d = (gt.camera_to_world[a].t - gt.camera_to_world[b].t).norm();
      const double dyaw =
          std::abs(rad2deg(wrap_angle(gt.gravity_to_world[a].yaw - gt.gravity_to_world[b].yaw)));
      if (d < best.distance && dyaw <= spec.loop_max_yaw_deg) best = {a, b, d, dyaw};
    }
    if (best.frame_a >= 0 && best.distance <= spec.loop_max_distance) candidates.push_back(best);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const LoopPair& x, const LoopPair& y) { return x.distance < y.distance; });
  std::vector<LoopPair> out;
  for (const auto& c : candidates) {
    if (static_cast<int>(out.size()) >= spec.max_loops) break;
    const bool spread = std::all_of(out.begin(), out.end(), [&](const LoopPair& o) {
      return std::abs(o.frame_b - c.frame_b) >= spec.loop_min_gap;
    });
    if (spread) out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const LoopPair& x, const LoopPair& y) { return x.frame_b < y.frame_b; });
  return out;
}

}  // namespace

std::vector<LoopDetection> SyntheticSequence::loop_detections() const {
  std::vector<LoopDetection> out;
  for (const auto& l : gt.loops) out.push_back({l.frame_a, l.frame_b});
  return out;
}

SyntheticSequence generate(const SceneSpec& spec) {
  spec.validate();
  SyntheticSequence seq;
  seq.spec = spec;
  std::mt19937_64 rng(derive_seed(spec.seed, 0));
  seq.gt.scene = sample_scene(spec, rng);

  const TrajectorySpec& t = spec.trajectory;
  std::vector<CameraState> states;
  switch (t.kind) {
    case TrajectoryKind::Orbit: states = orbit(t, t.sweep_deg); break;
    case TrajectoryKind::LoopClosure: states = orbit(t, 360.0 + t.loop_extra_deg); break;
    case TrajectoryKind::Lawnmower: states = lawnmower(t, spec.room); break;
  }

  const std::size_t n = states.size();
  for (const auto& c : states) {
    const FrameRotation fr{c.roll, c.pitch};
    const SimY3Pose g{1.0, c.yaw, c.center};
    seq.gt.camera_to_gravity.push_back(fr);
    seq.gt.gravity_to_world.push_back(g);
    seq.gt.camera_to_world.push_back({1.0, g.rotation() * fr.matrix(), c.center});
  }
  seq.frames.resize(n);
  parallel_for(n, [&](std::size_t f) {
    seq.frames[f] = render_frame(spec, seq.gt.scene, seq.gt.camera_to_world[f],
                                 derive_seed(spec.seed, 1000 + f));
  });
  seq.gt.loops = find_loops(spec, seq.gt);
  return seq;
}

bool NoiseSpec::is_zero() const {
  return point_sigma == 0 && outlier_fraction == 0 && drift_rotation == 0 &&
         drift_translation == 0 && drift_scale == 0;
}

void NoiseSpec::validate() const {
  if (!(point_sigma >= 0 && drift_rotation >= 0 && drift_translation >= 0 && drift_scale >= 0)) {
    throw Error(ErrorKind::InvalidSpec, "noise parameters must be non-negative");
  }
  if (!(outlier_fraction >= 0 && outlier_fraction <= 1)) {
    throw Error(ErrorKind::InvalidSpec, "outlier_fraction must lie in [0, 1]");
  }
  if (!(confidence_floor > 0 && confidence_floor <= 1)) {
    throw Error(ErrorKind::InvalidSpec, "confidence_floor must lie in (0, 1]");
  }
}

namespace {

struct Box {
  Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 hi = Point3::Constant(-std::numeric_limits<double>::infinity());
};

Sim3Pose draw_drift(const NoiseSpec& noise, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  TangentSim3 xi;
  for (int a = 0; a < 3; ++a) xi.nu[a] = noise.drift_translation * g(rng);
  if (noise.drift_group == Group::Sim3) {
    for (int a = 0; a < 3; ++a) xi.omega[a] = noise.drift_rotation * g(rng);
  } else {
    xi.omega.y() = noise.drift_rotation * g(rng);
  }
  xi.sigma = noise.drift_scale * g(rng);
  return exp_sim3(xi);
}

}  // namespace

std::vector<Pointmap> corrupt(std::span<const Pointmap> pointmaps, const NoiseSpec& noise,
                              std::uint64_t seed) {
  noise.validate();
  std::vector<Pointmap> out(pointmaps.begin(), pointmaps.end());
  if (noise.is_zero()) return out;

  Box box;
  for (const auto& pm : pointmaps) {
    for (std::size_t i = 0; i < pm.size(); ++i) {
      if (!pm.valid(i)) continue;
      box.lo = box.lo.cwiseMin(pm.points[i]);
      box.hi = box.hi.cwiseMax(pm.points[i]);
    }
  }

  parallel_for(out.size(), [&](std::size_t f) {
    std::mt19937_64 rng(derive_seed(seed, f));
    Pointmap& pm = out[f];
    const Sim3Pose drift = f == 0 ? Sim3Pose::identity() : draw_drift(noise, rng);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    pm.confidence.assign(pm.size(), 1.0);
    for (std::size_t i = 0; i < pm.size(); ++i) {
      // Draw every variate even for invalid pixels so streams do not shift.
      const Point3 n(g(rng), g(rng), g(rng));
      const bool outlier = unit(rng) < noise.outlier_fraction;
      const Point3 r(unit(rng), unit(rng), unit(rng));
      if (!pm.valid(i)) continue;
      if (outlier) {
        pm.points[i] = box.lo + (box.hi - box.lo).cwiseProduct(r);
        pm.confidence[i] = noise.confidence_floor;
        continue;
      }
      const Point3 e = noise.point_sigma * n;
      pm.points[i] = drift(pm.points[i]) + e;
      pm.confidence[i] = 1.0 / (1.0 + e.norm());
    }
  });
  return out;
}

SyntheticProvider::SyntheticProvider(SyntheticSequence seq, ProviderOptions opt)
    : seq_(std::move(seq)), opt_(opt) {
  if (opt_.frame == FrameTag::World) {
    throw Error(ErrorKind::InvalidArgument, "chunk predictions use camera or gravity frames");
  }
  if (!(opt_.scale_sigma >= 0)) throw Error(ErrorKind::InvalidSpec, "scale_sigma must be >= 0");
  opt_.noise.validate();
}

std::uint64_t SyntheticProvider::chunk_seed(std::span<const int> frames) const {
  std::uint64_t h = splitmix64(frames.size());
  for (int f : frames) h = splitmix64(h ^ static_cast<std::uint64_t>(f));
  return derive_seed(opt_.seed, h);
}

double SyntheticProvider::chunk_scale(std::span<const int> frames) const {
  if (opt_.scale_sigma == 0) return 1.0;
  std::mt19937_64 rng(derive_seed(chunk_seed(frames), 0xC0FFEE));
  std::normal_distribution<double> g(0.0, opt_.scale_sigma);
  return std::exp(g(rng));
}

Sim3Pose SyntheticProvider::chunk_to_world(std::span<const int> frames) const {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "empty chunk");
  const int f0 = frames.front();
  if (f0 < 0 || f0 >= num_frames()) throw Error(ErrorKind::InvalidArgument, "frame out of range");
  const Sim3Pose ref = opt_.frame == FrameTag::Camera ? seq_.gt.camera_to_world[f0]
                                                      : seq_.gt.gravity_to_world[f0].to_sim3();
  return compose(ref, Sim3Pose{1.0 / chunk_scale(frames), Rotation3::Identity(), Point3::Zero()});
}

Chunk SyntheticProvider::predict(std::span<const int> frames) const {
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k] < 0 || frames[k] >= num_frames()) {
      throw Error(ErrorKind::InvalidArgument, "frame out of range");
    }
    if (k > 0 && frames[k] <= frames[k - 1]) {
      throw Error(ErrorKind::InvalidArgument, "frames must be strictly increasing");
    }
  }
  const Sim3Pose world_to_chunk = inverse(chunk_to_world(frames));
  std::vector<Pointmap> clean;
  clean.reserve(frames.size());
  for (int f : frames) clean.push_back(transform_pointmap(seq_.frames[f], world_to_chunk, opt_.frame));
  Chunk c;
  c.frames.assign(frames.begin(), frames.end());
  c.pointmaps = corrupt(clean, opt_.noise, chunk_seed(frames));
  return c;
}

std::vector<Point3> ground_truth_cloud(const SyntheticSequence& seq,
                                       std::span<const FrameRange> chunks) {
  std::vector<Point3> out;
  for (const auto& r : chunks) {
    for (int f = r.first; f <= r.last; ++f) {
      const Pointmap& pm = seq.frames.at(static_cast<std::size_t>(f));
      for (std::size_t i = 0; i < pm.size(); ++i) {
        if (pm.valid(i)) out.push_back(pm.points[i]);
      }
    }
  }
  return out;
}

GravityPair gravity_pair(const SyntheticSequence& seq, int frame, const NoiseSpec& noise,
                         std::uint64_t seed) {
  noise.validate();
  if (frame < 0 || frame >= static_cast<int>(seq.frames.size())) {
    throw Error(ErrorKind::InvalidArgument, "frame out of range");
  }
  const Sim3Pose& cam = seq.gt.camera_to_world[frame];
  const Rotation3 r_cg = seq.gt.camera_to_gravity[frame].matrix();
  GravityPair out;
  out.camera_to_gravity = r_cg;
  out.camera = transform_pointmap(seq.frames[frame], inverse(cam), FrameTag::Camera);
  out.gravity = transform_pointmap(out.camera, {1.0, r_cg, Point3::Zero()}, FrameTag::Gravity);

  Box box;
  for (std::size_t i = 0; i < out.camera.size(); ++i) {
    if (!out.camera.valid(i)) continue;
    box.lo = box.lo.cwiseMin(out.camera.points[i]);
    box.hi = box.hi.cwiseMax(out.camera.points[i]);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = out.camera.size();
  out.camera.confidence.assign(n, std::exp(1.0));
  out.gravity.confidence.assign(n, std::exp(1.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 ng(g(rng), g(rng), g(rng)), nc(g(rng), g(rng), g(rng));
    const bool outlier = unit(rng) < noise.outlier_fraction;
    const Point3 r(unit(rng), unit(rng), unit(rng));
    if (!out.camera.valid(i)) continue;
    if (outlier) {
      out.camera.points[i] = box.lo + (box.hi - box.lo).cwiseProduct(r);
      out.camera.confidence[i] = std::exp(noise.confidence_floor);
      out.gravity.confidence[i] = std::exp(noise.confidence_floor);
      continue;
    }
    const Point3 eg = noise.point_sigma * ng, ec = noise.point_sigma * nc;
    out.gravity.points[i] += eg;
    out.camera.points[i] += ec;
    out.gravity.confidence[i] = std::exp(1.0 / (1.0 + eg.norm()));
    out.camera.confidence[i] = std::exp(1.0 / (1.0 + ec.norm()));
  }
  return out;
}

}  // namespace gravalign
