#include "gravalign/chunk_align.hpp"

#include <algorithm>
#include <cmath>

#include "gravalign/errors.hpp"
#include "gravalign/lie.hpp"

namespace gravalign {

FrameTag Chunk::tag() const {
  if (pointmaps.empty()) throw Error(ErrorKind::InvalidArgument, "chunk has no pointmaps");
  return pointmaps.front().tag;
}

void Chunk::validate() const {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "chunk has no frames");
  if (frames.size() != pointmaps.size()) {
    throw Error(ErrorKind::LengthMismatch, "chunk frames and pointmaps differ in length");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] <= frames[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "chunk frame ids must be strictly increasing");
    }
  }
  const FrameTag t = pointmaps.front().tag;
  for (const auto& pm : pointmaps) {
    pm.validate();
    if (pm.tag != t) throw Error(ErrorKind::FrameTagMismatch, "chunk mixes frame tags");
  }
}

OverlapSet overlap_by_frame_id(const Chunk& a, const Chunk& b) {
  OverlapSet m;
  std::size_t i = 0, j = 0;
  while (i < a.frames.size() && j < b.frames.size()) {
    if (a.frames[i] == b.frames[j]) {
      m.pairs.emplace_back(i++, j++);
    } else if (a.frames[i] < b.frames[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

void IrlsConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorKind::InvalidConfig, "max_iters must be >= 1");
  if (!(loss_scale > 0.0) || !(convergence_tol > 0.0) || !(min_weight > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "IRLS tolerances must be positive");
  }
  if (stride < 1) throw Error(ErrorKind::InvalidConfig, "stride must be >= 1");
}

const char* to_string(IrlsStop s) {
  switch (s) {
    case IrlsStop::ExactFit: return "exact_fit";
    case IrlsStop::Converged: return "converged";
    case IrlsStop::MaxIterations: return "max_iterations";
    case IrlsStop::ObjectiveIncrease: return "objective_increase";
  }
  return "unknown";
}

Correspondences gather_correspondences(const Chunk& a, const Chunk& b, const OverlapSet& m,
                                       int stride,
                                       std::vector<std::pair<std::size_t, std::size_t>>* pixels) {
  if (m.pairs.empty()) throw Error(ErrorKind::EmptyOverlap, "overlap set is empty");
  Correspondences c;
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [ia, ib] = m.pairs[k];
    if (ia >= a.pointmaps.size() || ib >= b.pointmaps.size()) {
      throw Error(ErrorKind::InvalidArgument, "overlap pair index out of range");
    }
    const Pointmap& pa = a.pointmaps[ia];
    const Pointmap& pb = b.pointmaps[ib];
    if (pa.height != pb.height || pa.width != pb.width) {
      throw Error(ErrorKind::DimensionMismatch, "overlapping pointmaps differ in size");
    }
    for (std::size_t p = 0; p < pa.size(); p += static_cast<std::size_t>(stride)) {
      if (!pa.valid(p) || !pb.valid(p)) continue;
      c.source.push_back(pb.points[p]);
      c.target.push_back(pa.points[p]);
      const double wa = pa.has_confidence() ? pa.confidence[p] : 1.0;
      const double wb = pb.has_confidence() ? pb.confidence[p] : 1.0;
      c.weights.push_back(wa * wb);
      if (pixels != nullptr) pixels->emplace_back(k, p);
    }
  }
  if (c.weights.empty()) throw Error(ErrorKind::EmptyOverlap, "no valid overlapping pixels");
  double mean = 0.0;
  for (double w : c.weights) mean += w;
  mean /= static_cast<double>(c.weights.size());
  for (double& w : c.weights) w /= mean;
  return c;
}

namespace {

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double mad(const std::vector<double>& r) {
  const double med = median(r);
  std::vector<double> dev(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) dev[i] = std::abs(r[i] - med);
  return median(std::move(dev));
}

std::vector<double> residual_norms(const Correspondences& c, const Sim3Pose& pose) {
  std::vector<double> r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r[i] = (c.target[i] - pose(c.source[i])).norm();
  return r;
}

double rho(RobustLoss loss, double r, double k) {
  if (loss == RobustLoss::Huber) return r <= k ? 0.5 * r * r : k * (r - 0.5 * k);
  return 0.5 * k * k * std::log1p((r / k) * (r / k));
}

double robust_weight(RobustLoss loss, double r, double k) {
  if (loss == RobustLoss::Huber) return r <= k ? 1.0 : k / r;
  return 1.0 / (1.0 + (r / k) * (r / k));
}

double robust_cost(const std::vector<double>& w0, const std::vector<double>& r, RobustLoss loss,
                   double k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += w0[i] * rho(loss, r[i], k);
  return sum;
}

double tangent_distance(const Sim3Pose& a, const Sim3Pose& b) {
  return log_sim3(compose(inverse(a), b)).vector().norm();
}

}  // namespace

ChunkAlignment align_chunks(const Chunk& a, const Chunk& b, const OverlapSet& m, Group mode,
                            const IrlsConfig& cfg) {
  cfg.validate();
  a.validate();
  b.validate();
  if (mode == Group::SimY3 && (a.tag() == FrameTag::Camera || b.tag() == FrameTag::Camera)) {
    throw Error(ErrorKind::FrameTagMismatch, "yaw-only alignment needs gravity-aligned chunks");
  }

  ChunkAlignment out;
  Correspondences c = gather_correspondences(a, b, m, cfg.stride, &out.pixels);
  const std::vector<double> w0 = c.weights;

  Sim3Pose pose = fit_similarity(c, mode);
  std::vector<double> r = residual_norms(c, pose);
  out.iterations = 1;

  // The robust threshold is frozen after the first solve so that every
  // reweighted step decreases one fixed objective.
  double spread = 0.0;
  for (const auto& q : c.target) spread = std::max(spread, q.norm());
  const double k = cfg.loss_scale * mad(r);
  const bool exact = !(k > 1e-14 * std::max(1.0, spread));

  auto reweight = [&](const std::vector<double>& res) {
    std::vector<double> w(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
      const double f = exact ? 1.0 : robust_weight(cfg.loss, res[i], k);
      w[i] = std::max(w0[i] * f, cfg.min_weight);
    }
    return w;
  };

  if (exact) {
    out.stop = IrlsStop::ExactFit;
    out.objective_trace.push_back(weighted_residual(c, pose));
  } else {
    double cost = robust_cost(w0, r, cfg.loss, k);
    out.objective_trace.push_back(cost);
    out.stop = IrlsStop::MaxIterations;
    while (out.iterations < cfg.max_iters) {
      c.weights = reweight(r);
      const Sim3Pose next = fit_similarity(c, mode);
      std::vector<double> next_r = residual_norms(c, next);
      const double next_cost = robust_cost(w0, next_r, cfg.loss, k);
      ++out.iterations;
      if (next_cost > cost + 1e-12 * std::max(1.0, cost)) {
        out.stop = IrlsStop::ObjectiveIncrease;
        break;
      }
      const double step = tangent_distance(pose, next);
      pose = next;
      r = std::move(next_r);
      cost = next_cost;
      out.objective_trace.push_back(cost);
      if (step < cfg.convergence_tol) {
        out.stop = IrlsStop::Converged;
        break;
      }
    }
  }

  for (std::size_t i = 1; i < out.objective_trace.size(); ++i) {
    if (out.objective_trace[i] > out.objective_trace[i - 1] * (1.0 + 1e-12) + 1e-300) {
      throw Error(ErrorKind::InvalidArgument, "IRLS objective increased");
    }
  }

  out.pose = pose;
  out.weights = reweight(r);
  c.weights = out.weights;
  out.residual = weighted_residual(c, pose);
  return out;
}

}  // namespace gravalign
