#include "gravalign/pipeline.hpp"

#include <algorithm>

#include "gravalign/errors.hpp"
#include "gravalign/parallel.hpp"

namespace gravalign {

std::vector<int> FrameRange::frames() const {
  std::vector<int> f;
  f.reserve(static_cast<std::size_t>(std::max(0, size())));
  for (int i = first; i <= last; ++i) f.push_back(i);
  return f;
}

void PipelineConfig::validate() const {
  if (chunk_size < 2) throw Error(ErrorKind::InvalidConfig, "chunk_size must be >= 2");
  if (overlap < 1 || overlap >= chunk_size) {
    throw Error(ErrorKind::InvalidConfig, "overlap must satisfy 1 <= overlap < chunk_size");
  }
  if (loop_chunk_size < 1) throw Error(ErrorKind::InvalidConfig, "loop_chunk_size must be >= 1");
  irls.validate();
  lm.validate();
}

std::vector<FrameRange> make_chunks(int num_frames, const PipelineConfig& cfg) {
  cfg.validate();
  if (num_frames < 1) throw Error(ErrorKind::InvalidConfig, "need at least one frame");
  const int step = cfg.chunk_size - cfg.overlap;
  std::vector<FrameRange> out;
  for (int start = 0;; start += step) {
    out.push_back({start, std::min(start + cfg.chunk_size, num_frames) - 1});
    if (out.back().last == num_frames - 1) break;
  }
  return out;
}

std::pair<FrameRange, FrameRange> make_loop_chunks(const LoopDetection& d, int num_frames,
                                                   const PipelineConfig& cfg) {
  cfg.validate();
  const int span = 2 * cfg.loop_chunk_size;
  if (num_frames < span) throw Error(ErrorKind::InvalidConfig, "sequence shorter than a loop chunk");
  auto around = [&](int f) {
    if (f < 0 || f >= num_frames) throw Error(ErrorKind::InvalidConfig, "loop frame out of range");
    int first = f - cfg.loop_chunk_size;
    first = std::clamp(first, 0, num_frames - span);
    return FrameRange{first, first + span - 1};
  };
  return {around(d.frame_a), around(d.frame_b)};
}

std::vector<int> loop_chunk_frames(const LoopDetection& d, int num_frames, const PipelineConfig& cfg) {
  const auto [ra, rb] = make_loop_chunks(d, num_frames, cfg);
  std::vector<int> frames = ra.frames();
  const auto fb = rb.frames();
  frames.insert(frames.end(), fb.begin(), fb.end());
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

FusedCloud fuse(std::span<const Chunk> chunks, std::span<const Sim3Pose> poses) {
  FusedCloud cloud;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const Chunk& c = chunks[k];
    for (std::size_t f = 0; f < c.pointmaps.size(); ++f) {
      const Pointmap& pm = c.pointmaps[f];
      for (std::size_t p = 0; p < pm.size(); ++p) {
        if (!pm.valid(p)) continue;
        cloud.points.push_back(poses[k](pm.points[p]));
        cloud.source_frame.push_back(c.frames[f]);
        cloud.source_chunk.push_back(static_cast<int>(k));
      }
    }
  }
  return cloud;
}

namespace {

int chunk_covering(const std::vector<FrameRange>& ranges, const FrameRange& r) {
  int best = -1, best_count = 0;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const int lo = std::max(ranges[k].first, r.first);
    const int hi = std::min(ranges[k].last, r.last);
    const int count = hi - lo + 1;
    if (count > best_count) {
      best_count = count;
      best = static_cast<int>(k);
    }
  }
  return best;
}

Chunk checked_prediction(const ChunkProvider& provider, const std::vector<int>& frames, int id,
                         Group mode) {
  Chunk c = provider.predict(frames);
  c.id = id;
  c.validate();
  if (c.frames != frames) {
    throw Error(ErrorKind::InvalidArgument, "provider returned a chunk for different frames");
  }
  if (mode == Group::SimY3 && c.tag() == FrameTag::Camera) {
    throw Error(ErrorKind::FrameTagMismatch,
                "yaw-only reconstruction needs gravity-aligned chunk predictions");
  }
  return c;
}

struct LoopJob {
  LoopDetection detection;
  int i = -1;
  int j = -1;
  Chunk loop_chunk;
};

}  // namespace

Reconstruction reconstruct(const ChunkProvider& provider, std::span<const LoopDetection> loops,
                           const PipelineConfig& cfg) {
  cfg.validate();
  const int n = provider.num_frames();
  Reconstruction out;
  out.mode = cfg.mode;
  out.chunks = make_chunks(n, cfg);
  const std::size_t k_chunks = out.chunks.size();

  std::vector<Chunk> chunks(k_chunks);
  parallel_for(k_chunks, [&](std::size_t k) {
    chunks[k] = checked_prediction(provider, out.chunks[k].frames(), static_cast<int>(k), cfg.mode);
  });

  if (k_chunks == 1) {
    out.poses = {Sim3Pose::identity()};
    out.cloud = fuse(chunks, out.poses);
    return out;
  }

  std::vector<LoopJob> jobs;
  for (const auto& d : loops) {
    if (std::abs(d.frame_a - d.frame_b) <= cfg.chunk_size) {
      throw Error(ErrorKind::InvalidConfig, "loop frames must be more than chunk_size apart");
    }
    auto [ra, rb] = make_loop_chunks(d, n, cfg);
    if (ra.first > rb.first) std::swap(ra, rb);
    LoopJob job{d, chunk_covering(out.chunks, ra), chunk_covering(out.chunks, rb), {}};
    if (job.i < 0 || job.j < 0) {
      throw Error(ErrorKind::InsufficientLoopOverlap, "loop chunk shares no frame with any chunk");
    }
    if (job.j - job.i <= 1) {
      out.skipped_loops.push_back(d);
      continue;
    }
    job.loop_chunk = checked_prediction(provider, loop_chunk_frames(d, n, cfg), -1, cfg.mode);
    jobs.push_back(std::move(job));
  }

  // Adjacent alignments first, then one pair of alignments per loop.
  const std::size_t num_adjacent = k_chunks - 1;
  std::vector<EdgeDiagnostics> diag(num_adjacent + jobs.size());
  parallel_for(diag.size(), [&](std::size_t e) {
    EdgeDiagnostics& d = diag[e];
    if (e < num_adjacent) {
      const Chunk& a = chunks[e];
      const Chunk& b = chunks[e + 1];
      const ChunkAlignment al = align_chunks(a, b, overlap_by_frame_id(a, b), cfg.mode, cfg.irls);
      d = {EdgeKind::Adjacency, static_cast<int>(e), static_cast<int>(e + 1), al.weights.size(),
           al.residual, al.iterations, al.stop, al.pose};
      return;
    }
    const LoopJob& job = jobs[e - num_adjacent];
    const Chunk& ci = chunks[job.i];
    const Chunk& cj = chunks[job.j];
    const OverlapSet mi = overlap_by_frame_id(ci, job.loop_chunk);
    const OverlapSet mj = overlap_by_frame_id(cj, job.loop_chunk);
    if (mi.pairs.empty() || mj.pairs.empty()) {
      throw Error(ErrorKind::InsufficientLoopOverlap, "loop chunk misses one side of the loop");
    }
    const ChunkAlignment ai = align_chunks(ci, job.loop_chunk, mi, cfg.mode, cfg.irls);
    const ChunkAlignment aj = align_chunks(cj, job.loop_chunk, mj, cfg.mode, cfg.irls);
    Sim3Pose meas = compose(ai.pose, inverse(aj.pose));
    if (cfg.mode == Group::SimY3) meas = project_to_simy3(meas).to_sim3();
    d = {EdgeKind::Loop, job.i, job.j, ai.weights.size() + aj.weights.size(),
         ai.residual + aj.residual, std::max(ai.iterations, aj.iterations),
         ai.stop == IrlsStop::ObjectiveIncrease ? ai.stop : aj.stop, meas};
  });
  out.edges = diag;

  ChunkGraph graph;
  graph.num_chunks = static_cast<int>(k_chunks);
  graph.mode = cfg.mode;
  for (const auto& d : diag) {
    if (d.kind == EdgeKind::Adjacency) graph.add_adjacency(d.i, d.measurement);
    else graph.add_loop(d.i, d.j, d.measurement);
  }
  const std::vector<Sim3Pose> init = chain_initialize(graph);
  const PoseGraphResult opt = optimize(graph, init, cfg.lm);
  out.poses = opt.poses;
  out.cost_trace = opt.cost_trace;
  out.lm_stop = opt.stop;
  out.cloud = fuse(chunks, out.poses);
  return out;
}

}  // namespace gravalign
