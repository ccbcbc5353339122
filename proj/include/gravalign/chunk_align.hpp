#pragma once

#include <utility>
#include <vector>

#include "gravalign/geom.hpp"
#include "gravalign/procrustes.hpp"

namespace gravalign {

/// Window of frames whose pointmaps share one reference frame.
struct Chunk {
  int id = 0;
  std::vector<int> frames;           // strictly increasing frame ids
  std::vector<Pointmap> pointmaps;   // one per frame, confidence inside

  FrameTag tag() const;
  void validate() const;
};

/// Pairs (index into a.frames, index into b.frames) showing the same image.
struct OverlapSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// All frames present in both chunks, matched by frame id.
OverlapSet overlap_by_frame_id(const Chunk& a, const Chunk& b);

enum class RobustLoss { Huber, Cauchy };

struct IrlsConfig {
  int max_iters = 10;
  RobustLoss loss = RobustLoss::Huber;
  double loss_scale = 1.345;  // robust threshold = loss_scale * MAD(residual norms)
  double convergence_tol = 1e-8;
  double min_weight = 1e-6;
  int stride = 1;  // pixel subsampling, deterministic

  void validate() const;
};

enum class IrlsStop {
  ExactFit,         // residual spread vanished after the first solve
  Converged,        // pose update below convergence_tol
  MaxIterations,
  ObjectiveIncrease // a reweighted solve did not lower the robust cost; kept the previous pose
};

const char* to_string(IrlsStop s);

struct ChunkAlignment {
  Sim3Pose pose;                       // maps b's frame into a's frame
  std::vector<double> weights;         // final per-correspondence weights
  std::vector<std::pair<std::size_t, std::size_t>> pixels;  // (overlap pair, pixel) per weight
  double residual = 0.0;               // sum w |X_a - pose X_b|^2 with final weights
  std::vector<double> objective_trace; // robust cost after each accepted solve
  int iterations = 0;
  IrlsStop stop = IrlsStop::MaxIterations;
};

/// Gathers strided pixel correspondences (source = b, target = a) over the
/// overlap, skipping pixels invalid in either pointmap. Weights are the
/// product of both confidences normalized to mean 1.
Correspondences gather_correspondences(const Chunk& a, const Chunk& b, const OverlapSet& m,
                                       int stride,
                                       std::vector<std::pair<std::size_t, std::size_t>>* pixels = nullptr);

/// Confidence-initialized IRLS alignment of chunk b onto chunk a over the
/// pixels of shared images, with a closed-form weighted Procrustes (Sim3) or
/// GA-Procrustes (SimY3) solve at every step.
ChunkAlignment align_chunks(const Chunk& a, const Chunk& b, const OverlapSet& m, Group mode,
                            const IrlsConfig& cfg = {});

}  // namespace gravalign
