#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "gravalign/geom.hpp"

namespace gravalign {

enum class EdgeKind { Adjacency, Loop };

/// Relative measurement: `measurement` maps chunk j's frame into chunk i's.
struct GraphEdge {
  EdgeKind kind = EdgeKind::Adjacency;
  int i = 0;
  int j = 1;
  Sim3Pose measurement;
  double weight = 1.0;
};

struct ChunkGraph {
  int num_chunks = 0;
  Group mode = Group::Sim3;
  std::vector<GraphEdge> edges;

  void add_adjacency(int k, const Sim3Pose& measurement, double weight = 1.0);
  void add_loop(int i, int j, const Sim3Pose& measurement, double weight = 1.0);

  /// Checks K >= 2, consecutive adjacency pairs, non-consecutive loops with
  /// i < j, positive weights and that measurements belong to `mode`'s group.
  void validate() const;
};

enum class JacobianMode { NumericCentral, Analytic };

struct LmConfig {
  int max_iters = 100;
  double initial_lambda = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double gradient_tol = 1e-10;
  double step_tol = 1e-10;
  JacobianMode jacobian = JacobianMode::NumericCentral;

  void validate() const;
};

enum class LmStop { GradientTolerance, StepTolerance, MaxIterations, DampingExhausted };

const char* to_string(LmStop s);

struct PoseGraphResult {
  std::vector<Sim3Pose> poses;
  std::vector<double> cost_trace;  // initial cost, then one entry per accepted step
  int iterations = 0;
  LmStop stop = LmStop::MaxIterations;
};

/// log(meas^-1 pi^-1 pj): 7-vector in Sim3 mode, 5-vector (nu, theta, sigma)
/// in SimY3 mode.
Eigen::VectorXd edge_residual(Group mode, const Sim3Pose& measurement, const Sim3Pose& pi,
                              const Sim3Pose& pj);

struct EdgeJacobians {
  Eigen::MatrixXd wrt_i;
  Eigen::MatrixXd wrt_j;
};

/// Residual derivatives under right perturbations pi <- pi exp(d).
EdgeJacobians edge_jacobians(Group mode, const Sim3Pose& measurement, const Sim3Pose& pi,
                             const Sim3Pose& pj, JacobianMode kind, double h = 1e-6);

/// sum_e w_e |r_e|^2
double graph_cost(const ChunkGraph& graph, std::span<const Sim3Pose> poses);

/// pi_1 = identity, pi_{k+1} = pi_k * meas_{k,k+1}.
std::vector<Sim3Pose> chain_initialize(const ChunkGraph& graph);

/// Levenberg-Marquardt over the tangent space of graph.mode's group with the
/// first pose held fixed.
PoseGraphResult optimize(const ChunkGraph& graph, std::span<const Sim3Pose> initial,
                         const LmConfig& cfg = {});

}  // namespace gravalign
