#include "gravalign/posegraph.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <queue>

#include "gravalign/errors.hpp"
#include "gravalign/lie.hpp"

namespace gravalign {

void ChunkGraph::add_adjacency(int k, const Sim3Pose& measurement, double weight) {
  edges.push_back({EdgeKind::Adjacency, k, k + 1, measurement, weight});
}

void ChunkGraph::add_loop(int i, int j, const Sim3Pose& measurement, double weight) {
  edges.push_back({EdgeKind::Loop, i, j, measurement, weight});
}

void ChunkGraph::validate() const {
  if (num_chunks < 2) throw Error(ErrorKind::InvalidArgument, "graph needs at least 2 chunks");
  for (const auto& e : edges) {
    if (e.i < 0 || e.j >= num_chunks || e.i >= e.j) {
      throw Error(ErrorKind::InvalidArgument, "edge indices out of range or not ordered");
    }
    if (e.kind == EdgeKind::Adjacency && e.j != e.i + 1) {
      throw Error(ErrorKind::InvalidArgument, "adjacency edge joins non-consecutive chunks");
    }
    if (e.kind == EdgeKind::Loop && e.j == e.i + 1) {
      throw Error(ErrorKind::InvalidArgument, "loop edge joins consecutive chunks");
    }
    if (!(std::isfinite(e.weight) && e.weight > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "edge weights must be positive");
    }
    if (!(e.measurement.s > 0.0) || !is_rotation(e.measurement.R, 1e-6)) {
      throw Error(ErrorKind::InvalidArgument, "edge measurement is not a similarity");
    }
    if (mode == Group::SimY3 && !is_yaw_only(e.measurement.R)) {
      throw Error(ErrorKind::InvalidArgument, "edge measurement is not in Sim_y(3)");
    }
  }
}

void LmConfig::validate() const {
  if (max_iters < 1 || !(initial_lambda > 0.0) || !(lambda_up > 1.0) || !(lambda_down > 0.0) ||
      !(lambda_down < 1.0) || !(gradient_tol > 0.0) || !(step_tol > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "invalid Levenberg-Marquardt configuration");
  }
}

const char* to_string(LmStop s) {
  switch (s) {
    case LmStop::GradientTolerance: return "gradient_tolerance";
    case LmStop::StepTolerance: return "step_tolerance";
    case LmStop::MaxIterations: return "max_iterations";
    case LmStop::DampingExhausted: return "damping_exhausted";
  }
  return "unknown";
}

namespace {

struct Sim3Group {
  using Pose = Sim3Pose;
  static constexpr int kDim = 7;
  static Pose from(const Sim3Pose& p) { return p; }
  static Sim3Pose to(const Pose& p) { return p; }
  static Eigen::VectorXd log(const Pose& p) { return log_sim3(p).vector(); }
  static Pose exp(const Eigen::VectorXd& v) { return exp_sim3(TangentSim3::from_vector(v)); }
};

struct SimY3Group {
  using Pose = SimY3Pose;
  static constexpr int kDim = 5;
  static Pose from(const Sim3Pose& p) { return to_simy3(p, 1e-9); }
  static Sim3Pose to(const Pose& p) { return p.to_sim3(); }
  static Eigen::VectorXd log(const Pose& p) { return log_simy3(p).vector(); }
  static Pose exp(const Eigen::VectorXd& v) { return exp_simy3(TangentSimY3::from_vector(v)); }
};

template <class G>
Eigen::VectorXd residual(const typename G::Pose& meas, const typename G::Pose& pi,
                         const typename G::Pose& pj) {
  return G::log(compose(inverse(meas), compose(inverse(pi), pj)));
}

// Rows/cols of the 7-dim algebra spanned by sim_y(3): nu, omega_y, sigma.
constexpr int kYawSubspace[5] = {0, 1, 2, 4, 6};

template <class G>
EdgeJacobians jacobians(const typename G::Pose& meas, const typename G::Pose& pi,
                        const typename G::Pose& pj, JacobianMode kind, double h) {
  constexpr int d = G::kDim;
  EdgeJacobians J{Eigen::MatrixXd(d, d), Eigen::MatrixXd(d, d)};
  if (kind == JacobianMode::NumericCentral) {
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
      step(k) = h;
      const auto plus = G::exp(step), minus = G::exp(-step);
      J.wrt_i.col(k) = (residual<G>(meas, compose(pi, plus), pj) -
                        residual<G>(meas, compose(pi, minus), pj)) / (2.0 * h);
      J.wrt_j.col(k) = (residual<G>(meas, pi, compose(pj, plus)) -
                        residual<G>(meas, pi, compose(pj, minus))) / (2.0 * h);
    }
    return J;
  }
  const Sim3Pose x = G::to(compose(inverse(pi), pj));
  const Sim3Pose e = compose(inverse(G::to(meas)), x);
  const TangentSim3 r = log_sim3(e);
  const Matrix7d jr_inv = right_jacobian_inverse(r);
  const Matrix7d dj = jr_inv;
  const Matrix7d di = -jr_inv * adjoint(inverse(x));
  if constexpr (d == 7) {
    J.wrt_i = di;
    J.wrt_j = dj;
  } else {
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        J.wrt_i(a, b) = di(kYawSubspace[a], kYawSubspace[b]);
        J.wrt_j(a, b) = dj(kYawSubspace[a], kYawSubspace[b]);
      }
    }
  }
  return J;
}

template <class G>
double cost_of(const ChunkGraph& graph, const std::vector<typename G::Pose>& poses) {
  double c = 0.0;
  for (const auto& e : graph.edges) {
    c += e.weight * residual<G>(G::from(e.measurement), poses[e.i], poses[e.j]).squaredNorm();
  }
  return c;
}

void require_connected(const ChunkGraph& graph) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(graph.num_chunks));
  for (const auto& e : graph.edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) {
      throw Error(ErrorKind::SingularNormalEquations,
                  "chunk " + std::to_string(k) + " is not connected to the anchor");
    }
  }
}

template <class G>
PoseGraphResult run_lm(const ChunkGraph& graph, std::span<const Sim3Pose> initial,
                       const LmConfig& cfg) {
  constexpr int d = G::kDim;
  const int k_chunks = graph.num_chunks;
  std::vector<typename G::Pose> poses;
  poses.reserve(initial.size());
  for (const auto& p : initial) poses.push_back(G::from(p));
  std::vector<typename G::Pose> meas;
  for (const auto& e : graph.edges) meas.push_back(G::from(e.measurement));

  const Eigen::Index n = static_cast<Eigen::Index>(k_chunks - 1) * d;
  const Eigen::Index m = static_cast<Eigen::Index>(graph.edges.size()) * d;

  PoseGraphResult out;
  double lambda = cfg.initial_lambda;
  double cost = cost_of<G>(graph, poses);
  out.cost_trace.push_back(cost);
  out.stop = LmStop::MaxIterations;

  while (out.iterations < cfg.max_iters) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd res(m);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
      const auto& e = graph.edges[k];
      const double sw = std::sqrt(e.weight);
      const auto row = static_cast<Eigen::Index>(k) * d;
      res.segment(row, d) = sw * residual<G>(meas[k], poses[e.i], poses[e.j]);
      const EdgeJacobians J = jacobians<G>(meas[k], poses[e.i], poses[e.j], cfg.jacobian, 1e-6);
      if (e.i > 0) jac.block(row, static_cast<Eigen::Index>(e.i - 1) * d, d, d) = sw * J.wrt_i;
      if (e.j > 0) jac.block(row, static_cast<Eigen::Index>(e.j - 1) * d, d, d) = sw * J.wrt_j;
    }
    const Eigen::MatrixXd hess = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * res;
    if (grad.cwiseAbs().maxCoeff() < cfg.gradient_tol) {
      out.stop = LmStop::GradientTolerance;
      break;
    }

    bool accepted = false;
    bool done = false;
    while (!accepted && out.iterations < cfg.max_iters) {
      ++out.iterations;
      Eigen::MatrixXd damped = hess;
      damped.diagonal().array() += lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(damped);
      if (llt.info() != Eigen::Success) {
        lambda *= cfg.lambda_up;
        continue;
      }
      const Eigen::VectorXd delta = -llt.solve(grad);
      if (delta.norm() < cfg.step_tol) {
        out.stop = LmStop::StepTolerance;
        done = true;
        break;
      }
      std::vector<typename G::Pose> trial = poses;
      for (int c = 1; c < k_chunks; ++c) {
        trial[c] = compose(poses[c], G::exp(delta.segment(static_cast<Eigen::Index>(c - 1) * d, d)));
      }
      const double trial_cost = cost_of<G>(graph, trial);
      if (trial_cost < cost) {
        poses = std::move(trial);
        cost = trial_cost;
        out.cost_trace.push_back(cost);
        lambda = std::max(lambda * cfg.lambda_down, 1e-15);
        accepted = true;
      } else {
        lambda *= cfg.lambda_up;
        if (lambda > 1e16) {
          out.stop = LmStop::DampingExhausted;
          done = true;
          break;
        }
      }
    }
    if (done) break;
  }

  out.poses.reserve(poses.size());
  for (const auto& p : poses) out.poses.push_back(G::to(p));
  return out;
}

}  // namespace

Eigen::VectorXd edge_residual(Group mode, const Sim3Pose& measurement, const Sim3Pose& pi,
                              const Sim3Pose& pj) {
  if (mode == Group::Sim3) return residual<Sim3Group>(measurement, pi, pj);
  return residual<SimY3Group>(SimY3Group::from(measurement), SimY3Group::from(pi),
                              SimY3Group::from(pj));
}

EdgeJacobians edge_jacobians(Group mode, const Sim3Pose& measurement, const Sim3Pose& pi,
                             const Sim3Pose& pj, JacobianMode kind, double h) {
  if (mode == Group::Sim3) return jacobians<Sim3Group>(measurement, pi, pj, kind, h);
  return jacobians<SimY3Group>(SimY3Group::from(measurement), SimY3Group::from(pi),
                               SimY3Group::from(pj), kind, h);
}

double graph_cost(const ChunkGraph& graph, std::span<const Sim3Pose> poses) {
  double c = 0.0;
  for (const auto& e : graph.edges) {
    c += e.weight * edge_residual(graph.mode, e.measurement, poses[e.i], poses[e.j]).squaredNorm();
  }
  return c;
}

std::vector<Sim3Pose> chain_initialize(const ChunkGraph& graph) {
  graph.validate();
  std::vector<const GraphEdge*> step(static_cast<std::size_t>(graph.num_chunks - 1), nullptr);
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::Adjacency && step[e.i] == nullptr) step[e.i] = &e;
  }
  std::vector<Sim3Pose> poses{Sim3Pose::identity()};
  for (int k = 0; k + 1 < graph.num_chunks; ++k) {
    if (step[k] == nullptr) {
      throw Error(ErrorKind::MissingAdjacency,
                  "no adjacency measurement between chunks " + std::to_string(k) + " and " +
                      std::to_string(k + 1));
    }
    Sim3Pose next = compose(poses.back(), step[k]->measurement);
    if (graph.mode == Group::SimY3) next = SimY3Group::from(next).to_sim3();
    poses.push_back(next);
  }
  return poses;
}

PoseGraphResult optimize(const ChunkGraph& graph, std::span<const Sim3Pose> initial,
                         const LmConfig& cfg) {
  graph.validate();
  cfg.validate();
  if (initial.size() != static_cast<std::size_t>(graph.num_chunks)) {
    throw Error(ErrorKind::LengthMismatch, "initial poses do not match the chunk count");
  }
  require_connected(graph);
  if (graph.mode == Group::Sim3) return run_lm<Sim3Group>(graph, initial, cfg);
  return run_lm<SimY3Group>(graph, initial, cfg);
}

}  // namespace gravalign
