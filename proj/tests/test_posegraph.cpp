#include <functional>

#include "doctest.h"
#include "gravalign/errors.hpp"
#include "gravalign/posegraph.hpp"
#include "test_util.hpp"

using namespace gravalign;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

// Central differences of edge_residual under right perturbations, written
// out independently of the library's own numeric mode.
EdgeJacobians finite_difference(Group mode, const Sim3Pose& m, const Sim3Pose& pi, const Sim3Pose& pj,
                                double h) {
  const int d = mode == Group::Sim3 ? 7 : 5;
  auto bump = [&](const Sim3Pose& p, int k, double step) {
    if (mode == Group::Sim3) {
      Vector7d v = Vector7d::Zero();
      v[k] = step;
      return compose(p, exp_sim3(TangentSim3::from_vector(v)));
    }
    Vector5d v = Vector5d::Zero();
    v[k] = step;
    return compose(p, exp_simy3(TangentSimY3::from_vector(v)).to_sim3());
  };
  EdgeJacobians out{Eigen::MatrixXd(d, d), Eigen::MatrixXd(d, d)};
  for (int k = 0; k < d; ++k) {
    out.wrt_i.col(k) = (edge_residual(mode, m, bump(pi, k, h), pj) - edge_residual(mode, m, bump(pi, k, -h), pj)) / (2 * h);
    out.wrt_j.col(k) = (edge_residual(mode, m, pi, bump(pj, k, h)) - edge_residual(mode, m, pi, bump(pj, k, -h))) / (2 * h);
  }
  return out;
}

}  // namespace

TEST_CASE("residual vanishes on consistent poses and has the group dimension") {
  std::mt19937_64 rng(41);
  const Sim3Pose pi = gat::random_sim3(rng, 2.0), pj = gat::random_sim3(rng, 2.0);
  const Sim3Pose m = compose(inverse(pi), pj);
  const Eigen::VectorXd r = edge_residual(Group::Sim3, m, pi, pj);
  CHECK(r.size() == 7);
  CHECK(r.norm() < 1e-12);
  const Sim3Pose yi = gat::random_simy3(rng).to_sim3(), yj = gat::random_simy3(rng).to_sim3();
  const Eigen::VectorXd ry = edge_residual(Group::SimY3, compose(inverse(yi), yj), yi, yj);
  CHECK(ry.size() == 5);
  CHECK(ry.norm() < 1e-12);
  // A pure log-scale offset shows up in the last coordinate.
  const Eigen::VectorXd rs = edge_residual(Group::Sim3, Sim3Pose::identity(), Sim3Pose::identity(),
                                           Sim3Pose{std::exp(0.3), Rotation3::Identity(), Point3::Zero()});
  CHECK(rs[6] == doctest::Approx(0.3));
  CHECK(rs.head<6>().norm() < 1e-14);
}

TEST_CASE("numeric and analytic Jacobians agree with finite differences") {
  std::mt19937_64 rng(42);
  for (Group mode : {Group::Sim3, Group::SimY3}) {
    for (int trial = 0; trial < 50; ++trial) {
      Sim3Pose pi, pj;
      if (mode == Group::Sim3) {
        pi = gat::random_sim3(rng, 2.5);
        pj = gat::random_sim3(rng, 2.5);
      } else {
        pi = gat::random_simy3(rng, 2.5).to_sim3();
        pj = gat::random_simy3(rng, 2.5).to_sim3();
      }
      // Measurement close to the current relative pose, as in a converging solve.
      const Sim3Pose m = gat::perturb(rng, {compose(inverse(pi), pj)}, mode, 0.3)[0];
      const EdgeJacobians num = edge_jacobians(mode, m, pi, pj, JacobianMode::NumericCentral);
      const EdgeJacobians ana = edge_jacobians(mode, m, pi, pj, JacobianMode::Analytic);
      const EdgeJacobians fd = finite_difference(mode, m, pi, pj, 1e-5);
      const double scale = std::max(1.0, num.wrt_i.norm() + num.wrt_j.norm());
      CHECK((num.wrt_i - ana.wrt_i).norm() / scale < 1e-5);
      CHECK((num.wrt_j - ana.wrt_j).norm() / scale < 1e-5);
      CHECK((fd.wrt_i - ana.wrt_i).norm() / scale < 1e-5);
      CHECK((fd.wrt_j - ana.wrt_j).norm() / scale < 1e-5);
    }
  }
}

TEST_CASE("chain initialization composes adjacency measurements") {
  std::mt19937_64 rng(43);
  const gat::GraphFixture f = gat::random_graph(rng, 6, Group::Sim3, 0);
  const auto init = chain_initialize(f.graph);
  CHECK(gat::gauge_aligned_error(init, f.truth) < 1e-9);
  CHECK(graph_cost(f.graph, init) < 1e-20);
}

TEST_CASE("exact recovery from perturbed starts") {
  std::mt19937_64 rng(44);
  for (JacobianMode jm : {JacobianMode::NumericCentral, JacobianMode::Analytic}) {
    for (Group mode : {Group::Sim3, Group::SimY3}) {
      for (int k : {2, 10, 50}) {
        const gat::GraphFixture f = gat::random_graph(rng, k, mode, k / 3);
        auto init = gat::perturb(rng, f.truth, mode, 0.05);
        init[0] = f.truth[0];
        LmConfig cfg;
        cfg.jacobian = jm;
        const PoseGraphResult res = optimize(f.graph, init, cfg);
        CHECK(gat::gauge_aligned_error(res.poses, f.truth) < 1e-7);
        CHECK(approx_equal(res.poses[0], init[0], 0.0));
        for (std::size_t i = 1; i < res.cost_trace.size(); ++i) {
          CHECK(res.cost_trace[i] <= res.cost_trace[i - 1]);
        }
        CHECK(res.stop != LmStop::MaxIterations);
        if (mode == Group::SimY3) {
          for (const auto& p : res.poses) CHECK(is_yaw_only(p.R));
        }
      }
    }
  }
}

TEST_CASE("inconsistent loop spreads the error along the cycle") {
  std::mt19937_64 rng(45);
  gat::GraphFixture f = gat::random_graph(rng, 6, Group::Sim3, 0);
  for (auto& e : f.graph.edges) e.weight = 1.0;
  Sim3Pose bad = compose(inverse(f.truth[0]), f.truth[5]);
  bad.t += Point3(0.5, 0, 0);
  f.graph.add_loop(0, 5, bad);
  const auto init = chain_initialize(f.graph);
  const PoseGraphResult res = optimize(f.graph, init);
  CHECK(res.cost_trace.back() < res.cost_trace.front());
  CHECK(res.cost_trace.back() > 0.0);
  CHECK(graph_cost(f.graph, res.poses) == doctest::Approx(res.cost_trace.back()));
  // The final pose moves toward the loop measurement but not all the way.
  const double moved = (res.poses[5].t - init[5].t).norm();
  CHECK(moved > 0.05);
  CHECK(moved < 0.5);

  // A heavier loop edge pulls harder.
  gat::GraphFixture g = f;
  g.graph.edges.back().weight = 100.0;
  const PoseGraphResult heavy = optimize(g.graph, init);
  CHECK((heavy.poses[5].t - init[5].t).norm() > moved);
}

TEST_CASE("graph validation") {
  ChunkGraph g;
  g.num_chunks = 3;
  g.mode = Group::SimY3;
  g.add_adjacency(0, Sim3Pose::identity());
  CHECK(kind_of([&] { chain_initialize(g); }) == ErrorKind::MissingAdjacency);
  g.add_adjacency(1, Sim3Pose{1.0, rot_x(0.2), Point3::Zero()});
  CHECK(kind_of([&] { g.validate(); }) == ErrorKind::InvalidArgument);
  g.edges.back().measurement = Sim3Pose::identity();
  CHECK_NOTHROW(g.validate());
  ChunkGraph loop = g;
  loop.add_loop(0, 1, Sim3Pose::identity());
  CHECK(kind_of([&] { loop.validate(); }) == ErrorKind::InvalidArgument);
  ChunkGraph w = g;
  w.edges[0].weight = 0.0;
  CHECK(kind_of([&] { w.validate(); }) == ErrorKind::InvalidArgument);
  const std::vector<Sim3Pose> two(2);
  CHECK(kind_of([&] { optimize(g, two); }) == ErrorKind::LengthMismatch);
  ChunkGraph disconnected;
  disconnected.num_chunks = 4;
  disconnected.add_adjacency(0, Sim3Pose::identity());
  disconnected.add_adjacency(2, Sim3Pose::identity());
  const std::vector<Sim3Pose> four(4);
  CHECK(kind_of([&] { optimize(disconnected, four); }) == ErrorKind::SingularNormalEquations);
  LmConfig bad;
  bad.lambda_up = 0.5;
  CHECK(kind_of([&] { optimize(g, std::vector<Sim3Pose>(3), bad); }) == ErrorKind::InvalidConfig);
}
