#include <gtest/gtest.h>

#include "qato/benchmarks.hpp"
#include "qato/driver.hpp"

using namespace qato;

namespace {

RunConfig truss6_config() {
  const auto bp = benchmark_params("truss6");
  RunConfig c;
  c.penalty = bp.penalty;
  c.theta = bp.theta;
  c.theta_slack = bp.theta_slack;
  c.rho0 = bp.rho0;
  c.v_target = 0.35;
  c.solver = make_exhaustive_solver();
  return c;
}

Problem single_bar() {
  TrussModel t;
  t.dimension = 1;
  t.nodes = {{0, 0, 0}, {1, 0, 0}};
  t.members = {{0, 1, 0.5}};
  Supports s;
  s.fixed_dofs = {{0, 0}};
  LoadCase l;
  l.point_loads = {{1, {1000, 0, 0}}};
  return Problem(ProblemKind::truss, t, {2e11, 0.3}, l, s, 1.0);
}

}  // namespace

TEST(Convergence, Examples) {
  const std::vector<double> a{10, 10.05, 10.02, 10.03, 10.01, 10.04};
  const std::vector<double> b{10, 12, 12.01, 12.02, 12.03, 12.04};
  EXPECT_TRUE(check_convergence(a, 0.01, 5));
  EXPECT_FALSE(check_convergence(b, 0.01, 5));
  EXPECT_FALSE(check_convergence(std::vector<double>{1, 1, 1}, 0.01, 5));
  EXPECT_TRUE(check_convergence(std::vector<double>{0, 0, 0}, 0.01, 2));
}

TEST(Tfs, Examples) {
  EXPECT_DOUBLE_EQ(tfs(TfsMode::qa, 20e-6, 200, 16), 0.064);
  EXPECT_DOUBLE_EQ(tfs(TfsMode::qa, 20e-6, 250, 15), 0.075);
  EXPECT_EQ(tfs(TfsMode::sa, 0.0, 10, 30), 0.0);
  EXPECT_THROW(tfs(TfsMode::sa, -1.0, 1, 1), std::invalid_argument);
}

TEST(Driver, MaxIterationsZero) {
  auto c = truss6_config();
  c.max_iterations = 0;
  const auto r = run_annealing_optimization(build_benchmark("truss6"), c);
  EXPECT_TRUE(r.history.empty());
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.n_qubits, 7u);
}

TEST(Driver, SingleElementReachesCap) {
  RunConfig c;
  c.rho0 = 0.5;
  c.v_target = 1.0;
  c.solver = make_exhaustive_solver();
  const auto r = run_annealing_optimization(single_bar(), c);
  EXPECT_EQ(r.final_state.rho[0], 1.0);
  double prev = r.initial_objective;
  for (const auto& h : r.history) {
    if (h.iteration > 8) break;
    EXPECT_LT(h.objective, prev);
    prev = h.objective;
  }
}

TEST(Driver, Truss6TwoBarDesign) {
  const auto p = build_benchmark("truss6");
  std::size_t observed = 0;
  const auto r = run_annealing_optimization(p, truss6_config(), [&](const IterationRecord&, const DesignState&) {
    ++observed;
  });
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 40u);
  EXPECT_EQ(observed, r.iterations);
  // Horizontal bottom bar (0) and the diagonal from the loaded node to the top support (5).
  for (std::size_t e = 0; e < 6; ++e) {
    if (e == 0 || e == 5) EXPECT_EQ(r.final_state.rho[e], 1.0) << e;
    else EXPECT_LE(r.final_state.rho[e], kDeletedThreshold) << e;
  }
  EXPECT_EQ(r.history.back().n_cap, 2u);
  EXPECT_EQ(r.history.back().n_floor, 4u);
  EXPECT_LE(r.final_volume_ratio(), 0.35 + 0.02 + 0.02);
}

TEST(Driver, EnergyMatchesChosenBits) {
  auto c = truss6_config();
  c.max_iterations = 3;
  const auto p = build_benchmark("truss6");
  const auto r = run_annealing_optimization(p, c);
  ASSERT_EQ(r.history.size(), 3u);
  // The first update is the global minimizer of the first QUBO.
  const auto layout = make_layout(6, 1, 1);
  const auto s0 = init_design(6, c.rho0, c.theta);
  const auto a = fem::Analyzer(p).analyze(s0.rho);
  const auto q = build_qubo(p, s0, a.strain_energy, {c.penalty, c.theta_slack, c.v_target}, layout);
  EXPECT_NEAR(r.history[0].energy, solve_exhaustive(q).energy, 1e-12);
}

TEST(Driver, SolverFailureCarriesPartialHistory) {
  auto c = truss6_config();
  int calls = 0;
  c.solver = [&calls](const QuboProblem& q) {
    if (++calls == 3) throw SolverError("boom");
    return solve_exhaustive(q);
  };
  try {
    run_annealing_optimization(build_benchmark("truss6"), c);
    FAIL() << "expected RunError";
  } catch (const RunError& e) {
    EXPECT_EQ(e.partial().history.size(), 2u);
    EXPECT_FALSE(e.fem_failure());
  }
}

TEST(Driver, WrongBitLengthIsRejected) {
  auto c = truss6_config();
  c.solver = [](const QuboProblem&) { return SolveOutcome{BitAssignment(3), 0.0, 1, 0.0}; };
  EXPECT_THROW(run_annealing_optimization(build_benchmark("truss6"), c), RunError);
}

TEST(Driver, InvalidConfig) {
  auto c = truss6_config();
  c.solver = nullptr;
  EXPECT_THROW(run_annealing_optimization(build_benchmark("truss6"), c), std::invalid_argument);
  c = truss6_config();
  c.v_target = 0.0;
  EXPECT_THROW(run_annealing_optimization(build_benchmark("truss6"), c), std::invalid_argument);
}
