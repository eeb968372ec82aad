#pragma once

// The design-update loop: equilibrium solve -> QUBO -> ground state ->
// decode updaters -> multiplicative update, until the objective settles.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qato/design.hpp"
#include "qato/encoding.hpp"
#include "qato/error.hpp"
#include "qato/fem.hpp"
#include "qato/model.hpp"
#include "qato/qubo.hpp"
#include "qato/solvers.hpp"

namespace qato {

inline constexpr double kConvergenceEpsilon = 1e-30;

/// One design iteration, describing the design after the update.
struct IterationRecord {
  std::size_t iteration = 0;  // 1-based update count
  double objective = 0.0;     // F^T U of the updated design
  double volume_ratio = 0.0;
  double energy = 0.0;        // QUBO energy of the chosen bits (NaN for OC)
  double solver_seconds = 0.0;
  std::size_t n_cap = 0;
  std::size_t n_floor = 0;
};

struct RunResult {
  std::string method;  // "anneal" or "oc"
  double initial_objective = 0.0;
  std::vector<IterationRecord> history;
  DesignState final_state;
  bool converged = false;
  std::size_t iterations = 0;  // I_N
  double tfs = 0.0;            // seconds
  std::size_t n_qubits = 0;

  double final_objective() const { return history.empty() ? initial_objective : history.back().objective; }
  double final_volume_ratio() const { return history.empty() ? 0.0 : history.back().volume_ratio; }
};

/// Thrown when a run aborts; carries the history up to the failure.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, RunResult partial, bool fem_failure)
      : std::runtime_error(what), partial_(std::move(partial)), fem_failure_(fem_failure) {}
  const RunResult& partial() const noexcept { return partial_; }
  bool fem_failure() const noexcept { return fem_failure_; }

 private:
  RunResult partial_;
  bool fem_failure_;
};

/// True iff the last `window` relative changes are all below `tolerance`.
inline bool check_convergence(std::span<const double> objectives, double tolerance = 0.01, std::size_t window = 5) {
  if (window == 0 || objectives.size() < window + 1) return false;
  for (std::size_t i = objectives.size() - window; i < objectives.size(); ++i) {
    const double prev = objectives[i - 1];
    const double rel = std::abs(objectives[i] - prev) / std::max(std::abs(prev), kConvergenceEpsilon);
    if (!(rel < tolerance)) return false;
  }
  return true;
}

enum class TfsMode { qa, sa };

/// qa: t_a * R * I_N; sa: t_s * I_N.
inline double tfs(TfsMode mode, double t_per, double repeats, double iterations) {
  if (t_per < 0 || repeats < 0 || iterations < 0) throw std::invalid_argument("tfs: inputs must be nonnegative");
  return mode == TfsMode::qa ? t_per * repeats * iterations : t_per * iterations;
}

struct RunConfig {
  double penalty = 5.0;  // lambda
  double theta = 1.1;    // Theta_e
  double theta_slack = 0.02;
  std::size_t n_q = 1;
  std::size_t n_s = 1;
  double rho0 = 0.5;
  double v_target = 1.0;
  double tolerance = 0.01;
  std::size_t window = 5;
  std::size_t max_iterations = 200;
  QuboSolver solver;

  void validate() const {
    if (!(penalty > 0.0)) throw std::invalid_argument("RunConfig: lambda must be positive");
    if (!(theta > 0.0) || !(theta_slack > 0.0)) throw std::invalid_argument("RunConfig: theta values must be positive");
    if (window < 1) throw std::invalid_argument("RunConfig: window must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("RunConfig: tolerance must be positive");
    if (!(v_target > 0.0 && v_target <= 1.0)) throw std::invalid_argument("RunConfig: v_target must lie in (0, 1]");
    if (!solver) throw std::invalid_argument("RunConfig: no solver configured");
  }
};

/// Called after every iteration with the record and the updated state.
using IterationObserver = std::function<void(const IterationRecord&, const DesignState&)>;

inline RunResult run_annealing_optimization(const Problem& problem, const RunConfig& config,
                                            const IterationObserver& observer = {}) {
  config.validate();
  const auto layout = make_layout(problem.element_count(), config.n_q, config.n_s);
  RunResult result;
  result.method = "anneal";
  result.n_qubits = layout.size();
  DesignState state = init_design(problem.element_count(), config.rho0, config.theta);
  const QuboConfig qcfg{config.penalty, config.theta_slack, config.v_target};

  fem::Analyzer analyzer(problem);
  fem::Analysis analysis;
  auto fail = [&](const std::string& what, bool fem_failure) {
    result.final_state = state;
    result.iterations = result.history.size();
    throw RunError(what, result, fem_failure);
  };
  try {
    analysis = analyzer.analyze(state.rho);
  } catch (const FemError& e) {
    fail(e.what(), true);
  }
  result.initial_objective = analysis.compliance;
  std::vector<double> objectives{analysis.compliance};
  double search_time = 0.0;

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const auto qubo = build_qubo(problem, state, analysis.strain_energy, qcfg, layout);
    SolveOutcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      outcome = config.solver(qubo);
    } catch (const std::exception& e) {
      fail(std::string("solver failed: ") + e.what(), false);
    }
    if (outcome.bits.size() != layout.size()) fail("solver returned a bit vector of the wrong length", false);
    const double search_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    search_time += search_seconds;

    const auto alpha = decode_alphas(outcome.bits, layout, state);
    state = apply_update(std::move(state), alpha);
    try {
      analysis = analyzer.analyze(state.rho);
    } catch (const FemError& e) {
      fail(e.what(), true);
    }

    IterationRecord rec;
    rec.iteration = state.iteration;
    rec.objective = analysis.compliance;
    rec.volume_ratio = volume_ratio(state, problem);
    rec.energy = evaluate(qubo, outcome.bits);
    rec.solver_seconds = search_seconds;
    rec.n_cap = state.count_at_cap();
    rec.n_floor = state.count_at_floor();
    result.history.push_back(rec);
    objectives.push_back(rec.objective);
    if (observer) observer(rec, state);

    if (check_convergence(objectives, config.tolerance, config.window)) {
      result.converged = true;
      break;
    }
  }
  result.iterations = result.history.size();
  result.final_state = std::move(state);
  const double mean_search = result.iterations ? search_time / static_cast<double>(result.iterations) : 0.0;
  result.tfs = tfs(TfsMode::sa, mean_search, 1.0, static_cast<double>(result.iterations));
  return result;
}

}  // namespace qato
