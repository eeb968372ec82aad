#pragma once

// Optimality-criteria baseline for min compliance s.t. volume, with linear
// stiffness interpolation (sensitivity -dc/drho_e = SE_e / rho_e).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "qato/design.hpp"
#include "qato/driver.hpp"
#include "qato/fem.hpp"
#include "qato/model.hpp"

namespace qato {

struct OcParams {
  double move_limit = 0.2;
  double damping = 0.5;  // eta
  double bisection_tolerance = 1e-6;
  std::size_t max_iterations = 200;
  double tolerance = 0.01;
  std::size_t window = 5;

  void validate() const {
    if (!(move_limit > 0.0 && move_limit < 1.0)) throw std::invalid_argument("OcParams: move limit must lie in (0, 1)");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("OcParams: damping must lie in (0, 1]");
    if (!(bisection_tolerance > 0.0)) throw std::invalid_argument("OcParams: bisection tolerance must be positive");
  }
};

struct OcStep {
  std::vector<double> rho;
  double multiplier = 0.0;
  double volume_ratio = 0.0;
};

/// rho'_e = clamp(rho_e (s_e / (mu v_e))^eta, max(eps, rho_e - m), min(1, rho_e + m)),
/// mu found by bisection so that sum rho'_e v_e = v_target. `volume_fraction`
/// holds V_e^0 / V0.
inline OcStep oc_update(std::span<const double> rho, std::span<const double> sensitivities,
                        std::span<const double> volume_fraction, double v_target, const OcParams& params = {}) {
  params.validate();
  const std::size_t n = rho.size();
  if (sensitivities.size() != n || volume_fraction.size() != n) throw std::invalid_argument("oc_update: size mismatch");
  double bmax = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    if (sensitivities[e] < 0.0) throw std::invalid_argument("oc_update: sensitivities must be nonnegative");
    bmax = std::max(bmax, sensitivities[e] / volume_fraction[e]);
  }
  if (!(bmax > 0.0)) throw std::runtime_error("oc_update: bisection cannot bracket the volume target (all sensitivities zero)");

  OcStep step;
  step.rho.resize(n);
  auto trial = [&](double mu) {
    double vol = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      const double lo = std::max(kRhoFloor, rho[e] - params.move_limit);
      const double hi = std::min(1.0, rho[e] + params.move_limit);
      const double b = sensitivities[e] / (mu * volume_fraction[e]);
      step.rho[e] = std::clamp(rho[e] * std::pow(b, params.damping), lo, hi);
      vol += step.rho[e] * volume_fraction[e];
    }
    return vol;
  };
  // Volume decreases in mu; bracket relative to the largest ratio so the
  // result is invariant under positive scaling of the sensitivities.
  double lo = std::log(bmax) - 80.0, hi = std::log(bmax) + 80.0;
  double mu = bmax, vol = 0.0;
  for (int k = 0; k < 400; ++k) {
    mu = std::exp(0.5 * (lo + hi));
    vol = trial(mu);
    if (std::abs(vol - v_target) <= params.bisection_tolerance) break;
    if (vol > v_target) lo = std::log(mu);
    else hi = std::log(mu);
    if (hi - lo < 1e-14) break;
  }
  step.multiplier = mu;
  step.volume_ratio = vol;
  return step;
}

inline RunResult run_oc(const Problem& problem, const OcParams& params, double v_target,
                        const IterationObserver& observer = {}) {
  params.validate();
  const std::size_t n = problem.element_count();
  RunResult result;
  result.method = "oc";
  DesignState state = init_design(n, std::clamp(v_target, kRhoFloor, 1.0), 1.0);
  std::vector<double> vf(n);
  for (std::size_t e = 0; e < n; ++e) vf[e] = problem.element_volume(e) / problem.initial_volume();

  fem::Analyzer analyzer(problem);
  auto analyze = [&]() {
    try {
      return analyzer.analyze(state.rho);
    } catch (const FemError& e) {
      result.final_state = state;
      result.iterations = result.history.size();
      throw RunError(e.what(), result, true);
    }
  };
  auto analysis = analyze();
  result.initial_objective = analysis.compliance;
  std::vector<double> objectives{analysis.compliance};
  double update_time = 0.0;
  std::vector<double> sens(n);
  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    for (std::size_t e = 0; e < n; ++e) sens[e] = analysis.strain_energy[e] / state.rho[e];
    const auto t0 = std::chrono::steady_clock::now();
    auto step = oc_update(state.rho, sens, vf, v_target, params);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    update_time += dt;
    state.rho = std::move(step.rho);
    ++state.iteration;
    analysis = analyze();

    IterationRecord rec;
    rec.iteration = state.iteration;
    rec.objective = analysis.compliance;
    rec.volume_ratio = volume_ratio(state, problem);
    rec.energy = std::numeric_limits<double>::quiet_NaN();
    rec.solver_seconds = dt;
    rec.n_cap = state.count_at_cap();
    rec.n_floor = state.count_at_floor();
    result.history.push_back(rec);
    objectives.push_back(rec.objective);
    if (observer) observer(rec, state);
    if (check_convergence(objectives, params.tolerance, params.window)) {
      result.converged = true;
      break;
    }
  }
  result.iterations = result.history.size();
  result.final_state = std::move(state);
  result.tfs = update_time;
  return result;
}

}  // namespace qato
