#pragma once

// Design state and the multiplicative updater scheme: rho' = alpha * rho,
// with the cap latch (theta -> 1 once an element saturates) and the floor.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qato/encoding.hpp"
#include "qato/model.hpp"

namespace qato {

/// Elements within a decade of the floor count as deleted; a floored element
/// grows by at most Theta per iteration when reintroduced.
inline constexpr double kDeletedThreshold = 10.0 * kRhoFloor;

struct DesignState {
  std::vector<double> rho;
  std::vector<double> theta;
  double rho0 = 1.0;
  double theta_config = 1.0;
  std::size_t iteration = 0;
  std::vector<std::vector<double>> alpha_log;

  std::size_t size() const { return rho.size(); }
  std::size_t count_at_cap() const {
    return static_cast<std::size_t>(std::count_if(rho.begin(), rho.end(), [](double r) { return r >= 1.0; }));
  }
  std::size_t count_at_floor() const {
    return static_cast<std::size_t>(std::count_if(rho.begin(), rho.end(), [](double r) { return r <= kDeletedThreshold; }));
  }
};

inline DesignState init_design(std::size_t n_elem, double rho0, double theta) {
  if (!(rho0 > 0.0 && rho0 <= 1.0)) throw std::invalid_argument("init_design: rho0 must lie in (0, 1]");
  if (!(theta > 0.0)) throw std::invalid_argument("init_design: theta must be positive");
  DesignState s;
  s.rho.assign(n_elem, rho0);
  s.theta.assign(n_elem, theta);
  s.rho0 = rho0;
  s.theta_config = theta;
  return s;
}

/// alpha_e = max(theta_e * xi(q_e), eps_alpha).
inline std::vector<double> decode_alphas(const BitAssignment& bits, const VariableMap& layout,
                                         const DesignState& state) {
  if (bits.size() != layout.size() || layout.n_elem != state.size())
    throw std::invalid_argument("decode_alphas: layout mismatch");
  std::vector<double> alpha(state.size());
  for (std::size_t e = 0; e < state.size(); ++e)
    alpha[e] = std::max(state.theta[e] * element_xi(bits, layout, e), kAlphaFloor);
  return alpha;
}

/// One iteration of rho' = alpha * rho with the upper cap (which latches
/// theta to 1) and the lower floor.
inline DesignState apply_update(DesignState state, std::span<const double> alpha) {
  if (alpha.size() != state.size()) throw std::invalid_argument("apply_update: alpha size mismatch");
  for (std::size_t e = 0; e < state.size(); ++e) {
    double r = alpha[e] * state.rho[e];
    if (r > 1.0) {
      r = 1.0;
      state.theta[e] = 1.0;
    }
    state.rho[e] = std::max(r, kRhoFloor);
  }
  state.alpha_log.emplace_back(alpha.begin(), alpha.end());
  ++state.iteration;
  return state;
}

/// Rebuild rho from rho0 and the logged updaters, clamping every iteration.
inline std::vector<double> replay_rho(const DesignState& state) {
  std::vector<double> rho(state.size(), state.rho0);
  for (const auto& alpha : state.alpha_log)
    for (std::size_t e = 0; e < rho.size(); ++e) rho[e] = std::clamp(alpha[e] * rho[e], kRhoFloor, 1.0);
  return rho;
}

/// Sum_e rho_e V_e^0 / V0.
inline double volume_ratio(std::span<const double> rho, const Problem& problem) {
  double v = 0.0;
  for (std::size_t e = 0; e < rho.size(); ++e) v += rho[e] * problem.element_volume(e);
  return v / problem.initial_volume();
}

inline double volume_ratio(const DesignState& state, const Problem& problem) {
  return volume_ratio(state.rho, problem);
}

}  // namespace qato
