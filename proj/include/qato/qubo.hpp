#pragma once

// QUBO cost for one design update:
//
//   f(q) = -sum_e alpha_e(q_e) SE_e
//          + lambda (sum_e alpha_e(q_e) V_e/V0 - (v_target - S(q_s)))^2
//
// with alpha_e = Theta_e xi(q_e), S = Theta_s xi(q_s). Expanding the square
// couples every pair of qubits through a single rank-one term
// lambda (c.q)^2, c_i = Phi_e w_k/W (element) or Theta_s w_k/W_s (slack).
// QuboProblem keeps that term factored so that in-process solvers can flip
// a bit in O(1); `materialized_pairs` expands it for export.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qato/design.hpp"
#include "qato/encoding.hpp"
#include "qato/model.hpp"

namespace qato {

struct QuadTerm {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  double value = 0.0;
};

class QuboProblem {
 public:
  struct Neighbor {
    std::size_t index;
    double value;
  };

  QuboProblem() = default;
  explicit QuboProblem(std::size_t n) : linear_(n, 0.0), adjacency_(n) {}

  std::size_t size() const { return linear_.size(); }

  double offset() const { return offset_; }
  void set_offset(double c) { offset_ = c; }
  void add_offset(double c) { offset_ += c; }

  double linear(std::size_t i) const { return linear_[i]; }
  const std::vector<double>& linear() const { return linear_; }
  void add_linear(std::size_t i, double v) { linear_.at(i) += v; }

  /// Adds v to the explicit coefficient of q_i q_j (i != j, order irrelevant).
  void add_quadratic(std::size_t i, std::size_t j, double v) {
    if (i == j) {
      add_linear(i, v);  // q^2 = q
      return;
    }
    if (i >= size() || j >= size()) throw std::out_of_range("add_quadratic: index out of range");
    add_directed(i, j, v);
    add_directed(j, i, v);
  }

  /// Explicit neighbours of qubit i (both directions stored).
  const std::vector<Neighbor>& neighbors(std::size_t i) const { return adjacency_[i]; }

  /// Sets the dense coupling sum_{i<j} scale * w_i * w_j * q_i q_j.
  void set_rank_one_coupling(double scale, std::vector<double> weights) {
    if (weights.size() != size()) throw std::invalid_argument("rank-one coupling size mismatch");
    coupling_scale_ = scale;
    coupling_weight_ = std::move(weights);
  }
  bool has_rank_one_coupling() const { return !coupling_weight_.empty() && coupling_scale_ != 0.0; }
  double coupling_scale() const { return coupling_scale_; }
  double coupling_weight(std::size_t i) const { return coupling_weight_.empty() ? 0.0 : coupling_weight_[i]; }
  const std::vector<double>& coupling_weights() const { return coupling_weight_; }

  /// Total quadratic coefficient Q_ij for i != j.
  double quadratic(std::size_t i, std::size_t j) const {
    double v = 0.0;
    for (const auto& nb : adjacency_[i])
      if (nb.index == j) v += nb.value;
    if (has_rank_one_coupling()) v += coupling_scale_ * coupling_weight_[i] * coupling_weight_[j];
    return v;
  }

  std::size_t explicit_pair_count() const {
    std::size_t n = 0;
    for (const auto& row : adjacency_) n += row.size();
    return n / 2;
  }

  /// Calls f(i, j, Q_ij) for every i < j with a nonzero coefficient,
  /// rank-one coupling included, in row-major order.
  template <typename F>
  void for_each_pair(F&& f) const {
    const std::size_t n = size();
    std::vector<double> row(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& nb : adjacency_[i])
        if (nb.index > i) row[nb.index] += nb.value;
      const bool dense = has_rank_one_coupling() && coupling_weight_[i] != 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double v = row[j];
        if (dense) v += coupling_scale_ * coupling_weight_[i] * coupling_weight_[j];
        row[j] = 0.0;
        if (v != 0.0) f(i, j, v);
      }
    }
  }

  std::vector<QuadTerm> materialized_pairs() const {
    std::vector<QuadTerm> out;
    for_each_pair([&](std::size_t i, std::size_t j, double v) { out.push_back({i, j, v}); });
    return out;
  }

  const std::optional<VariableMap>& layout() const { return layout_; }
  void set_layout(VariableMap m) { layout_ = std::move(m); }

 private:
  void add_directed(std::size_t i, std::size_t j, double v) {
    for (auto& nb : adjacency_[i]) {
      if (nb.index == j) {
        nb.value += v;
        return;
      }
    }
    adjacency_[i].push_back({j, v});
  }

  std::vector<double> linear_;
  double offset_ = 0.0;
  std::vector<std::vector<Neighbor>> adjacency_;
  double coupling_scale_ = 0.0;
  std::vector<double> coupling_weight_;
  std::optional<VariableMap> layout_;
};

/// c.q for the rank-one coupling weights.
inline double coupling_sum(const QuboProblem& qubo, const BitAssignment& bits) {
  double s = 0.0;
  if (!qubo.has_rank_one_coupling()) return s;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s += qubo.coupling_weight(i);
  return s;
}

/// offset + sum_k Q_kk q_k + sum_{k<l} Q_kl q_k q_l.
inline double evaluate(const QuboProblem& qubo, const BitAssignment& bits) {
  if (bits.size() != qubo.size()) throw std::invalid_argument("evaluate: bit vector length mismatch");
  double e = qubo.offset();
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    e += qubo.linear(i);
    for (const auto& nb : qubo.neighbors(i))
      if (nb.index > i && bits[nb.index]) e += nb.value;
    const double c = qubo.coupling_weight(i);
    s += c;
    s2 += c * c;
  }
  if (qubo.has_rank_one_coupling()) e += 0.5 * qubo.coupling_scale() * (s * s - s2);
  return e;
}

struct QuboConfig {
  double penalty = 5.0;       // lambda
  double theta_slack = 0.02;  // Theta_s
  double v_target = 1.0;
};

/// Per-element inputs of one design update in plain form.
struct UpdateTerms {
  std::span<const double> strain_energy;    // SE_e with the current rho-scaled stiffness
  std::span<const double> theta;            // Theta_e
  std::span<const double> volume_fraction;  // V_e(rho_e) / V0
};

inline void check_terms(const UpdateTerms& t, const VariableMap& layout) {
  if (t.strain_energy.size() != layout.n_elem || t.theta.size() != layout.n_elem ||
      t.volume_fraction.size() != layout.n_elem)
    throw std::invalid_argument("build_qubo: size mismatch between strain energy, design state and layout");
}

inline QuboProblem build_qubo(const UpdateTerms& t, const QuboConfig& cfg, const VariableMap& layout) {
  check_terms(t, layout);
  const double lambda = cfg.penalty, v = cfg.v_target;
  QuboProblem q(layout.size());
  std::vector<double> c(layout.size(), 0.0);
  for (std::size_t e = 0; e < layout.n_elem; ++e) {
    const double phi = t.theta[e] * t.volume_fraction[e];
    for (std::size_t k = 0; k < layout.n_q; ++k) {
      const auto i = layout.element_qubit(e, k);
      const double w = layout.weight_fraction(i);
      c[i] = phi * w;
      q.add_linear(i, -t.theta[e] * w * t.strain_energy[e]);
    }
  }
  for (std::size_t k = 0; k < layout.n_s; ++k) {
    const auto i = layout.slack_qubit(k);
    c[i] = cfg.theta_slack * layout.weight_fraction(i);
  }
  // Penalty: lambda (c.q - v)^2 = lambda sum c_i^2 q_i - 2 lambda v c.q
  //          + 2 lambda sum_{i<j} c_i c_j q_i q_j + lambda v^2
  for (std::size_t i = 0; i < c.size(); ++i) q.add_linear(i, lambda * c[i] * c[i] - 2.0 * lambda * v * c[i]);
  q.set_offset(lambda * v * v);
  if (lambda != 0.0) q.set_rank_one_coupling(2.0 * lambda, std::move(c));
  q.set_layout(layout);
  return q;
}

/// The unexpanded cost for the same inputs; independent route to the energy.
inline double direct_cost(const UpdateTerms& t, const QuboConfig& cfg, const VariableMap& layout,
                          const BitAssignment& bits) {
  check_terms(t, layout);
  if (bits.size() != layout.size()) throw std::invalid_argument("direct_cost: bit vector length mismatch");
  double objective = 0.0, volume = 0.0;
  for (std::size_t e = 0; e < layout.n_elem; ++e) {
    const double alpha = t.theta[e] * element_xi(bits, layout, e);
    objective -= alpha * t.strain_energy[e];
    volume += alpha * t.volume_fraction[e];
  }
  const double slack = cfg.theta_slack * slack_xi(bits, layout);
  const double g = volume - (cfg.v_target - slack);
  return objective + cfg.penalty * g * g;
}

/// V_e(rho_e)/V0 for the current design.
inline std::vector<double> volume_fractions(const Problem& problem, const DesignState& state) {
  std::vector<double> vf(state.size());
  for (std::size_t e = 0; e < state.size(); ++e)
    vf[e] = state.rho[e] * problem.element_volume(e) / problem.initial_volume();
  return vf;
}

inline QuboProblem build_qubo(const Problem& problem, const DesignState& state, std::span<const double> se,
                              const QuboConfig& cfg, const VariableMap& layout) {
  const auto vf = volume_fractions(problem, state);
  return build_qubo(UpdateTerms{se, state.theta, vf}, cfg, layout);
}

inline double direct_cost(const Problem& problem, const DesignState& state, std::span<const double> se,
                          const QuboConfig& cfg, const VariableMap& layout, const BitAssignment& bits) {
  const auto vf = volume_fractions(problem, state);
  return direct_cost(UpdateTerms{se, state.theta, vf}, cfg, layout, bits);
}

}  // namespace qato
