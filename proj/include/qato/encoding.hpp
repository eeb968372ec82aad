#pragma once

// Binary encoding of updaters and slack: qubit layout and the normalized
// binary series expansion xi(q) = sum w_k q_k / sum w_k with w_k = k.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace qato {

struct BitAssignment {
  std::vector<std::uint8_t> bits;

  BitAssignment() = default;
  explicit BitAssignment(std::size_t n) : bits(n, 0) {}
  explicit BitAssignment(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }
  std::uint8_t& operator[](std::size_t i) { return bits[i]; }
  friend bool operator==(const BitAssignment&, const BitAssignment&) = default;
};

/// Qubit layout: element e owns qubits [e*n_q, (e+1)*n_q); slack qubits follow.
struct VariableMap {
  std::size_t n_elem = 0;
  std::size_t n_q = 1;
  std::size_t n_s = 1;
  std::vector<double> weights;        // w_k, k = 1..n_q
  double weight_sum = 1.0;            // W
  std::vector<double> slack_weights;  // w_k, k = 1..n_s
  double slack_weight_sum = 1.0;

  std::size_t size() const { return n_elem * n_q + n_s; }
  std::size_t element_qubit(std::size_t e, std::size_t k) const { return e * n_q + k; }
  std::size_t slack_qubit(std::size_t k) const { return n_elem * n_q + k; }
  bool is_slack(std::size_t i) const { return i >= n_elem * n_q; }
  /// Owning element of an element qubit.
  std::size_t element_of(std::size_t i) const { return i / n_q; }
  /// omega_k = w_k / W for element qubit i, or the slack analogue.
  double weight_fraction(std::size_t i) const {
    if (is_slack(i)) return slack_weights[i - n_elem * n_q] / slack_weight_sum;
    return weights[i % n_q] / weight_sum;
  }
  friend bool operator==(const VariableMap&, const VariableMap&) = default;
};

inline std::vector<double> series_weights(std::size_t n) {
  std::vector<double> w(n);
  std::iota(w.begin(), w.end(), 1.0);
  return w;
}

/// N_q = n_elem * n_q + n_s.
inline VariableMap make_layout(std::size_t n_elem, std::size_t n_q = 1, std::size_t n_s = 1) {
  if (n_q < 1 || n_s < 1) throw std::invalid_argument("make_layout: n_q and n_s must be >= 1");
  VariableMap m;
  m.n_elem = n_elem;
  m.n_q = n_q;
  m.n_s = n_s;
  m.weights = series_weights(n_q);
  m.weight_sum = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  m.slack_weights = series_weights(n_s);
  m.slack_weight_sum = std::accumulate(m.slack_weights.begin(), m.slack_weights.end(), 0.0);
  return m;
}

inline double xi(std::span<const std::uint8_t> group, std::span<const double> weights) {
  if (group.size() != weights.size()) throw std::invalid_argument("xi: group/weight length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < group.size(); ++k) {
    num += weights[k] * group[k];
    den += weights[k];
  }
  return num / den;
}

inline double element_xi(const BitAssignment& bits, const VariableMap& m, std::size_t e) {
  return xi(std::span(bits.bits).subspan(m.element_qubit(e, 0), m.n_q), m.weights);
}

inline double slack_xi(const BitAssignment& bits, const VariableMap& m) {
  return xi(std::span(bits.bits).subspan(m.slack_qubit(0), m.n_s), m.slack_weights);
}

}  // namespace qato
