#pragma once

// Ground-state search for QuboProblem: exhaustive enumeration (verification
// oracle) and single-flip Metropolis simulated annealing.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qato/encoding.hpp"
#include "qato/error.hpp"
#include "qato/qubo.hpp"

namespace qato {

struct SolveOutcome {
  BitAssignment bits;
  double energy = 0.0;
  std::uint64_t samples = 0;    // states visited / restarts sampled
  double search_seconds = 0.0;  // wall time inside the search
};

/// Signature the optimization loop uses to obtain a ground state.
using QuboSolver = std::function<SolveOutcome(const QuboProblem&)>;

/// Energy change from flipping bit i, given s = c.q for the current bits.
inline double delta_energy(const QuboProblem& qubo, const BitAssignment& bits, std::size_t i, double s) {
  double field = qubo.linear(i);
  for (const auto& nb : qubo.neighbors(i))
    if (bits[nb.index]) field += nb.value;
  if (qubo.has_rank_one_coupling()) {
    const double c = qubo.coupling_weight(i);
    field += qubo.coupling_scale() * c * (s - (bits[i] ? c : 0.0));
  }
  return bits[i] ? -field : field;
}

inline double delta_energy(const QuboProblem& qubo, const BitAssignment& bits, std::size_t i) {
  if (i >= qubo.size() || bits.size() != qubo.size()) throw std::out_of_range("delta_energy: bad index or length");
  return delta_energy(qubo, bits, i, coupling_sum(qubo, bits));
}

struct ExhaustiveParams {
  std::size_t max_qubits = 24;
};

/// Global minimizer by Gray-code enumeration. Ties go to the smallest bit
/// vector read as an integer with qubit 0 as the least significant bit.
inline SolveOutcome solve_exhaustive(const QuboProblem& qubo, const ExhaustiveParams& params = {}) {
  const std::size_t n = qubo.size();
  if (n > params.max_qubits || n >= 63)
    throw SolverError("exhaustive search limited to " + std::to_string(params.max_qubits) + " qubits, got " +
                      std::to_string(n));
  const auto t0 = std::chrono::steady_clock::now();
  BitAssignment bits(n);
  double energy = qubo.offset();
  double s = 0.0;
  std::uint64_t code = 0;
  double best = energy;
  std::uint64_t best_code = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  double scale = std::abs(qubo.offset());
  for (double l : qubo.linear()) scale = std::max(scale, std::abs(l));
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto i = static_cast<std::size_t>(std::countr_zero(step));
    energy += delta_energy(qubo, bits, i, s);
    const double c = qubo.coupling_weight(i);
    s += bits[i] ? -c : c;
    bits[i] ^= 1u;
    code ^= std::uint64_t{1} << i;
    if ((step & 0xFFFF) == 0) {
      energy = evaluate(qubo, bits);
      s = coupling_sum(qubo, bits);
    }
    const double tol = 1e-12 * std::max({1.0, std::abs(best), scale});
    if (energy < best - tol || (energy <= best + tol && code < best_code)) {
      best = energy;
      best_code = code;
    }
  }
  SolveOutcome out;
  out.bits = BitAssignment(n);
  for (std::size_t i = 0; i < n; ++i) out.bits[i] = static_cast<std::uint8_t>((best_code >> i) & 1u);
  out.energy = evaluate(qubo, out.bits);
  out.samples = total;
  out.search_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct SaParams {
  std::size_t sweeps = 2000;
  std::size_t restarts = 10;
  std::optional<double> initial_temperature;  // nullopt: auto from a probe
  double cooling = 0.98;                      // geometric factor per sweep
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (sweeps < 1) throw std::invalid_argument("SaParams: sweeps must be >= 1");
    if (restarts < 1) throw std::invalid_argument("SaParams: restarts must be >= 1");
    if (!(cooling > 0.0 && cooling < 1.0)) throw std::invalid_argument("SaParams: cooling must lie in (0, 1)");
    if (initial_temperature && !(*initial_temperature > 0.0))
      throw std::invalid_argument("SaParams: initial temperature must be positive");
  }
};

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline BitAssignment random_bits(std::size_t n, std::mt19937_64& rng) {
  BitAssignment b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(rng() >> 63);
  return b;
}

// 90th percentile of |dE| along a 100-flip random walk.
inline double probe_temperature(const QuboProblem& qubo, std::uint64_t seed) {
  auto rng = stream(seed, std::numeric_limits<std::uint64_t>::max());
  const std::size_t n = qubo.size();
  auto bits = random_bits(n, rng);
  double s = coupling_sum(qubo, bits);
  std::vector<double> d;
  d.reserve(100);
  for (int f = 0; f < 100; ++f) {
    const auto i = static_cast<std::size_t>(rng() % n);
    d.push_back(std::abs(delta_energy(qubo, bits, i, s)));
    const double c = qubo.coupling_weight(i);
    s += bits[i] ? -c : c;
    bits[i] ^= 1u;
  }
  std::sort(d.begin(), d.end());
  const double t = d[89];
  return t > 0.0 ? t : 1.0;
}

struct RestartResult {
  BitAssignment bits;
  double energy = std::numeric_limits<double>::infinity();
};

inline RestartResult anneal_once(const QuboProblem& qubo, const SaParams& p, double t0, std::size_t restart) {
  auto rng = stream(p.seed, restart);
  const std::size_t n = qubo.size();
  auto bits = random_bits(n, rng);
  double energy = evaluate(qubo, bits);
  double s = coupling_sum(qubo, bits);
  RestartResult best{bits, energy};
  double temperature = t0;
  for (std::size_t sweep = 0; sweep < p.sweeps; ++sweep) {
    const double beta = 1.0 / temperature;
    for (std::size_t i = 0; i < n; ++i) {
      const double de = delta_energy(qubo, bits, i, s);
      bool accept = de <= 0.0;
      if (!accept) {
        const double x = de * beta;
        accept = x < 50.0 && uniform01(rng) < std::exp(-x);
      }
      if (accept) {
        const double c = qubo.coupling_weight(i);
        s += bits[i] ? -c : c;
        bits[i] ^= 1u;
        energy += de;
      }
    }
    // Re-sync the running sums once per sweep to bound drift.
    energy = evaluate(qubo, bits);
    s = coupling_sum(qubo, bits);
    if (energy < best.energy) best = {bits, energy};
    temperature *= p.cooling;
  }
  return best;
}

}  // namespace detail

/// Simulated annealing; best of `restarts` independent seeded runs. Each
/// restart owns the stream (seed, restart index), so the result does not
/// depend on thread scheduling.
inline SolveOutcome solve_sa(const QuboProblem& qubo, const SaParams& params = {}) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = qubo.size();
  SolveOutcome out;
  if (n == 0) {
    out.energy = qubo.offset();
    return out;
  }
  const double temperature =
      params.initial_temperature ? *params.initial_temperature : detail::probe_temperature(qubo, params.seed);
  std::vector<detail::RestartResult> results(params.restarts);
  std::size_t workers = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, params.restarts);
  if (workers <= 1) {
    for (std::size_t r = 0; r < params.restarts; ++r) results[r] = detail::anneal_once(qubo, params, temperature, r);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < params.restarts; r += workers)
          results[r] = detail::anneal_once(qubo, params, temperature, r);
      });
    }
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].energy < results[best].energy) best = r;
  out.bits = std::move(results[best].bits);
  out.energy = evaluate(qubo, out.bits);
  out.samples = params.restarts;
  out.search_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// SA solver for repeated use; call k runs with seed (params.seed, k) so a
/// sequence of solves is reproducible without reusing one stream.
inline QuboSolver make_sa_solver(SaParams params) {
  params.validate();
  return [params, call = std::uint64_t{0}](const QuboProblem& q) mutable {
    SaParams p = params;
    p.seed = params.seed ^ (0x9e3779b97f4a7c15ULL * ++call);
    return solve_sa(q, p);
  };
}

inline QuboSolver make_exhaustive_solver(ExhaustiveParams params = {}) {
  return [params](const QuboProblem& q) { return solve_exhaustive(q, params); };
}

}  // namespace qato
