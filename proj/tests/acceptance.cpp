// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "qato/benchmarks.hpp"
#include "qato/driver.hpp"
#include "qato/io.hpp"
#include "qato/oc.hpp"

using namespace qato;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig benchmark_config(const std::string& name, const Problem& p, bool exhaustive, std::uint64_t seed = 1) {
  const auto bp = benchmark_params(name);
  RunConfig c;
  c.penalty = bp.penalty;
  c.theta = bp.theta;
  c.theta_slack = bp.theta_slack;
  c.rho0 = bp.rho0;
  c.v_target = p.v_target();
  if (exhaustive) {
    c.solver = make_exhaustive_solver();
  } else {
    SaParams sp;
    sp.seed = seed;
    c.solver = make_sa_solver(sp);
  }
  return c;
}

struct TimedRun {
  RunResult result;
  double seconds = 0.0;
};

// Annealing runs shared between criteria 7, 8 and 9.
std::map<std::string, TimedRun>& run_cache() {
  static std::map<std::string, TimedRun> cache;
  return cache;
}

const TimedRun& anneal(const std::string& name) {
  auto& cache = run_cache();
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto p = build_benchmark(name);
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_annealing_optimization(p, benchmark_config(name, p, name == "truss6"));
  TimedRun tr{std::move(r), seconds_since(t0)};
  std::fprintf(stderr, "  [%s] f=%.6g vol=%.4f I_N=%zu converged=%d (%.1f s)\n", name.c_str(),
               tr.result.final_objective(), tr.result.final_volume_ratio(), tr.result.iterations,
               int(tr.result.converged), tr.seconds);
  return cache.emplace(name, std::move(tr)).first->second;
}

Verdict criterion1() {
  const double a = tfs(TfsMode::qa, 20e-6, 200, 16), b = tfs(TfsMode::qa, 20e-6, 250, 15);
  const bool ok = std::abs(a - 0.064) <= 1e-15 && std::abs(b - 0.075) <= 1e-15;
  return {ok, fmt("tfs = %.17g, %.17g", a, b)};
}

Verdict criterion2() {
  const std::vector<std::pair<std::string, std::size_t>> expected{
      {"truss6", 7},         {"truss21", 22}, {"truss29", 30},          {"coat_hanger", 51},
      {"cantilever_80x40", 3201}, {"cube_20", 8001}, {"lshape_40x40x5", 6001}};
  std::string detail;
  bool ok = true;
  for (const auto& [name, nq] : expected) {
    const auto n = make_layout(build_benchmark(name).element_count(), 1, 1).size();
    ok = ok && n == nq;
    detail += fmt("%s=%zu ", name.c_str(), n);
  }
  return {ok, detail};
}

Verdict criterion3() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::vector<std::string> names{"truss6", "truss21", "truss29", "coat_hanger"};
  std::vector<Problem> problems;
  for (const auto& n : names) problems.push_back(build_benchmark(n));
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& p = problems[trial % problems.size()];
    const std::size_t n = p.element_count(), nq = 1 + trial % 3, ns = 1 + (trial / 3) % 2;
    DesignState s = init_design(n, 0.5, 1.1);
    std::vector<double> se(n);
    for (std::size_t e = 0; e < n; ++e) {
      s.rho[e] = std::max(kRhoFloor, U(rng));
      if (U(rng) < 0.2) s.theta[e] = 1.0;
      se[e] = 1e3 * U(rng);
    }
    const QuboConfig cfg{100.0 * U(rng), 0.05 * U(rng) + 0.001, U(rng)};
    const auto layout = make_layout(n, nq, ns);
    const auto q = build_qubo(p, s, se, cfg, layout);
    BitAssignment b(layout.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(rng() >> 63);
    const double d = direct_cost(p, s, se, cfg, layout, b);
    worst = std::max(worst, std::abs(evaluate(q, b) - d) / std::max(1.0, std::abs(d)));
  }
  return {worst <= 1e-9, fmt("1000 triples, max scaled deviation %.3g (tol 1e-9)", worst)};
}

Verdict criterion4() {
  const std::vector<std::string> names{"truss6", "truss21", "truss29"};
  std::vector<Problem> problems;
  std::vector<fem::Analysis> first;
  for (const auto& n : names) {
    problems.push_back(build_benchmark(n));
    const auto bp = benchmark_params(n);
    first.push_back(fem::Analyzer(problems.back()).analyze(init_design(problems.back().element_count(), bp.rho0, 1.1).rho));
  }
  int hits = 0;
  bool energies_ok = true;
  for (int k = 0; k < 50; ++k) {
    const std::size_t which = k % names.size();
    const auto& p = problems[which];
    const auto bp = benchmark_params(names[which]);
    std::mt19937_64 rng(1000 + k);
    std::vector<std::size_t> members(p.element_count());
    std::iota(members.begin(), members.end(), 0);
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(std::min<std::size_t>(members.size(), 19));
    std::vector<double> se, theta, vf;
    double share = 0.0;
    for (auto e : members) {
      const double v = p.element_volume(e) / p.initial_volume();
      se.push_back(first[which].strain_energy[e]);
      theta.push_back(bp.theta);
      vf.push_back(bp.rho0 * v);
      share += v;
    }
    const auto layout = make_layout(members.size(), 1, 1);
    const QuboConfig cfg{bp.penalty, bp.theta_slack, p.v_target() * share};
    const auto q = build_qubo(UpdateTerms{se, theta, vf}, cfg, layout);
    SaParams sp;
    sp.seed = static_cast<std::uint64_t>(k);
    const auto sa = solve_sa(q, sp);
    const auto ex = solve_exhaustive(q);
    energies_ok = energies_ok && sa.energy == evaluate(q, sa.bits) && ex.energy == evaluate(q, ex.bits);
    if (sa.energy <= ex.energy + 1e-9 * std::max(1.0, std::abs(ex.energy))) ++hits;
  }
  return {hits >= 48 && energies_ok,
          fmt("sa matched exhaustive on %d/50 (need >= 95%%), energies re-evaluated: %s", hits,
              energies_ok ? "yes" : "no")};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Verdict criterion5() {
  double worst_bar = 0.0, worst_patch = 0.0, worst_energy = 0.0;
  // Bar: u = P L / (E A rho).
  for (double rho : {1.0, 0.35, 1e-3}) {
    TrussModel t;
    t.dimension = 2;
    t.nodes = {{0, 0, 0}, {2.0, 0, 0}};
    t.members = {{0, 1, 0.5}};
    Supports s;
    s.fixed_dofs = {{0, 0}, {0, 1}, {1, 1}};
    LoadCase l;
    l.point_loads = {{1, {1000, 0, 0}}};
    const Problem p(ProblemKind::truss, t, {2e11, 0.3}, l, s, 0.5);
    const auto a = fem::Analyzer(p).analyze(std::vector<double>{rho});
    worst_bar = std::max(worst_bar, rel(a.displacement[2], 1000 * 2.0 / (2e11 * 0.5 * rho)));
  }
  const double E = 2e11, nu = 0.3, sigma = 1e6;
  {
    // Quad patch under uniaxial tension; the exact field is linear.
    GridMesh g;
    g.dimension = 2;
    g.counts = {4, 3, 1};
    g.element_size = {0.5, 0.25, 1.0};
    Supports s;
    for (std::size_t j = 0; j <= 3; ++j) s.fixed_dofs.push_back({g.node_id(0, j), 0});
    for (std::size_t i = 0; i <= 4; ++i) s.fixed_dofs.push_back({g.node_id(i, 0), 1});
    LoadCase l;
    for (std::size_t j = 0; j <= 3; ++j)
      l.point_loads.push_back({g.node_id(4, j), {((j == 0 || j == 3) ? 0.5 : 1.0) * sigma * 0.25, 0, 0}});
    const Problem p(ProblemKind::plane_strain, g, {E, nu}, l, s, 0.5);
    const auto a = fem::Analyzer(p).analyze(std::vector<double>(p.element_count(), 1.0));
    const double ex = sigma * (1 - nu * nu) / E, ey = -sigma * nu * (1 + nu) / E;
    const double scale = ex * 2.0;
    for (std::size_t n = 0; n < p.node_count(); ++n) {
      const auto x = p.node_position(n);
      worst_patch = std::max(worst_patch, std::abs(a.displacement[2 * n] - ex * x[0]) / scale);
      worst_patch = std::max(worst_patch, std::abs(a.displacement[2 * n + 1] - ey * x[1]) / scale);
    }
  }
  {
    GridMesh g;
    g.dimension = 3;
    g.counts = {2, 2, 2};
    g.element_size = {1.0, 0.5, 0.75};
    Supports s;
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const auto c = g.node_coords(n);
      for (int d = 0; d < 3; ++d)
        if (c[d] == 0.0) s.fixed_dofs.push_back({n, d});
    }
    std::vector<double> fx(g.node_count(), 0.0);
    const double face = 0.5 * 0.75 / 4.0;
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t j = 0; j < 2; ++j)
        for (auto [dj, dk] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) fx[g.node_id(2, j + dj, k + dk)] += sigma * face;
    LoadCase l;
    for (std::size_t n = 0; n < fx.size(); ++n)
      if (fx[n] != 0.0) l.point_loads.push_back({n, {fx[n], 0, 0}});
    const Problem p(ProblemKind::solid, g, {E, nu}, l, s, 0.5);
    const auto a = fem::Analyzer(p).analyze(std::vector<double>(p.element_count(), 1.0));
    const double ex = sigma / E, et = -nu * sigma / E, scale = ex * 2.0;
    for (std::size_t n = 0; n < p.node_count(); ++n) {
      const auto x = p.node_position(n);
      worst_patch = std::max(worst_patch, std::abs(a.displacement[3 * n] - ex * x[0]) / scale);
      worst_patch = std::max(worst_patch, std::abs(a.displacement[3 * n + 1] - et * x[1]) / scale);
      worst_patch = std::max(worst_patch, std::abs(a.displacement[3 * n + 2] - et * x[2]) / scale);
    }
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  for (const auto& name : benchmark_names()) {
    const auto p = build_benchmark(name);
    std::vector<double> rho(p.element_count());
    for (auto& r : rho) r = U(rng);
    const auto a = fem::Analyzer(p).analyze(rho);
    const double sum = std::accumulate(a.strain_energy.begin(), a.strain_energy.end(), 0.0);
    worst_energy = std::max(worst_energy, rel(sum, a.compliance));
  }
  const bool ok = worst_bar <= 1e-12 && worst_patch <= 1e-9 && worst_energy <= 1e-8;
  return {ok, fmt("bar rel err %.2g (1e-12), patch err %.2g (1e-9), energy identity %.2g (1e-8)", worst_bar,
                  worst_patch, worst_energy)};
}

Verdict criterion6() {
  const auto& r = anneal("truss6").result;
  bool design = r.final_state.rho.size() == 6;
  for (std::size_t e = 0; design && e < 6; ++e)
    design = (e == 0 || e == 5) ? r.final_state.rho[e] == 1.0 : r.final_state.rho[e] <= kDeletedThreshold;
  const bool ok = r.converged && r.iterations <= 40 && design && r.final_volume_ratio() <= 1.0 + 0.02;
  return {ok, fmt("converged=%d I_N=%zu two-bar design=%d f=%.6g volume=%.4f", int(r.converged), r.iterations,
                  int(design), r.final_objective(), r.final_volume_ratio())};
}

Verdict criterion7() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"truss6", "truss21", "cantilever_80x40"}) {
    const auto p = build_benchmark(name);
    const auto oc = run_oc(p, {}, p.v_target());
    const double fa = anneal(name).result.final_objective(), fo = oc.final_objective();
    const double ratio = fa / fo;
    ok = ok && std::abs(ratio - 1.0) <= 0.15;
    detail += fmt("%s anneal/oc=%.4g/%.4g=%.3f; ", name.c_str(), fa, fo, ratio);
  }
  return {ok, detail + "(tol 15%)"};
}

Verdict criterion8() {
  bool ok = true;
  std::string detail;
  for (const auto& name : benchmark_names()) {
    const auto& r = anneal(name).result;
    const double bound = build_benchmark(name).v_target() + benchmark_params(name).theta_slack + 0.02;
    ok = ok && r.final_volume_ratio() <= bound;
    detail += fmt("%s %.4f<=%.2f; ", name.c_str(), r.final_volume_ratio(), bound);
  }
  return {ok, detail};
}

// Face-connected path of rho > 0.5 cells from the cells around the load node to the bottom layer.
bool cube_connected(const Problem& p, const std::vector<double>& rho) {
  const auto& g = p.grid();
  const std::size_t nx = g.counts[0], ny = g.counts[1], nz = g.counts[2];
  std::vector<char> seen(g.cell_count(), 0);
  std::deque<std::array<std::size_t, 3>> queue;
  for (std::size_t i = nx / 2 - 1; i <= nx / 2; ++i)
    for (std::size_t j = ny / 2 - 1; j <= ny / 2; ++j)
      if (rho[g.cell_id(i, j, nz - 1)] > 0.5) {
        seen[g.cell_id(i, j, nz - 1)] = 1;
        queue.push_back({i, j, nz - 1});
      }
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    if (c[2] == 0) return true;
    for (int d = 0; d < 3; ++d)
      for (int s : {-1, 1}) {
        auto n = c;
        if ((s < 0 && n[d] == 0) || (s > 0 && n[d] + 1 == g.counts[d])) continue;
        n[d] += s;
        const auto id = g.cell_id(n[0], n[1], n[2]);
        if (!seen[id] && rho[id] > 0.5) {
          seen[id] = 1;
          queue.push_back(n);
        }
      }
  }
  return false;
}

Verdict criterion9() {
  const auto& tr = anneal("cube_20");
  const auto p = build_benchmark("cube_20");
  const bool connected = cube_connected(p, tr.result.final_state.rho);
  const bool ok = tr.result.n_qubits == 8001 && tr.seconds <= 1800.0 && tr.result.converged &&
                  tr.result.iterations <= 40 && connected;
  return {ok, fmt("N_q=%zu time=%.1f s (<=1800) converged=%d I_N=%zu connected=%d", tr.result.n_qubits, tr.seconds,
                  int(tr.result.converged), tr.result.iterations, int(connected))};
}

std::string convergence_bytes(const RunResult& r, const fs::path& path) {
  write_convergence_csv(r, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion10() {
  const auto dir = fs::temp_directory_path() / "qato_acceptance";
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (const auto& [name, exhaustive] : {std::pair{"truss6", true}, {"truss21", false}, {"coat_hanger", false}}) {
    const auto p = build_benchmark(name);
    const auto a = convergence_bytes(run_annealing_optimization(p, benchmark_config(name, p, exhaustive, 42)), dir / "a.csv");
    const auto b = convergence_bytes(run_annealing_optimization(p, benchmark_config(name, p, exhaustive, 42)), dir / "b.csv");
    ok = ok && a == b && !a.empty();
    detail += fmt("%s/%s %s; ", name, exhaustive ? "exhaustive" : "sa", a == b ? "identical" : "differ");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"TFS formula", criterion1},          {"qubit counts", criterion2},
      {"QUBO expansion oracle", criterion3}, {"solver oracle agreement", criterion4},
      {"FEM correctness", criterion5},      {"end-to-end truss6", criterion6},
      {"annealing vs OC parity", criterion7}, {"volume constraint", criterion8},
      {"3D scale cube_20", criterion9},     {"determinism", criterion10}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
