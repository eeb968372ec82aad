// qato: command-line front end.
//
//   qato run --problem benchmark:truss6 --solver exhaustive --seed 1 --out r1
//   qato oc --problem problems/truss6.json --v-target 0.35 --out r2
//   qato export-qubo --problem benchmark:truss21 --iteration 0 --out q.json
//   qato bench --suite truss --seeds 5 --out bench
//   qato write-benchmarks --out problems

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qato/benchmarks.hpp"
#include "qato/driver.hpp"
#include "qato/io.hpp"
#include "qato/oc.hpp"
#include "qato/problem_io.hpp"
#include "qato/remote.hpp"
#include "qato/validate.hpp"

namespace fs = std::filesystem;
using namespace qato;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoadedProblem {
  std::string name;
  Problem problem;
  std::optional<BenchmarkParams> params;
};

LoadedProblem load(const std::string& source) {
  const std::string prefix = "benchmark:";
  if (source.rfind(prefix, 0) == 0) {
    const auto name = source.substr(prefix.size());
    Problem p = [&] {
      try {
        return build_benchmark(name);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }();
    auto v = validate(p);
    if (!v.empty()) throw ValidationError(std::move(v));
    return {name, std::move(p), benchmark_params(name)};
  }
  return {fs::path(source).stem().string(), load_problem(source), std::nullopt};
}

struct RunOptions {
  std::string problem;
  std::string solver = "sa";
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> lambda, theta, theta_s, rho0, v_target;
  std::size_t nq = 1, ns = 1;
  std::size_t max_iter = 200;
  std::size_t sweeps = 2000, restarts = 10;
  std::string endpoint;
  double timeout = 60.0;
  bool log_timing = false;
};

RunConfig make_config(const LoadedProblem& lp, const RunOptions& o) {
  RunConfig c;
  const BenchmarkParams bp = lp.params.value_or(make_benchmark_params(lp.problem.v_target(), 1.1, 0.02, 5.0));
  c.penalty = o.lambda.value_or(bp.penalty);
  c.theta = o.theta.value_or(bp.theta);
  c.theta_slack = o.theta_s.value_or(bp.theta_slack);
  c.rho0 = o.rho0.value_or(bp.rho0);
  c.v_target = o.v_target.value_or(lp.problem.v_target());
  c.n_q = o.nq;
  c.n_s = o.ns;
  c.max_iterations = o.max_iter;
  if (o.solver == "sa") {
    SaParams sp;
    sp.seed = o.seed;
    sp.sweeps = o.sweeps;
    sp.restarts = o.restarts;
    sp.validate();
    c.solver = make_sa_solver(sp);
  } else if (o.solver == "exhaustive") {
    c.solver = make_exhaustive_solver();
  } else if (o.solver == "remote") {
    if (o.endpoint.empty()) throw UsageError("--solver remote requires --endpoint");
    c.solver = make_remote_solver(o.endpoint, o.timeout);
  } else {
    throw UsageError("unknown solver '" + o.solver + "' (expected sa, exhaustive or remote)");
  }
  if (o.solver == "exhaustive" && lp.problem.element_count() * o.nq + o.ns > ExhaustiveParams{}.max_qubits)
    throw UsageError("exhaustive solver is limited to " + std::to_string(ExhaustiveParams{}.max_qubits) + " qubits");
  c.validate();
  return c;
}

IterationObserver snapshot_writer(const Problem& p, const fs::path& dir, std::size_t& last_written) {
  return [&p, dir, &last_written](const IterationRecord& rec, const DesignState& s) {
    if (snapshot_due(p.element_count(), rec.iteration, false)) {
      write_snapshot(p, s.rho, dir, rec.iteration);
      last_written = rec.iteration;
    }
    std::fprintf(stderr, "iter %zu  f=%.6g  vol=%.4f\n", rec.iteration, rec.objective, rec.volume_ratio);
  };
}

void write_bundle(const LoadedProblem& lp, const RunResult& r, const fs::path& out, bool log_timing,
                  const nlohmann::json& extra, std::size_t last_written) {
  fs::create_directories(out / "snapshots");
  write_convergence_csv(r, out / "convergence.csv", log_timing);
  write_timing_csv(r, out / "timing.csv");
  write_summary(r, lp.name, out / "summary.json", extra);
  save_problem(lp.problem, (out / "problem.json").string());
  if (last_written != r.iterations) write_snapshot(lp.problem, r.final_state.rho, out / "snapshots", r.iterations);
}

int cmd_run(const RunOptions& o) {
  auto lp = load(o.problem);
  const auto cfg = make_config(lp, o);
  const fs::path out = o.out.empty() ? fs::path("run_" + lp.name) : fs::path(o.out);
  fs::create_directories(out / "snapshots");
  std::size_t last_written = static_cast<std::size_t>(-1);
  write_snapshot(lp.problem, init_design(lp.problem.element_count(), cfg.rho0, cfg.theta).rho, out / "snapshots", 0);
  nlohmann::json extra = {{"solver", o.solver},         {"seed", o.seed},          {"lambda", cfg.penalty},
                          {"theta", cfg.theta},         {"theta_s", cfg.theta_slack}, {"rho0", cfg.rho0},
                          {"v_target", cfg.v_target},   {"n_q", cfg.n_q},          {"n_s", cfg.n_s}};
  try {
    auto r = run_annealing_optimization(lp.problem, cfg, snapshot_writer(lp.problem, out / "snapshots", last_written));
    write_bundle(lp, r, out, o.log_timing, extra, last_written);
    std::printf("%s: f=%.10g volume_ratio=%.6f I_N=%zu converged=%s N_q=%zu TFS=%.6g s\n", lp.name.c_str(),
                r.final_objective(), r.final_volume_ratio(), r.iterations, r.converged ? "true" : "false",
                r.n_qubits, r.tfs);
  } catch (const RunError& e) {
    extra["error"] = e.what();
    write_bundle(lp, e.partial(), out, o.log_timing, extra, last_written);
    throw;
  }
  return 0;
}

int cmd_oc(const std::string& problem, double v_target, const std::string& out_dir, std::size_t max_iter) {
  auto lp = load(problem);
  if (!(v_target > 0.0 && v_target <= 1.0)) throw UsageError("--v-target must lie in (0, 1]");
  OcParams params;
  params.max_iterations = max_iter;
  const fs::path out = out_dir.empty() ? fs::path("oc_" + lp.name) : fs::path(out_dir);
  fs::create_directories(out / "snapshots");
  std::size_t last_written = static_cast<std::size_t>(-1);
  nlohmann::json extra = {{"v_target", v_target}, {"move_limit", params.move_limit}, {"damping", params.damping}};
  try {
    auto r = run_oc(lp.problem, params, v_target, snapshot_writer(lp.problem, out / "snapshots", last_written));
    write_bundle(lp, r, out, false, extra, last_written);
    std::printf("%s (oc): f=%.10g volume_ratio=%.6f I_N=%zu converged=%s\n", lp.name.c_str(), r.final_objective(),
                r.final_volume_ratio(), r.iterations, r.converged ? "true" : "false");
  } catch (const RunError& e) {
    extra["error"] = e.what();
    write_bundle(lp, e.partial(), out, false, extra, last_written);
    throw;
  }
  return 0;
}

int cmd_export(const RunOptions& o, std::size_t iteration) {
  if (o.out.empty()) throw UsageError("export-qubo requires --out");
  auto lp = load(o.problem);
  auto cfg = make_config(lp, o);
  const auto layout = make_layout(lp.problem.element_count(), cfg.n_q, cfg.n_s);
  DesignState state = init_design(lp.problem.element_count(), cfg.rho0, cfg.theta);
  fem::Analyzer analyzer(lp.problem);
  auto analysis = analyzer.analyze(state.rho);
  const QuboConfig qcfg{cfg.penalty, cfg.theta_slack, cfg.v_target};
  for (std::size_t it = 0; it < iteration; ++it) {
    auto outcome = cfg.solver(build_qubo(lp.problem, state, analysis.strain_energy, qcfg, layout));
    state = apply_update(std::move(state), decode_alphas(outcome.bits, layout, state));
    analysis = analyzer.analyze(state.rho);
  }
  const auto qubo = build_qubo(lp.problem, state, analysis.strain_energy, qcfg, layout);
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + o.out + "'");
  write_qubo_exchange(qubo, out);
  std::printf("%s: wrote QUBO with n = %zu to %s\n", lp.name.c_str(), qubo.size(), o.out.c_str());
  return 0;
}

struct BenchRow {
  std::string benchmark, method;
  std::vector<double> f;
  double volume = 0.0, iterations = 0.0, tfs = 0.0;
  std::size_t ok = 0;
  std::string error;
};

int cmd_bench(const std::string& suite, std::size_t seeds, const std::string& out_dir, std::size_t max_iter) {
  std::vector<std::string> names;
  if (suite == "truss") names = {"truss6", "truss21", "truss29"};
  else if (suite == "continuum") names = {"coat_hanger", "cantilever_80x40", "cube_20", "lshape_40x40x5"};
  else throw UsageError("unknown suite '" + suite + "' (expected truss or continuum)");
  if (seeds < 1) throw UsageError("--seeds must be >= 1");

  std::vector<BenchRow> rows;
  for (const auto& name : names) {
    const auto lp = load("benchmark:" + name);
    BenchRow sa{name, "sa", {}, 0, 0, 0, 0, {}};
    for (std::size_t k = 0; k < seeds; ++k) {
      RunOptions o;
      o.seed = k + 1;
      o.max_iter = max_iter;
      try {
        auto r = run_annealing_optimization(lp.problem, make_config(lp, o));
        sa.f.push_back(r.final_objective());
        sa.volume += r.final_volume_ratio();
        sa.iterations += static_cast<double>(r.iterations);
        sa.tfs += r.tfs;
        ++sa.ok;
      } catch (const std::exception& e) {
        sa.error = e.what();
      }
    }
    rows.push_back(sa);
    BenchRow oc{name, "oc", {}, 0, 0, 0, 0, {}};
    try {
      OcParams params;
      params.max_iterations = max_iter;
      auto r = run_oc(lp.problem, params, lp.problem.v_target());
      oc.f.push_back(r.final_objective());
      oc.volume = r.final_volume_ratio();
      oc.iterations = static_cast<double>(r.iterations);
      oc.tfs = r.tfs;
      oc.ok = 1;
    } catch (const std::exception& e) {
      oc.error = e.what();
    }
    rows.push_back(oc);
  }

  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-6s %14s %14s %8s %8s %12s\n", "benchmark", "method", "mean_f_obj",
                "best_f_obj", "volume", "I_N", "TFS_s");
  table << line;
  bool any_ok = false;
  for (const auto& r : rows) {
    if (r.ok == 0) {
      std::snprintf(line, sizeof line, "%-18s %-6s failed: %s\n", r.benchmark.c_str(), r.method.c_str(),
                    r.error.c_str());
      table << line;
      continue;
    }
    any_ok = true;
    const double n = static_cast<double>(r.ok);
    double mean = 0.0, best = r.f.front();
    for (double f : r.f) {
      mean += f / n;
      best = std::min(best, f);
    }
    std::snprintf(line, sizeof line, "%-18s %-6s %14.6g %14.6g %8.4f %8.1f %12.6g\n", r.benchmark.c_str(),
                  r.method.c_str(), mean, best, r.volume / n, r.iterations / n, r.tfs / n);
    table << line;
  }
  std::cout << table.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / ("bench_" + suite + ".txt")) << table.str();
  }
  return any_ok ? 0 : kExitFailure;
}

int cmd_write_benchmarks(const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& name : benchmark_names()) {
    const auto path = fs::path(out_dir) / (name + ".json");
    save_problem(build_benchmark(name), path.string());
    std::printf("%s\n", path.string().c_str());
  }
  return 0;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--problem", o.problem, "problem file or benchmark:<name>")->required();
  cmd->add_option("--solver", o.solver, "sa, exhaustive or remote");
  cmd->add_option("--seed", o.seed, "rng seed for the sa solver");
  cmd->add_option("--out", o.out, "output location");
  cmd->add_option("--lambda", o.lambda, "penalty constant");
  cmd->add_option("--theta", o.theta, "maximum updater value");
  cmd->add_option("--theta-s", o.theta_s, "slack scale");
  cmd->add_option("--rho0", o.rho0, "initial density");
  cmd->add_option("--v-target", o.v_target, "volume target relative to the full-material volume");
  cmd->add_option("--nq", o.nq, "qubits per element")->check(CLI::PositiveNumber);
  cmd->add_option("--ns", o.ns, "slack qubits")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "iteration cap");
  cmd->add_option("--sweeps", o.sweeps, "sa sweeps per restart");
  cmd->add_option("--restarts", o.restarts, "sa restarts");
  cmd->add_option("--endpoint", o.endpoint, "remote solver URL");
  cmd->add_option("--timeout", o.timeout, "remote solver timeout (s)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annealing-based topology optimization"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run the annealing-based optimization");
  add_run_options(run, run_opts);
  run->add_flag("--log-timing", run_opts.log_timing, "write measured solver times into convergence.csv");

  std::string oc_problem, oc_out;
  double oc_v_target = 0.0;
  std::size_t oc_max_iter = 200;
  auto* oc = app.add_subcommand("oc", "run the optimality-criteria baseline");
  oc->add_option("--problem", oc_problem, "problem file or benchmark:<name>")->required();
  oc->add_option("--v-target", oc_v_target, "volume target")->required();
  oc->add_option("--out", oc_out, "output directory");
  oc->add_option("--max-iter", oc_max_iter, "iteration cap");

  RunOptions export_opts;
  std::size_t export_iteration = 0;
  auto* exp = app.add_subcommand("export-qubo", "write one design-update QUBO in the exchange format");
  add_run_options(exp, export_opts);
  exp->add_option("--iteration", export_iteration, "number of updates applied before export");

  std::string suite, bench_out;
  std::size_t seeds = 1, bench_max_iter = 200;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite with sa and oc");
  bench->add_option("--suite", suite, "truss or continuum")->required();
  bench->add_option("--seeds", seeds, "sa seeds per benchmark");
  bench->add_option("--out", bench_out, "directory for the table");
  bench->add_option("--max-iter", bench_max_iter, "iteration cap");

  std::string wb_out = "problems";
  auto* wb = app.add_subcommand("write-benchmarks", "write the benchmark problems as JSON files");
  wb->add_option("--out", wb_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*oc) return cmd_oc(oc_problem, oc_v_target, oc_out, oc_max_iter);
    if (*exp) return cmd_export(export_opts, export_iteration);
    if (*bench) return cmd_bench(suite, seeds, bench_out, bench_max_iter);
    if (*wb) return cmd_write_benchmarks(wb_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid problem:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RunError& e) {
    std::cerr << (e.fem_failure() ? "analysis failed: " : "solver failed: ") << e.what() << " (after "
              << e.partial().iterations << " iterations)\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
