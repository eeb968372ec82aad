#pragma once

// Run outputs: convergence log, run summary, topology snapshots.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qato/driver.hpp"
#include "qato/model.hpp"

namespace qato {

inline constexpr const char* kConvergenceHeader = "iter,objective,volume_ratio,energy,solver_time_s,n_cap,n_floor";

namespace detail {

inline std::string num17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

/// One row per iteration. Solver times vary between runs, so they are only
/// written when `with_timing` is set; otherwise the column holds "nan".
inline void write_convergence_csv(const RunResult& r, const std::filesystem::path& path, bool with_timing = false) {
  auto out = detail::open_out(path);
  out << kConvergenceHeader << '\n';
  for (const auto& h : r.history) {
    out << h.iteration << ',' << detail::num17(h.objective) << ',' << detail::num17(h.volume_ratio) << ','
        << detail::num17(h.energy) << ',' << (with_timing ? detail::num17(h.solver_seconds) : std::string("nan"))
        << ',' << h.n_cap << ',' << h.n_floor << '\n';
  }
}

inline void write_timing_csv(const RunResult& r, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "iter,solver_time_s\n";
  for (const auto& h : r.history) out << h.iteration << ',' << detail::num17(h.solver_seconds) << '\n';
}

struct ConvergenceRow {
  std::size_t iteration;
  double objective, volume_ratio, energy, solver_seconds;
  std::size_t n_cap, n_floor;
};

inline std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != kConvergenceHeader) throw std::runtime_error("unexpected convergence header: " + line);
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[7];
    for (auto& s : f) std::getline(ss, s, ',');
    rows.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                    std::stoul(f[5]), std::stoul(f[6])});
  }
  return rows;
}

inline nlohmann::json summary_json(const RunResult& r, const std::string& problem_name) {
  nlohmann::json j;
  j["problem"] = problem_name;
  j["method"] = r.method;
  j["final_objective"] = r.final_objective();
  j["final_volume_ratio"] = r.final_volume_ratio();
  j["initial_objective"] = r.initial_objective;
  j["I_N"] = r.iterations;
  j["TFS_s"] = r.tfs;
  j["converged"] = r.converged;
  j["N_q"] = r.n_qubits;
  j["N_elem"] = r.final_state.size();
  return j;
}

inline void write_summary(const RunResult& r, const std::string& problem_name, const std::filesystem::path& path,
                          const nlohmann::json& extra = nlohmann::json::object()) {
  auto j = summary_json(r, problem_name);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

/// Legacy ASCII VTK unstructured grid of the active cells, CELL_DATA `rho`.
inline void write_vtk(const Problem& p, std::span<const double> rho, const std::filesystem::path& path) {
  if (p.is_truss()) throw std::invalid_argument("write_vtk: continuum problems only");
  if (rho.size() != p.element_count()) throw std::invalid_argument("write_vtk: rho size mismatch");
  const auto& g = p.grid();
  const std::size_t n_nodes = g.node_count();
  const std::size_t npe = g.dimension == 2 ? 4 : 8;
  auto out = detail::open_out(path);
  out << "# vtk DataFile Version 3.0\ndensity\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n_nodes << " double\n";
  for (std::size_t n = 0; n < n_nodes; ++n) {
    const auto x = p.node_position(n);
    out << detail::num17(x[0]) << ' ' << detail::num17(x[1]) << ' ' << detail::num17(x[2]) << '\n';
  }
  const std::size_t n_cells = p.element_count();
  out << "CELLS " << n_cells << ' ' << n_cells * (npe + 1) << '\n';
  for (std::size_t e = 0; e < n_cells; ++e) {
    out << npe;
    for (auto n : p.element_nodes(e)) out << ' ' << n;
    out << '\n';
  }
  out << "CELL_TYPES " << n_cells << '\n';
  for (std::size_t e = 0; e < n_cells; ++e) out << (npe == 4 ? 9 : 12) << '\n';
  out << "CELL_DATA " << n_cells << "\nSCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (double r : rho) out << detail::num17(r) << '\n';
}

inline std::vector<double> read_vtk_rho(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string tok;
  std::size_t n = 0;
  while (in >> tok) {
    if (tok == "CELL_DATA") {
      in >> n;
      break;
    }
  }
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("LOOKUP_TABLE", 0) == 0) break;
  std::vector<double> rho(n);
  for (auto& r : rho) {
    if (!(in >> tok)) throw std::runtime_error("truncated VTK cell data in '" + path.string() + "'");
    r = std::stod(tok);
  }
  return rho;
}

/// Truss design: one line per member, "index node_a node_b length rho".
inline void write_truss_design(const Problem& p, std::span<const double> rho, const std::filesystem::path& path) {
  if (!p.is_truss()) throw std::invalid_argument("write_truss_design: truss problems only");
  if (rho.size() != p.element_count()) throw std::invalid_argument("write_truss_design: rho size mismatch");
  auto out = detail::open_out(path);
  out << "# member node_a node_b length rho\n";
  const auto& t = p.truss();
  for (std::size_t e = 0; e < rho.size(); ++e)
    out << e << ' ' << t.members[e].node_a << ' ' << t.members[e].node_b << ' ' << detail::num17(p.member_length(e))
        << ' ' << detail::num17(rho[e]) << '\n';
}

inline std::vector<double> read_truss_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::vector<double> rho;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::size_t e, a, b;
    std::string len, r;
    if (!(ss >> e >> a >> b >> len >> r)) throw std::runtime_error("malformed truss design line: " + line);
    rho.push_back(std::stod(r));
  }
  return rho;
}

/// True when iteration `it` (1-based, `last` = final) gets a snapshot.
inline bool snapshot_due(std::size_t n_elem, std::size_t it, bool last) {
  return n_elem <= 100 || last || it % 5 == 0;
}

/// Writes the snapshot for iteration `it` into `dir` (design_XXXX.txt or rho_XXXX.vtk).
inline std::filesystem::path write_snapshot(const Problem& p, std::span<const double> rho,
                                            const std::filesystem::path& dir, std::size_t it) {
  char name[32];
  std::snprintf(name, sizeof name, p.is_truss() ? "design_%04zu.txt" : "rho_%04zu.vtk", it);
  const auto path = dir / name;
  if (p.is_truss()) write_truss_design(p, rho, path);
  else write_vtk(p, rho, path);
  return path;
}

}  // namespace qato
