#pragma once

// Canned benchmark problems. Truss geometries are ground structures on a
// unit grid (member lengths 1 and sqrt(2)); loads and boundary conditions
// follow the usual conventions for each benchmark family. Volume targets are
// given relative to the full-material volume, so "keep the initial design
// volume" becomes v_target = rho0.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qato/model.hpp"

namespace qato {

/// Run parameters used with each benchmark. `penalty` is the constant for
/// volume fractions measured against the full-material volume; it equals
/// `reference_penalty / rho0^2`, where `reference_penalty` is quoted for
/// fractions of the initial design volume rho0 * V0.
struct BenchmarkParams {
  double rho0 = 0.5;
  double theta = 1.1;
  double theta_slack = 0.02;
  double reference_penalty = 5.0;
  double penalty = 20.0;
};

inline BenchmarkParams make_benchmark_params(double rho0, double theta, double theta_slack, double reference_penalty) {
  return {rho0, theta, theta_slack, reference_penalty, reference_penalty / (rho0 * rho0)};
}

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"truss6",           "truss21", "truss29",       "coat_hanger",
                                              "cantilever_80x40", "cube_20", "lshape_40x40x5"};
  return names;
}

namespace detail {

inline constexpr double kSteelE = 2e11;
inline constexpr double kSteelNu = 0.3;
inline constexpr double kTrussArea = 0.5;

// nx x ny node grid with unit spacing: horizontals, verticals and both
// diagonals of every cell. Node (i, j) has id j*nx + i.
inline TrussModel ground_structure(std::size_t nx, std::size_t ny) {
  TrussModel t;
  t.dimension = 2;
  auto id = [nx](std::size_t i, std::size_t j) { return j * nx + i; };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) t.nodes.push_back({double(i), double(j), 0.0});
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) t.members.push_back({id(i, j), id(i + 1, j), kTrussArea});
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) t.members.push_back({id(i, j), id(i, j + 1), kTrussArea});
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      t.members.push_back({id(i, j), id(i + 1, j + 1), kTrussArea});
      t.members.push_back({id(i + 1, j), id(i, j + 1), kTrussArea});
    }
  }
  return t;
}

inline void fix_node(Supports& s, std::size_t node, int dim) {
  for (int a = 0; a < dim; ++a) s.fixed_dofs.push_back({node, a});
}

// Left column of nodes clamped, one point load.
inline Problem truss_cantilever(std::size_t nx, std::size_t ny, std::size_t load_j, double load, double v_target) {
  auto t = ground_structure(nx, ny);
  Supports s;
  for (std::size_t j = 0; j < ny; ++j) fix_node(s, j * nx, 2);
  LoadCase l;
  l.point_loads.push_back({load_j * nx + (nx - 1), {0.0, -load, 0.0}});
  return Problem(ProblemKind::truss, std::move(t), {kSteelE, kSteelNu}, std::move(l), std::move(s), v_target);
}

inline Problem truss6() {
  // 1 x 1 cell with both diagonals; the left nodes are pinned and the
  // lower-right node carries the load.
  return truss_cantilever(2, 2, 0, 1e5, 0.35);
}

inline Problem truss21() { return truss_cantilever(5, 2, 0, 1e5, 0.5); }

inline Problem truss29() { return truss_cantilever(4, 3, 1, 1e5, 0.4); }

inline Problem coat_hanger() {
  // 10 x 5 plane-strain plate hung from three nodes at the middle of the
  // top edge, loaded downwards at both lower corners.
  GridMesh g;
  g.dimension = 2;
  g.counts = {10, 5, 1};
  g.element_size = {1.0, 1.0, 1.0};
  Supports s;
  for (std::size_t i = 4; i <= 6; ++i) fix_node(s, g.node_id(i, 5), 2);
  LoadCase l;
  const double p = 1.9e6;
  l.point_loads.push_back({g.node_id(0, 0), {0.0, -p, 0.0}});
  l.point_loads.push_back({g.node_id(10, 0), {0.0, -p, 0.0}});
  return Problem(ProblemKind::plane_strain, g, {kSteelE, kSteelNu}, std::move(l), std::move(s), 0.6);
}

inline Problem cantilever_80x40() {
  GridMesh g;
  g.dimension = 2;
  g.counts = {80, 40, 1};
  g.element_size = {1.0, 1.0, 1.0};
  Supports s;
  for (std::size_t j = 0; j <= 40; ++j) fix_node(s, g.node_id(0, j), 2);
  LoadCase l;
  l.point_loads.push_back({g.node_id(80, 20), {0.0, -5e6, 0.0}});
  return Problem(ProblemKind::plane_strain, g, {kSteelE, kSteelNu}, std::move(l), std::move(s), 0.6);
}

inline Problem cube_20() {
  // 10 m cube of 0.5 m hexahedra; bottom face clamped, upward pull at the
  // centre of the top face.
  GridMesh g;
  g.dimension = 3;
  g.counts = {20, 20, 20};
  g.element_size = {0.5, 0.5, 0.5};
  Supports s;
  for (std::size_t j = 0; j <= 20; ++j)
    for (std::size_t i = 0; i <= 20; ++i) fix_node(s, g.node_id(i, j, 0), 3);
  LoadCase l;
  l.point_loads.push_back({g.node_id(10, 10, 20), {0.0, 0.0, 7e6}});
  return Problem(ProblemKind::solid, g, {kSteelE, kSteelNu}, std::move(l), std::move(s), 0.25);
}

inline Problem lshape_40x40x5() {
  // 80 m x 80 m L-bracket in the x-z plane, 10 m thick along y, 2 m cells.
  // The quadrant x > 40, z > 40 is void. Clamped at z = 80; downward line
  // load along y at (x = 80, z = 40).
  GridMesh g;
  g.dimension = 3;
  g.counts = {40, 5, 40};
  g.element_size = {2.0, 2.0, 2.0};
  g.active.assign(g.cell_count(), true);
  for (std::size_t k = 20; k < 40; ++k)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t i = 20; i < 40; ++i) g.active[g.cell_id(i, j, k)] = false;
  Supports s;
  for (std::size_t j = 0; j <= 5; ++j)
    for (std::size_t i = 0; i <= 20; ++i) fix_node(s, g.node_id(i, j, 40), 3);
  LoadCase l;
  const double total = 3.11e7;
  for (std::size_t j = 0; j <= 5; ++j) l.point_loads.push_back({g.node_id(40, j, 20), {0.0, 0.0, -total / 6.0}});
  return Problem(ProblemKind::solid, g, {kSteelE, kSteelNu}, std::move(l), std::move(s), 0.5);
}

}  // namespace detail

inline Problem build_benchmark(std::string_view name) {
  if (name == "truss6") return detail::truss6();
  if (name == "truss21") return detail::truss21();
  if (name == "truss29") return detail::truss29();
  if (name == "coat_hanger") return detail::coat_hanger();
  if (name == "cantilever_80x40") return detail::cantilever_80x40();
  if (name == "cube_20") return detail::cube_20();
  if (name == "lshape_40x40x5") return detail::lshape_40x40x5();
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

inline BenchmarkParams benchmark_params(std::string_view name) {
  if (name == "truss6") return make_benchmark_params(0.35, 1.1, 0.02, 5.0);
  if (name == "truss21") return make_benchmark_params(0.5, 1.1, 0.02, 5.0);
  if (name == "truss29") return make_benchmark_params(0.4, 1.1, 0.02, 5.0);
  if (name == "coat_hanger") return make_benchmark_params(0.6, 1.05, 0.02, 500.0);
  if (name == "cantilever_80x40") return make_benchmark_params(0.6, 1.1, 0.02, 8e3);
  if (name == "cube_20") return make_benchmark_params(0.25, 1.1, 0.02, 1e3);
  if (name == "lshape_40x40x5") return make_benchmark_params(0.5, 1.1, 0.02, 1e5);
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

}  // namespace qato
