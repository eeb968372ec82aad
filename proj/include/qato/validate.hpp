#pragma once

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qato/fem.hpp"
#include "qato/model.hpp"

namespace qato {

/// Every invariant violation of `p`; empty means valid.
inline std::vector<std::string> validate(const Problem& p) {
  std::vector<std::string> out;
  auto add = [&](const std::string& s) { out.push_back(s); };

  const auto& m = p.material();
  if (!(m.youngs_modulus > 0.0)) add("material: youngs_modulus > 0 violated");
  if (!(m.poisson_ratio >= 0.0 && m.poisson_ratio < 0.5)) add("material: 0 <= poisson_ratio < 0.5 violated");
  if (!(p.v_target() > 0.0 && p.v_target() <= 1.0)) add("v_target: 0 < v_target <= 1 violated");

  const int dim = p.dimension();
  bool geometry_ok = true;
  if (p.is_truss()) {
    const auto& t = p.truss();
    if (p.kind() != ProblemKind::truss) add("kind does not match geometry (truss geometry)");
    if (t.dimension != 2 && t.dimension != 3) {
      add("truss: dimension must be 2 or 3");
      geometry_ok = false;
    }
    if (t.members.empty()) {
      add("truss: at least one member required");
      geometry_ok = false;
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t e = 0; e < t.members.size(); ++e) {
      const auto& mb = t.members[e];
      if (mb.node_a >= t.nodes.size() || mb.node_b >= t.nodes.size()) {
        add("member " + std::to_string(e) + ": unknown node");
        geometry_ok = false;
        continue;
      }
      if (!(p.member_length(e) > 0.0)) {
        add("member " + std::to_string(e) + ": L_e > 0 violated");
        geometry_ok = false;
      }
      if (!(mb.area > 0.0)) {
        add("member " + std::to_string(e) + ": area > 0 violated");
        geometry_ok = false;
      }
      const auto key = std::minmax(mb.node_a, mb.node_b);
      if (!seen.insert(key).second) add("member " + std::to_string(e) + ": duplicate member");
    }
  } else {
    const auto& g = p.grid();
    const bool kind_ok = (g.dimension == 2 && p.kind() == ProblemKind::plane_strain) ||
                         (g.dimension == 3 && p.kind() == ProblemKind::solid);
    if (!kind_ok) add("kind does not match geometry (grid dimension " + std::to_string(g.dimension) + ")");
    for (int a = 0; a < g.dimension; ++a) {
      if (g.counts[static_cast<std::size_t>(a)] < 1) {
        add("grid: counts >= 1 per axis violated");
        geometry_ok = false;
      }
      if (!(g.element_size[static_cast<std::size_t>(a)] > 0.0)) {
        add("grid: element size > 0 violated");
        geometry_ok = false;
      }
    }
    if (!g.active.empty() && g.active.size() != g.cell_count()) {
      add("grid: active mask size mismatch");
      geometry_ok = false;
    }
    if (p.element_count() == 0) {
      add("grid: at least one active cell required");
      geometry_ok = false;
    }
  }

  const std::size_t n_nodes = p.node_count();
  for (const auto& load : p.loads().point_loads) {
    if (load.node >= n_nodes) {
      add("load on node " + std::to_string(load.node) + ": unknown node");
      geometry_ok = false;
      continue;
    }
    if (!p.node_in_use(load.node)) add("load on node " + std::to_string(load.node) + ": inactive cells carry no load");
    for (int a = 0; a < 3; ++a) {
      if (a >= dim && load.force[static_cast<std::size_t>(a)] != 0.0)
        add("load on node " + std::to_string(load.node) + ": force component beyond problem dimension");
      if (!std::isfinite(load.force[static_cast<std::size_t>(a)]))
        add("load on node " + std::to_string(load.node) + ": non-finite force");
    }
    for (const auto& f : p.supports().fixed_dofs)
      if (f.node == load.node && f.axis < dim && load.force[static_cast<std::size_t>(f.axis)] != 0.0)
        add("load on node " + std::to_string(load.node) + ": node fixed in the load direction");
  }

  if (p.supports().fixed_dofs.empty()) add("supports: nonempty violated (rigid-body modes)");
  for (const auto& f : p.supports().fixed_dofs) {
    if (f.node >= n_nodes) {
      add("support on node " + std::to_string(f.node) + ": unknown node");
      geometry_ok = false;
    } else if (!p.node_in_use(f.node)) {
      add("support on node " + std::to_string(f.node) + ": inactive cells carry no support");
    }
    if (f.axis < 0 || f.axis >= dim) {
      add("support on node " + std::to_string(f.node) + ": axis out of range");
      geometry_ok = false;
    }
  }

  // Rigid-body / mechanism check: full-material stiffness must be SPD.
  if (geometry_ok && out.empty()) {
    try {
      const std::vector<double> ones(p.element_count(), 1.0);
      auto sys = fem::assemble(p, ones);
      sys.load = Eigen::VectorXd::Ones(sys.stiffness.rows());
      fem::solve_displacements(sys, dim);
    } catch (const FemError& e) {
      add(std::string("supports: structure has rigid-body modes or mechanisms (") + e.what() + ")");
    }
  }
  return out;
}

}  // namespace qato
