#pragma once

// Problem definitions: truss and structured-grid continuum models, material,
// supports and point loads. A Problem is immutable once constructed; derived
// quantities (member lengths, element volumes, V0) are computed up front.

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qato {

inline constexpr double kRhoFloor = 1e-6;    // lower bound on design variables
inline constexpr double kAlphaFloor = 1e-6;  // lower bound on decoded updaters

enum class ProblemKind { truss, plane_strain, solid };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::truss: return "truss";
    case ProblemKind::plane_strain: return "plane_strain";
    case ProblemKind::solid: return "solid";
  }
  return "?";
}

inline ProblemKind parse_kind(std::string_view s) {
  if (s == "truss") return ProblemKind::truss;
  if (s == "plane_strain") return ProblemKind::plane_strain;
  if (s == "solid") return ProblemKind::solid;
  throw std::invalid_argument("unknown problem kind '" + std::string(s) + "'");
}

struct MaterialParams {
  double youngs_modulus = 2e11;  // N/m^2
  double poisson_ratio = 0.3;
};

struct TrussMember {
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  double area = 0.5;  // initial cross-section A0, m^2
};

struct TrussModel {
  int dimension = 2;
  std::vector<std::array<double, 3>> nodes;  // unused trailing coordinates are 0
  std::vector<TrussMember> members;
};

/// Structured grid of unit-shaped cells. Cell (i,j,k) and node (i,j,k) are
/// numbered x-fastest. For dimension 2 the third count is 1 and node k is 0.
struct GridMesh {
  int dimension = 2;
  std::array<std::size_t, 3> counts{1, 1, 1};
  std::array<double, 3> element_size{1.0, 1.0, 1.0};
  std::vector<bool> active;  // per cell; empty means all active

  std::size_t cell_count() const { return counts[0] * counts[1] * (dimension == 3 ? counts[2] : 1); }
  std::size_t nodes_per_axis(int axis) const {
    if (axis == 2 && dimension == 2) return 1;
    return counts[static_cast<std::size_t>(axis)] + 1;
  }
  std::size_t node_count() const { return nodes_per_axis(0) * nodes_per_axis(1) * nodes_per_axis(2); }
  std::size_t node_id(std::size_t i, std::size_t j, std::size_t k = 0) const {
    return i + nodes_per_axis(0) * (j + nodes_per_axis(1) * k);
  }
  std::size_t cell_id(std::size_t i, std::size_t j, std::size_t k = 0) const {
    return i + counts[0] * (j + counts[1] * k);
  }
  std::array<std::size_t, 3> cell_coords(std::size_t c) const {
    return {c % counts[0], (c / counts[0]) % counts[1], c / (counts[0] * counts[1])};
  }
  std::array<std::size_t, 3> node_coords(std::size_t n) const {
    const auto nx = nodes_per_axis(0), ny = nodes_per_axis(1);
    return {n % nx, (n / nx) % ny, n / (nx * ny)};
  }
  bool is_active(std::size_t c) const { return active.empty() || active[c]; }
  double cell_volume() const {
    double v = element_size[0] * element_size[1];
    return dimension == 3 ? v * element_size[2] : v;  // unit thickness in 2D
  }

  /// Corner nodes of a cell: counter-clockwise in 2D; VTK hexahedron order in 3D.
  std::vector<std::size_t> cell_nodes(std::size_t c) const {
    const auto [i, j, k] = cell_coords(c);
    if (dimension == 2) {
      return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
    }
    return {node_id(i, j, k),         node_id(i + 1, j, k),         node_id(i + 1, j + 1, k),
            node_id(i, j + 1, k),     node_id(i, j, k + 1),         node_id(i + 1, j, k + 1),
            node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)};
  }
};

struct PointLoad {
  std::size_t node = 0;
  std::array<double, 3> force{0.0, 0.0, 0.0};  // N
};

struct LoadCase {
  std::vector<PointLoad> point_loads;
};

struct FixedDof {
  std::size_t node = 0;
  int axis = 0;
  friend bool operator==(const FixedDof&, const FixedDof&) = default;
};

struct Supports {
  std::vector<FixedDof> fixed_dofs;
};

using Geometry = std::variant<TrussModel, GridMesh>;

class Problem {
 public:
  Problem() = default;
  Problem(ProblemKind kind, Geometry geometry, MaterialParams material, LoadCase loads,
          Supports supports, double v_target)
      : kind_(kind),
        geometry_(std::move(geometry)),
        material_(material),
        loads_(std::move(loads)),
        supports_(std::move(supports)),
        v_target_(v_target) {
    derive();
  }

  ProblemKind kind() const { return kind_; }
  const Geometry& geometry() const { return geometry_; }
  bool is_truss() const { return std::holds_alternative<TrussModel>(geometry_); }
  const TrussModel& truss() const { return std::get<TrussModel>(geometry_); }
  const GridMesh& grid() const { return std::get<GridMesh>(geometry_); }
  const MaterialParams& material() const { return material_; }
  const LoadCase& loads() const { return loads_; }
  const Supports& supports() const { return supports_; }
  double v_target() const { return v_target_; }

  int dimension() const {
    return is_truss() ? truss().dimension : grid().dimension;
  }
  std::size_t node_count() const {
    return is_truss() ? truss().nodes.size() : grid().node_count();
  }
  std::size_t dof_count() const { return node_count() * static_cast<std::size_t>(dimension()); }
  std::size_t element_count() const { return element_volume_.size(); }

  /// Full-material (rho = 1) volume of element e.
  double element_volume(std::size_t e) const { return element_volume_[e]; }
  const std::vector<double>& element_volumes() const { return element_volume_; }
  /// V0: sum of full-material element volumes.
  double initial_volume() const { return initial_volume_; }

  /// Member length (truss only).
  double member_length(std::size_t e) const { return member_length_[e]; }
  /// Grid cell index of design element e (grid only).
  std::size_t element_cell(std::size_t e) const { return element_cell_[e]; }

  /// Nodes of design element e.
  std::vector<std::size_t> element_nodes(std::size_t e) const {
    if (is_truss()) {
      const auto& m = truss().members[e];
      return {m.node_a, m.node_b};
    }
    return grid().cell_nodes(element_cell_[e]);
  }

  std::vector<std::size_t> element_dofs(std::size_t e) const {
    const auto d = static_cast<std::size_t>(dimension());
    std::vector<std::size_t> dofs;
    for (auto n : element_nodes(e))
      for (std::size_t a = 0; a < d; ++a) dofs.push_back(n * d + a);
    return dofs;
  }

  /// Node coordinates (grid nodes are placed at multiples of element_size).
  std::array<double, 3> node_position(std::size_t n) const {
    if (is_truss()) return truss().nodes[n];
    const auto& g = grid();
    const auto c = g.node_coords(n);
    return {static_cast<double>(c[0]) * g.element_size[0], static_cast<double>(c[1]) * g.element_size[1],
            g.dimension == 3 ? static_cast<double>(c[2]) * g.element_size[2] : 0.0};
  }

  /// True when node n is attached to at least one element.
  bool node_in_use(std::size_t n) const { return n < node_used_.size() && node_used_[n]; }

 private:
  void derive() {
    element_volume_.clear();
    member_length_.clear();
    element_cell_.clear();
    node_used_.assign(node_count(), false);
    if (is_truss()) {
      const auto& t = truss();
      for (const auto& m : t.members) {
        double len = 0.0;
        if (m.node_a < t.nodes.size() && m.node_b < t.nodes.size()) {
          double s = 0.0;
          for (int a = 0; a < 3; ++a) {
            const double d = t.nodes[m.node_b][a] - t.nodes[m.node_a][a];
            s += d * d;
          }
          len = std::sqrt(s);
          node_used_[m.node_a] = true;
          node_used_[m.node_b] = true;
        }
        member_length_.push_back(len);
        element_volume_.push_back(m.area * len);
      }
    } else {
      const auto& g = grid();
      const bool mask_ok = g.active.empty() || g.active.size() == g.cell_count();
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        if (mask_ok && !g.is_active(c)) continue;
        element_cell_.push_back(c);
        element_volume_.push_back(g.cell_volume());
        for (auto n : g.cell_nodes(c)) node_used_[n] = true;
      }
    }
    initial_volume_ = std::accumulate(element_volume_.begin(), element_volume_.end(), 0.0);
  }

  ProblemKind kind_ = ProblemKind::truss;
  Geometry geometry_;
  MaterialParams material_;
  LoadCase loads_;
  Supports supports_;
  double v_target_ = 1.0;

  std::vector<double> element_volume_;
  std::vector<double> member_length_;
  std::vector<std::size_t> element_cell_;
  std::vector<bool> node_used_;
  double initial_volume_ = 0.0;
};

inline bool operator==(const TrussMember& a, const TrussMember& b) {
  return a.node_a == b.node_a && a.node_b == b.node_b && a.area == b.area;
}
inline bool operator==(const TrussModel& a, const TrussModel& b) {
  return a.dimension == b.dimension && a.nodes == b.nodes && a.members == b.members;
}
inline bool operator==(const GridMesh& a, const GridMesh& b) {
  if (a.dimension != b.dimension || a.counts != b.counts || a.element_size != b.element_size) return false;
  for (std::size_t c = 0; c < a.cell_count(); ++c)
    if (a.is_active(c) != b.is_active(c)) return false;
  return true;
}
inline bool operator==(const PointLoad& a, const PointLoad& b) {
  return a.node == b.node && a.force == b.force;
}
inline bool operator==(const Problem& a, const Problem& b) {
  return a.kind() == b.kind() && a.geometry() == b.geometry() &&
         a.material().youngs_modulus == b.material().youngs_modulus &&
         a.material().poisson_ratio == b.material().poisson_ratio &&
         a.loads().point_loads == b.loads().point_loads &&
         a.supports().fixed_dofs == b.supports().fixed_dofs && a.v_target() == b.v_target();
}

}  // namespace qato
