#pragma once

// Problem files (JSON):
//
//   { "kind": "truss" | "plane_strain" | "solid",
//     "material": {"E": .., "nu": ..},
//     "truss": {"nodes": [[x,y(,z)]..], "members": [[a,b,area]..]}
//       or
//     "grid": {"counts": [nx,ny(,nz)], "size": [sx,sy(,sz)], "inactive": [[i,j(,k)]..]},
//     "supports": [[node, axis]..],
//     "loads": [[node, [fx,fy(,fz)]]..],
//     "v_target": .. }
//
// Grid node ids are i + (nx+1)*(j + (ny+1)*k).

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qato/error.hpp"
#include "qato/model.hpp"
#include "qato/validate.hpp"

namespace qato {

namespace detail {

using json = nlohmann::json;

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw ParseError(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(ctx + "." + key + ": " + e.what());
  }
}

template <typename T>
T as(const json& j, const std::string& ctx) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

inline std::array<double, 3> vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() < 1 || j.size() > 3) throw ParseError(ctx + ": expected array of 1-3 numbers");
  std::array<double, 3> v{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < j.size(); ++a) v[a] = as<double>(j[a], ctx);
  return v;
}

inline Problem problem_from_json(const json& root) {
  if (!root.is_object()) throw ParseError("problem: top level must be an object");
  const auto kind_s = field<std::string>(root, "kind", "problem");
  ProblemKind kind;
  try {
    kind = parse_kind(kind_s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("problem.kind: ") + e.what());
  }

  MaterialParams mat;
  if (!root.contains("material")) throw ParseError("problem: missing field 'material'");
  const auto& jm = root["material"];
  mat.youngs_modulus = field<double>(jm, "E", "material");
  mat.poisson_ratio = jm.contains("nu") ? field<double>(jm, "nu", "material") : 0.0;

  Geometry geometry;
  int dim = 0;
  if (root.contains("truss")) {
    const auto& jt = root["truss"];
    TrussModel t;
    const auto nodes = field<json>(jt, "nodes", "truss");
    if (!nodes.is_array()) throw ParseError("truss.nodes: expected array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto ctx = "truss.nodes[" + std::to_string(i) + "]";
      if (!nodes[i].is_array() || (nodes[i].size() != 2 && nodes[i].size() != 3))
        throw ParseError(ctx + ": expected [x, y] or [x, y, z]");
      if (i == 0) t.dimension = static_cast<int>(nodes[i].size());
      if (static_cast<int>(nodes[i].size()) != t.dimension) throw ParseError(ctx + ": mixed node dimensions");
      t.nodes.push_back(vec3(nodes[i], ctx));
    }
    const auto members = field<json>(jt, "members", "truss");
    if (!members.is_array()) throw ParseError("truss.members: expected array");
    for (std::size_t e = 0; e < members.size(); ++e) {
      const auto ctx = "truss.members[" + std::to_string(e) + "]";
      const auto& jmem = members[e];
      if (!jmem.is_array() || jmem.size() != 3) throw ParseError(ctx + ": expected [node_a, node_b, area]");
      t.members.push_back({as<std::size_t>(jmem[0], ctx), as<std::size_t>(jmem[1], ctx), as<double>(jmem[2], ctx)});
    }
    dim = t.dimension;
    geometry = std::move(t);
  } else if (root.contains("grid")) {
    const auto& jg = root["grid"];
    GridMesh g;
    const auto counts = field<std::vector<long long>>(jg, "counts", "grid");
    const auto size = field<std::vector<double>>(jg, "size", "grid");
    if (counts.size() != 2 && counts.size() != 3) throw ParseError("grid.counts: expected 2 or 3 entries");
    if (size.size() != counts.size()) throw ParseError("grid.size: must match grid.counts length");
    g.dimension = static_cast<int>(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a) {
      if (counts[a] < 1) throw ParseError("grid.counts: entries must be >= 1");
      g.counts[a] = static_cast<std::size_t>(counts[a]);
      g.element_size[a] = size[a];
    }
    if (jg.contains("inactive")) {
      const auto& jin = jg["inactive"];
      if (!jin.is_array()) throw ParseError("grid.inactive: expected array");
      g.active.assign(g.cell_count(), true);
      for (std::size_t n = 0; n < jin.size(); ++n) {
        const auto ctx = "grid.inactive[" + std::to_string(n) + "]";
        const auto ijk = as<std::vector<std::size_t>>(jin[n], ctx);
        if (ijk.size() != counts.size()) throw ParseError(ctx + ": index arity must match grid dimension");
        for (std::size_t a = 0; a < ijk.size(); ++a)
          if (ijk[a] >= g.counts[a]) throw ParseError(ctx + ": cell index out of range");
        g.active[g.cell_id(ijk[0], ijk[1], ijk.size() == 3 ? ijk[2] : 0)] = false;
      }
    }
    dim = g.dimension;
    geometry = std::move(g);
  } else {
    throw ParseError("problem: needs a 'truss' or 'grid' section");
  }

  Supports supports;
  if (root.contains("supports")) {
    const auto& js = root["supports"];
    if (!js.is_array()) throw ParseError("supports: expected array");
    for (std::size_t n = 0; n < js.size(); ++n) {
      const auto ctx = "supports[" + std::to_string(n) + "]";
      if (!js[n].is_array() || js[n].size() != 2) throw ParseError(ctx + ": expected [node, axis]");
      supports.fixed_dofs.push_back({as<std::size_t>(js[n][0], ctx), as<int>(js[n][1], ctx)});
    }
  }

  LoadCase loads;
  if (root.contains("loads")) {
    const auto& jl = root["loads"];
    if (!jl.is_array()) throw ParseError("loads: expected array");
    for (std::size_t n = 0; n < jl.size(); ++n) {
      const auto ctx = "loads[" + std::to_string(n) + "]";
      if (!jl[n].is_array() || jl[n].size() != 2) throw ParseError(ctx + ": expected [node, [fx, fy(, fz)]]");
      if (!jl[n][1].is_array() || static_cast<int>(jl[n][1].size()) != dim)
        throw ParseError(ctx + ": force vector must have " + std::to_string(dim) + " components");
      loads.point_loads.push_back({as<std::size_t>(jl[n][0], ctx), vec3(jl[n][1], ctx)});
    }
  }

  const double v_target = field<double>(root, "v_target", "problem");
  return Problem(kind, std::move(geometry), mat, std::move(loads), std::move(supports), v_target);
}

}  // namespace detail

inline nlohmann::json to_json(const Problem& p) {
  using json = nlohmann::json;
  json root;
  root["kind"] = std::string(to_string(p.kind()));
  root["material"] = {{"E", p.material().youngs_modulus}, {"nu", p.material().poisson_ratio}};
  const int dim = p.dimension();
  if (p.is_truss()) {
    const auto& t = p.truss();
    json nodes = json::array(), members = json::array();
    for (const auto& n : t.nodes) {
      json c = json::array();
      for (int a = 0; a < t.dimension; ++a) c.push_back(n[static_cast<std::size_t>(a)]);
      nodes.push_back(c);
    }
    for (const auto& m : t.members) members.push_back({m.node_a, m.node_b, m.area});
    root["truss"] = {{"nodes", nodes}, {"members", members}};
  } else {
    const auto& g = p.grid();
    json counts = json::array(), size = json::array(), inactive = json::array();
    for (int a = 0; a < g.dimension; ++a) {
      counts.push_back(g.counts[static_cast<std::size_t>(a)]);
      size.push_back(g.element_size[static_cast<std::size_t>(a)]);
    }
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (g.is_active(c)) continue;
      const auto ijk = g.cell_coords(c);
      json idx = json::array();
      for (int a = 0; a < g.dimension; ++a) idx.push_back(ijk[static_cast<std::size_t>(a)]);
      inactive.push_back(idx);
    }
    root["grid"] = {{"counts", counts}, {"size", size}, {"inactive", inactive}};
  }
  json supports = json::array();
  for (const auto& f : p.supports().fixed_dofs) supports.push_back({f.node, f.axis});
  root["supports"] = supports;
  json loads = json::array();
  for (const auto& l : p.loads().point_loads) {
    json f = json::array();
    for (int a = 0; a < dim; ++a) f.push_back(l.force[static_cast<std::size_t>(a)]);
    loads.push_back({l.node, f});
  }
  root["loads"] = loads;
  root["v_target"] = p.v_target();
  return root;
}

/// Parse without validation. Throws ParseError with line/column on syntax errors.
inline Problem parse_problem(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what(), line,
                     col);
  }
  return detail::problem_from_json(root);
}

/// Parse and validate; throws ParseError or ValidationError.
inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto problem = parse_problem(ss.str());
  auto violations = validate(problem);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return problem;
}

inline void save_problem(const Problem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write problem file '" + path + "'");
  out << to_json(p).dump(1) << '\n';
}

}  // namespace qato
