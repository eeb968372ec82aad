#pragma once

// Linear elastic FE analysis with element stiffness scaled linearly by the
// design variable: bars, bilinear plane-strain quads, trilinear hexahedra.

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#ifdef QATO_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "qato/error.hpp"
#include "qato/model.hpp"

namespace qato::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Systems with more free dofs than this use Jacobi-preconditioned CG.
inline constexpr std::size_t kDirectSolveLimit = 50000;
inline constexpr double kIterativeTolerance = 1e-10;
/// Above this size the direct path uses a supernodal factorization when built with CHOLMOD.
inline constexpr std::size_t kSupernodalThreshold = 10000;

/// Isotropic elasticity matrix. 3x3 plane strain (xx, yy, xy) or 6x6 solid
/// (xx, yy, zz, yz, xz, xy), engineering shear strains.
inline Eigen::MatrixXd elasticity_matrix(const MaterialParams& m, ProblemKind kind) {
  const double E = m.youngs_modulus, nu = m.poisson_ratio;
  const double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  if (kind == ProblemKind::plane_strain) {
    Eigen::MatrixXd C(3, 3);
    C << 1.0 - nu, nu, 0.0,
         nu, 1.0 - nu, 0.0,
         0.0, 0.0, (1.0 - 2.0 * nu) / 2.0;
    return f * C;
  }
  if (kind == ProblemKind::solid) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) C(i, j) = f * (i == j ? 1.0 - nu : nu);
    for (int i = 3; i < 6; ++i) C(i, i) = E / (2.0 * (1.0 + nu));
    return C;
  }
  throw std::invalid_argument("elasticity_matrix: truss has no continuum elasticity matrix");
}

namespace detail {

// Bilinear quad on an a x b rectangle, 2x2 Gauss, unit thickness.
inline Eigen::MatrixXd quad_stiffness(const Eigen::MatrixXd& C, double a, double b) {
  static constexpr double xi_n[4] = {-1, 1, 1, -1};
  static constexpr double eta_n[4] = {-1, -1, 1, 1};
  const double g = 1.0 / std::sqrt(3.0);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(8, 8);
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 8);
      for (int n = 0; n < 4; ++n) {
        const double dx = 0.25 * xi_n[n] * (1 + eta * eta_n[n]) * 2.0 / a;
        const double dy = 0.25 * eta_n[n] * (1 + xi * xi_n[n]) * 2.0 / b;
        B(0, 2 * n) = dx;
        B(1, 2 * n + 1) = dy;
        B(2, 2 * n) = dy;
        B(2, 2 * n + 1) = dx;
      }
      K += B.transpose() * C * B * (a * b / 4.0);
    }
  }
  return K;
}

// Trilinear hex on an a x b x c box, 2x2x2 Gauss. Node order matches
// GridMesh::cell_nodes.
inline Eigen::MatrixXd hex_stiffness(const Eigen::MatrixXd& C, double a, double b, double c) {
  static constexpr double xn[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
  static constexpr double yn[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
  static constexpr double zn[8] = {-1, -1, -1, -1, 1, 1, 1, 1};
  const double g = 1.0 / std::sqrt(3.0);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(24, 24);
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      for (double zeta : {-g, g}) {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 24);
        for (int n = 0; n < 8; ++n) {
          const double dx = 0.125 * xn[n] * (1 + eta * yn[n]) * (1 + zeta * zn[n]) * 2.0 / a;
          const double dy = 0.125 * yn[n] * (1 + xi * xn[n]) * (1 + zeta * zn[n]) * 2.0 / b;
          const double dz = 0.125 * zn[n] * (1 + xi * xn[n]) * (1 + eta * yn[n]) * 2.0 / c;
          B(0, 3 * n) = dx;
          B(1, 3 * n + 1) = dy;
          B(2, 3 * n + 2) = dz;
          B(3, 3 * n + 1) = dz;
          B(3, 3 * n + 2) = dy;
          B(4, 3 * n) = dz;
          B(4, 3 * n + 2) = dx;
          B(5, 3 * n) = dy;
          B(5, 3 * n + 1) = dx;
        }
        K += B.transpose() * C * B * (a * b * c / 8.0);
      }
    }
  }
  return K;
}

inline Eigen::MatrixXd bar_stiffness(const Problem& p, std::size_t e) {
  const auto& t = p.truss();
  const auto& m = t.members[e];
  const int d = t.dimension;
  const double L = p.member_length(e);
  Eigen::VectorXd dir(d);
  for (int a = 0; a < d; ++a) dir[a] = (t.nodes[m.node_b][a] - t.nodes[m.node_a][a]) / L;
  const Eigen::MatrixXd cc = dir * dir.transpose();
  Eigen::MatrixXd K(2 * d, 2 * d);
  K << cc, -cc, -cc, cc;
  return (p.material().youngs_modulus * m.area / L) * K;
}

}  // namespace detail

struct ElementStiffness {
  std::size_t element = 0;
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> dofs;
};

/// Unscaled (rho = 1) element stiffness matrices. Grid problems share one
/// matrix across all elements.
class ReferenceStiffness {
 public:
  explicit ReferenceStiffness(const Problem& p) : problem_(&p) {
    if (p.is_truss()) {
      per_element_.reserve(p.element_count());
      for (std::size_t e = 0; e < p.element_count(); ++e) per_element_.push_back(detail::bar_stiffness(p, e));
    } else {
      const auto& g = p.grid();
      const auto C = elasticity_matrix(p.material(), p.kind());
      shared_ = g.dimension == 2
                    ? detail::quad_stiffness(C, g.element_size[0], g.element_size[1])
                    : detail::hex_stiffness(C, g.element_size[0], g.element_size[1], g.element_size[2]);
    }
  }

  const Eigen::MatrixXd& operator[](std::size_t e) const {
    return per_element_.empty() ? shared_ : per_element_[e];
  }
  const Problem& problem() const { return *problem_; }

 private:
  const Problem* problem_;
  std::vector<Eigen::MatrixXd> per_element_;
  Eigen::MatrixXd shared_;
};

inline ElementStiffness element_stiffness(const Problem& p, std::size_t e, double rho_e) {
  Eigen::MatrixXd K0;
  if (p.is_truss()) {
    K0 = detail::bar_stiffness(p, e);
  } else {
    const auto& g = p.grid();
    const auto C = elasticity_matrix(p.material(), p.kind());
    K0 = g.dimension == 2 ? detail::quad_stiffness(C, g.element_size[0], g.element_size[1])
                          : detail::hex_stiffness(C, g.element_size[0], g.element_size[1], g.element_size[2]);
  }
  return {e, rho_e * K0, p.element_dofs(e)};
}

/// Mapping between global dofs and the reduced (free) system. Dofs of fixed
/// supports and of nodes attached to no element are eliminated.
struct DofMap {
  std::vector<std::ptrdiff_t> free_index;  // global dof -> reduced index or -1
  std::vector<std::size_t> free_dofs;      // reduced index -> global dof

  std::size_t size() const { return free_dofs.size(); }

  static DofMap build(const Problem& p) {
    const auto d = static_cast<std::size_t>(p.dimension());
    std::vector<bool> fixed(p.dof_count(), false);
    for (const auto& f : p.supports().fixed_dofs) {
      const auto dof = f.node * d + static_cast<std::size_t>(f.axis);
      if (dof < fixed.size()) fixed[dof] = true;
    }
    DofMap m;
    m.free_index.assign(p.dof_count(), -1);
    for (std::size_t dof = 0; dof < p.dof_count(); ++dof) {
      if (fixed[dof] || !p.node_in_use(dof / d)) continue;
      m.free_index[dof] = static_cast<std::ptrdiff_t>(m.free_dofs.size());
      m.free_dofs.push_back(dof);
    }
    return m;
  }
};

struct GlobalSystem {
  SparseMatrix stiffness;  // K_eff over free dofs, both triangles stored
  Eigen::VectorXd load;    // F over free dofs
  DofMap dofs;

  /// Expand a reduced vector to all global dofs (eliminated dofs are 0).
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.free_index.size()));
    for (std::size_t r = 0; r < dofs.size(); ++r) full[static_cast<Eigen::Index>(dofs.free_dofs[r])] = reduced[static_cast<Eigen::Index>(r)];
    return full;
  }
};

inline Eigen::VectorXd gather_loads(const Problem& p, const DofMap& dofs) {
  const auto d = static_cast<std::size_t>(p.dimension());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.size()));
  for (const auto& load : p.loads().point_loads) {
    for (std::size_t a = 0; a < d; ++a) {
      const auto dof = load.node * d + a;
      if (dof >= dofs.free_index.size()) continue;
      const auto r = dofs.free_index[dof];
      if (r >= 0) F[r] += load.force[a];
    }
  }
  return F;
}

/// Assemble K_eff(rho) on the reduced system.
inline GlobalSystem assemble(const ReferenceStiffness& ref, std::span<const double> rho) {
  const Problem& p = ref.problem();
  GlobalSystem sys;
  sys.dofs = DofMap::build(p);
  const auto n = static_cast<Eigen::Index>(sys.dofs.size());
  std::vector<Eigen::Triplet<double>> triplets;
  const std::size_t per = p.is_truss() ? 4u * static_cast<std::size_t>(p.dimension() * p.dimension())
                                       : static_cast<std::size_t>(ref[0].size());
  triplets.reserve(p.element_count() * per);
  for (std::size_t e = 0; e < p.element_count(); ++e) {
    const auto& K0 = ref[e];
    const auto edofs = p.element_dofs(e);
    for (std::size_t i = 0; i < edofs.size(); ++i) {
      const auto ri = sys.dofs.free_index[edofs[i]];
      if (ri < 0) continue;
      for (std::size_t j = 0; j < edofs.size(); ++j) {
        const auto rj = sys.dofs.free_index[edofs[j]];
        if (rj < 0) continue;
        triplets.emplace_back(ri, rj, rho[e] * K0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  }
  sys.stiffness.resize(n, n);
  sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  sys.load = gather_loads(p, sys.dofs);
  return sys;
}

inline GlobalSystem assemble(const Problem& p, std::span<const double> rho) {
  return assemble(ReferenceStiffness(p), rho);
}

namespace detail {

inline std::string describe_dof(const GlobalSystem& sys, Eigen::Index reduced, int dim) {
  const auto g = sys.dofs.free_dofs[static_cast<std::size_t>(reduced)];
  std::ostringstream os;
  os << "node " << g / static_cast<std::size_t>(dim) << " axis " << g % static_cast<std::size_t>(dim);
  return os.str();
}

}  // namespace detail

/// Solves K_eff U = F. Keeps the symbolic factorization between calls with
/// the same sparsity pattern (the optimization loop reassembles every
/// iteration with unchanged structure).
class EquilibriumSolver {
 public:
  explicit EquilibriumSolver(int dimension = 3) : dimension_(dimension) {}

  Eigen::VectorXd solve(const GlobalSystem& sys) {
    const auto n = sys.stiffness.rows();
    if (n == 0) return Eigen::VectorXd::Zero(0);
    if (sys.load.isZero(0.0)) return Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u;
#ifdef QATO_HAVE_CHOLMOD
    if (static_cast<std::size_t>(n) > kSupernodalThreshold && static_cast<std::size_t>(n) <= kDirectSolveLimit) {
      if (!llt_ || pattern_size_ != sys.stiffness.nonZeros() || rows_ != n) {
        llt_ = std::make_unique<Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>>();
        llt_->analyzePattern(sys.stiffness);
        pattern_size_ = sys.stiffness.nonZeros();
        rows_ = n;
      }
      llt_->factorize(sys.stiffness);
      if (llt_->info() != Eigen::Success) throw FemError("stiffness factorization failed (matrix not positive definite)");
      u = llt_->solve(sys.load);
      check_residual(sys, u);
      return u;
    }
#endif
    if (static_cast<std::size_t>(n) <= kDirectSolveLimit) {
      if (!analyzed_ || pattern_size_ != sys.stiffness.nonZeros() || rows_ != n) {
        ldlt_.analyzePattern(sys.stiffness);
        analyzed_ = true;
        pattern_size_ = sys.stiffness.nonZeros();
        rows_ = n;
      }
      ldlt_.factorize(sys.stiffness);
      if (ldlt_.info() != Eigen::Success) report_breakdown(sys);
      check_pivots(sys);
      u = ldlt_.solve(sys.load);
    } else {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
      cg.setTolerance(kIterativeTolerance);
      cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * n));
      cg.compute(sys.stiffness);
      if (warm_.size() == n) u = cg.solveWithGuess(sys.load, warm_);
      else u = cg.solve(sys.load);
      if (cg.info() != Eigen::Success) {
        std::ostringstream os;
        os << "conjugate gradient did not converge (" << cg.iterations() << " iterations, residual "
           << cg.error() << ")";
        throw FemError(os.str());
      }
      warm_ = u;
    }
    return u;
  }

 private:
  void check_pivots(const GlobalSystem& sys) const {
    const auto& D = ldlt_.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    const auto& perm = ldlt_.permutationPinv().indices();
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      if (!(D[i] > 1e-13 * dmax)) {
        std::ostringstream os;
        os << "stiffness matrix singular or indefinite: pivot " << D[i] << " at "
           << detail::describe_dof(sys, perm[i], dimension_);
        throw FemError(os.str());
      }
    }
  }

  // The factorization stops at the first non-positive pivot; entries past it are not meaningful.
  [[noreturn]] void report_breakdown(const GlobalSystem& sys) const {
    const auto& D = ldlt_.vectorD();
    const auto& perm = ldlt_.permutationPinv().indices();
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      if (!(D[i] > 0.0)) {
        std::ostringstream os;
        os << "stiffness matrix singular or indefinite: pivot " << D[i] << " at "
           << detail::describe_dof(sys, perm[i], dimension_);
        throw FemError(os.str());
      }
    }
    throw FemError("stiffness factorization failed (matrix not SPD)");
  }

  // Near-singular systems that slip through a Cholesky factorization show up
  // as a large residual or non-finite displacements.
  static void check_residual(const GlobalSystem& sys, const Eigen::VectorXd& u) {
    if (!u.allFinite()) throw FemError("stiffness matrix singular: non-finite displacements");
    const double rel = (sys.stiffness * u - sys.load).norm() / sys.load.norm();
    if (!(rel < 1e-6)) {
      std::ostringstream os;
      os << "stiffness matrix singular or ill-conditioned: relative residual " << rel;
      throw FemError(os.str());
    }
  }

  int dimension_;
#ifdef QATO_HAVE_CHOLMOD
  std::unique_ptr<Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>> llt_;
#endif
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  Eigen::Index pattern_size_ = 0;
  Eigen::Index rows_ = 0;
  Eigen::VectorXd warm_;
};

/// Reduced displacement vector U with K_eff U = F.
inline Eigen::VectorXd solve_displacements(const GlobalSystem& sys, int dimension = 3) {
  EquilibriumSolver s(dimension);
  return s.solve(sys);
}

/// SE_e = U_e^T (rho_e K0_e) U_e for every element. `u_full` spans all dofs.
inline std::vector<double> elemental_strain_energy(const ReferenceStiffness& ref, std::span<const double> rho,
                                                   const Eigen::VectorXd& u_full) {
  const Problem& p = ref.problem();
  std::vector<double> se(p.element_count());
  Eigen::VectorXd ue;
  for (std::size_t e = 0; e < p.element_count(); ++e) {
    const auto dofs = p.element_dofs(e);
    ue.resize(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) ue[static_cast<Eigen::Index>(i)] = u_full[static_cast<Eigen::Index>(dofs[i])];
    se[e] = std::max(0.0, rho[e] * ue.dot(ref[e] * ue));
  }
  return se;
}

inline std::vector<double> elemental_strain_energy(const Problem& p, std::span<const double> rho,
                                                   const Eigen::VectorXd& u_full) {
  return elemental_strain_energy(ReferenceStiffness(p), rho, u_full);
}

/// Compliance F^T U on the reduced system.
inline double total_compliance(const GlobalSystem& sys, const Eigen::VectorXd& u) {
  if (sys.load.size() == 0) return 0.0;
  return sys.load.dot(u);
}

/// Everything one equilibrium analysis produces.
struct Analysis {
  Eigen::VectorXd displacement;  // all global dofs
  std::vector<double> strain_energy;
  double compliance = 0.0;
};

/// Stateful analysis bound to one problem; reuses reference stiffness and
/// symbolic factorization across design iterations.
class Analyzer {
 public:
  explicit Analyzer(const Problem& p) : ref_(p), solver_(p.dimension()) {}

  Analysis analyze(std::span<const double> rho) {
    const auto sys = assemble(ref_, rho);
    const auto u = solver_.solve(sys);
    Analysis a;
    a.displacement = sys.expand(u);
    a.strain_energy = elemental_strain_energy(ref_, rho, a.displacement);
    a.compliance = total_compliance(sys, u);
    return a;
  }

  const ReferenceStiffness& reference() const { return ref_; }

 private:
  ReferenceStiffness ref_;
  EquilibriumSolver solver_;
};

}  // namespace qato::fem
