#pragma once

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "crmsfem/geometry.hpp"
#include "crmsfem/mesh.hpp"

namespace crmsfem {

// int indices: UMFPACK's di interface.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;
using VelocityField = std::function<Vec2(double, double)>;

/// Nodal field on a Cartesian mesh.
struct ScalarField {
  CartesianMesh mesh;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const CartesianMesh& m, double fill = 0.0)
      : mesh(m), values(static_cast<std::size_t>(m.node_count()), fill) {}

  double operator()(Index i, Index j) const { return values[static_cast<std::size_t>(mesh.node(i, j))]; }
  double& operator()(Index i, Index j) { return values[static_cast<std::size_t>(mesh.node(i, j))]; }
};

/// A rectangular block of fine cells [i0, i0+nx) x [j0, j0+ny). Local node
/// numbering inside the block is a + b*(nx+1).
struct CellBlock {
  Index i0 = 0;
  Index j0 = 0;
  Index nx = 0;
  Index ny = 0;

  static CellBlock whole(const CartesianMesh& mesh) { return {0, 0, mesh.nx, mesh.ny}; }
  Index node_count() const { return (nx + 1) * (ny + 1); }
};

/// Nine-point operator on a structured node grid: coefficient (node, di, dj)
/// couples row `node` to the unknown at node + di + dj*(nx+1).
class StencilOperator {
public:
  StencilOperator() = default;
  StencilOperator(Index nx, Index ny);

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index size() const { return (nx_ + 1) * (ny_ + 1); }

  static constexpr int slot(int di, int dj) { return (di + 1) + 3 * (dj + 1); }
  double& at(Index node, int di, int dj) { return coef_[static_cast<std::size_t>(slot(di, dj) * size() + node)]; }
  double at(Index node, int di, int dj) const { return coef_[static_cast<std::size_t>(slot(di, dj) * size() + node)]; }

  /// y = K x.
  void apply(std::span<const double> x, std::span<double> y) const;
  Vector apply(const Vector& x) const;

  /// y^T K x.
  double form(std::span<const double> y, std::span<const double> x) const;

  SparseMatrix to_sparse() const;

private:
  Index nx_ = 0;
  Index ny_ = 0;
  std::vector<double> coef_;  // 9 planes of size()
};

enum class CellSet { All, Unmasked };

/// Q1 Galerkin operator of -div(a grad u) + w.grad u + sigma u over `block`,
/// 2x2 Gauss per cell with per-cell a, sigma and w sampled at the Gauss
/// points. Row = test function. CellSet::Unmasked skips perforated cells.
StencilOperator assemble_operator(const CoefficientField& coeffs, const VelocityField& w,
                                  const CellBlock& block, CellSet cells = CellSet::All);
inline StencilOperator assemble_operator(const CoefficientField& coeffs, const VelocityField& w) {
  return assemble_operator(coeffs, w, CellBlock::whole(coeffs.mesh));
}

/// Load vector of a per-cell constant source (one value per fine cell of the
/// full mesh), restricted to `block`.
Vector assemble_load(const CartesianMesh& mesh, std::span<const double> cell_source,
                     const CellBlock& block);
inline Vector assemble_load(const CoefficientField& coeffs, const CellBlock& block) {
  return assemble_load(coeffs.mesh, coeffs.f_beta, block);
}
inline Vector assemble_load(const CoefficientField& coeffs) {
  return assemble_load(coeffs, CellBlock::whole(coeffs.mesh));
}

/// Linear system over the nodes of a grid, possibly with eliminated
/// (Dirichlet) nodes.
struct SparseSystem {
  SparseMatrix matrix;  // free x free
  Vector rhs;           // free
  std::vector<Index> dof_of_node;   // -1 for fixed nodes
  std::vector<Index> node_of_dof;
  std::vector<Index> fixed_nodes;
  std::vector<double> fixed_values;
  SparseMatrix coupling;  // free x fixed columns moved to the rhs

  Index node_count() const { return static_cast<Index>(dof_of_node.size()); }
  Index dof_count() const { return static_cast<Index>(node_of_dof.size()); }

  /// Reduced rhs for other fixed values: full_rhs[free] - coupling * values.
  Vector lift(const Vector& full_rhs, std::span<const double> values) const;

  /// Full nodal vector from a reduced solution and the stored fixed values.
  Vector expand(const Vector& reduced) const;
};

SparseSystem make_system(SparseMatrix matrix, Vector rhs);

/// Eliminates the listed nodes with the given values. A node listed twice
/// with equal values is a single constraint; conflicting values throw.
SparseSystem apply_dirichlet(const SparseSystem& system, std::span<const Index> nodes,
                             std::span<const double> values);

/// Direct sparse LU (UMFPACK). solve() refines iteratively until the
/// relative residual is <= tolerance and throws SolverError otherwise.
class SparseLU {
public:
  explicit SparseLU(SparseMatrix matrix, double tolerance = 1e-10);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  Vector solve(const Vector& b) const;
  const SparseMatrix& matrix() const { return *matrix_; }

private:
  // heap-held: the factorization keeps pointers into the matrix arrays
  std::unique_ptr<SparseMatrix> matrix_;
  double tolerance_;
  std::unique_ptr<Eigen::UmfPackLU<SparseMatrix>> lu_;
};

/// Solves the reduced system and returns the full nodal vector.
Vector solve_sparse(const SparseSystem& system);

/// Linear functional sum_k weights[k] * x[nodes[k]].
struct LinearFunctional {
  std::vector<Index> nodes;
  std::vector<double> weights;

  double operator()(std::span<const double> x) const;
};

struct SaddleSolution {
  Vector x;
  Vector multipliers;
};

/// Bordered system [K C^T; C 0] [x; mu] = [b; d] with C the given
/// functionals. Factorized once, reusable for many right-hand sides.
class SaddleSolver {
public:
  SaddleSolver(const SparseMatrix& k, std::vector<LinearFunctional> constraints,
               double tolerance = 1e-10);

  SaddleSolution solve(const Vector& b, std::span<const double> targets) const;
  Index constraint_count() const { return static_cast<Index>(constraints_.size()); }

private:
  Index n_;
  std::vector<LinearFunctional> constraints_;
  SparseLU lu_;
};

SaddleSolution solve_saddle(const SparseMatrix& k, const Vector& b,
                            std::vector<LinearFunctional> constraints,
                            std::span<const double> targets);

/// Debug export, "i j value" per line sorted by (i, j); vectors as "i value".
void write_triplets(std::ostream& os, const SparseMatrix& matrix);
void write_triplets(std::ostream& os, const Vector& vector);

}  // namespace crmsfem
