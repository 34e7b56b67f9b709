#include "crmsfem/fem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "crmsfem/error.hpp"
#include "crmsfem/simd.hpp"

namespace crmsfem {

// ---------------------------------------------------------------------------
// StencilOperator

StencilOperator::StencilOperator(Index nx, Index ny)
    : nx_(nx), ny_(ny), coef_(static_cast<std::size_t>(9 * (nx + 1) * (ny + 1)), 0.0) {}

void StencilOperator::apply(std::span<const double> x, std::span<double> y) const {
  const Index stride = nx_ + 1;
  const simd::Isa isa = simd::active_isa();
  const double* plane[9];
  for (int o = 0; o < 9; ++o) plane[o] = coef_.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(size());

  const auto edge_node = [&](Index i, Index j) {
    const Index n = i + j * stride;
    double s = 0.0;
    for (int dj = -1; dj <= 1; ++dj) {
      if (j + dj < 0 || j + dj > ny_) continue;
      for (int di = -1; di <= 1; ++di) {
        if (i + di < 0 || i + di > nx_) continue;
        s += plane[slot(di, dj)][n] * x[static_cast<std::size_t>(n + di + dj * stride)];
      }
    }
    y[static_cast<std::size_t>(n)] = s;
  };

  for (Index j = 0; j <= ny_; ++j) {
    edge_node(0, j);
    if (nx_ >= 2) {
      const Index first = 1 + j * stride;
      const double* coef[9];
      for (int o = 0; o < 9; ++o) coef[o] = plane[o] + first;
      const double* rows[3] = {j > 0 ? x.data() + first - stride : nullptr, x.data() + first,
                               j < ny_ ? x.data() + first + stride : nullptr};
      simd::stencil_row(isa, coef, rows, nx_ - 1, y.data() + first);
    }
    edge_node(nx_, j);
  }
}

Vector StencilOperator::apply(const Vector& x) const {
  Vector y(x.size());
  apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

double StencilOperator::form(std::span<const double> y, std::span<const double> x) const {
  std::vector<double> kx(x.size());
  apply(x, kx);
  double s = 0.0;
  for (std::size_t i = 0; i < kx.size(); ++i) s += y[i] * kx[i];
  return s;
}

SparseMatrix StencilOperator::to_sparse() const {
  const Index n = size();
  const Index stride = nx_ + 1;
  std::vector<int> outer(static_cast<std::size_t>(n + 1), 0);
  std::vector<int> inner;
  std::vector<double> values;
  inner.reserve(static_cast<std::size_t>(9 * n));
  values.reserve(static_cast<std::size_t>(9 * n));
  for (Index jc = 0; jc <= ny_; ++jc)
    for (Index ic = 0; ic <= nx_; ++ic) {
      const Index col = ic + jc * stride;
      // rows in increasing order: r = c - di - dj*stride
      for (int dj = 1; dj >= -1; --dj) {
        const Index jr = jc - dj;
        if (jr < 0 || jr > ny_) continue;
        for (int di = 1; di >= -1; --di) {
          const Index ir = ic - di;
          if (ir < 0 || ir > nx_) continue;
          const Index row = ir + jr * stride;
          inner.push_back(static_cast<int>(row));
          values.push_back(at(row, di, dj));
        }
      }
      outer[static_cast<std::size_t>(col + 1)] = static_cast<int>(inner.size());
    }
  return SparseMatrix(Eigen::Map<const SparseMatrix>(static_cast<int>(n), static_cast<int>(n),
                                                     static_cast<int>(inner.size()), outer.data(),
                                                     inner.data(), values.data()));
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

// Q1 on the unit cell, corners (0,0) (1,0) (0,1) (1,1).
constexpr int kAdjacent[4][4] = {{0, 1, 1, 2}, {1, 0, 2, 1}, {1, 2, 0, 1}, {2, 1, 1, 0}};  // 0 same, 1 edge, 2 diagonal
constexpr double kStiff[3] = {2.0 / 3.0, -1.0 / 6.0, -1.0 / 3.0};
constexpr double kMass[3] = {4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0};
constexpr int kCornerDx[4] = {0, 1, 0, 1};
constexpr int kCornerDy[4] = {0, 0, 1, 1};

struct GaussTable {
  double s[4];
  double t[4];
  double phi[4][4];   // [q][a]
  double dphi_s[4][4];
  double dphi_t[4][4];

  GaussTable() {
    const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
    const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
    const double pts[2] = {g0, g1};
    for (int q = 0; q < 4; ++q) {
      s[q] = pts[q % 2];
      t[q] = pts[q / 2];
      for (int a = 0; a < 4; ++a) {
        const double fs = kCornerDx[a] ? s[q] : 1.0 - s[q];
        const double ft = kCornerDy[a] ? t[q] : 1.0 - t[q];
        const double ds = kCornerDx[a] ? 1.0 : -1.0;
        const double dt = kCornerDy[a] ? 1.0 : -1.0;
        phi[q][a] = fs * ft;
        dphi_s[q][a] = ds * ft;
        dphi_t[q][a] = fs * dt;
      }
    }
  }
};

const GaussTable& gauss() {
  static const GaussTable table;
  return table;
}

}  // namespace

StencilOperator assemble_operator(const CoefficientField& coeffs, const VelocityField& w,
                                  const CellBlock& block, CellSet cells) {
  const CartesianMesh& mesh = coeffs.mesh;
  if (block.i0 < 0 || block.j0 < 0 || block.i0 + block.nx > mesh.nx || block.j0 + block.ny > mesh.ny)
    throw Error("internal", "cell block outside the mesh");
  StencilOperator op(block.nx, block.ny);
  const Index stride = block.nx + 1;
  const double h = mesh.h;
  const GaussTable& gt = gauss();

  for (Index cj = 0; cj < block.ny; ++cj)
    for (Index ci = 0; ci < block.nx; ++ci) {
      const Index gi = block.i0 + ci;
      const Index gj = block.j0 + cj;
      const auto cell = static_cast<std::size_t>(mesh.cell(gi, gj));
      if (cells == CellSet::Unmasked && coeffs.mask[cell]) continue;
      const double a = coeffs.a_beta[cell];
      const double sh2 = coeffs.sigma_beta[cell] * h * h;

      double elem[4][4];
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) elem[r][c] = a * kStiff[kAdjacent[r][c]] + sh2 * kMass[kAdjacent[r][c]];

      if (w) {
        const Point x0 = mesh.node_point(gi, gj);
        for (int q = 0; q < 4; ++q) {
          const Vec2 v = w(x0.x + gt.s[q] * h, x0.y + gt.t[q] * h);
          // h^2 (area) * 1/h (gradient) * 1/4 (weight)
          for (int c = 0; c < 4; ++c) {
            const double conv = 0.25 * h * (v.x * gt.dphi_s[q][c] + v.y * gt.dphi_t[q][c]);
            for (int r = 0; r < 4; ++r) elem[r][c] += conv * gt.phi[q][r];
          }
        }
      }

      for (int r = 0; r < 4; ++r) {
        const Index row = (ci + kCornerDx[r]) + (cj + kCornerDy[r]) * stride;
        for (int c = 0; c < 4; ++c)
          op.at(row, kCornerDx[c] - kCornerDx[r], kCornerDy[c] - kCornerDy[r]) += elem[r][c];
      }
    }
  return op;
}

Vector assemble_load(const CartesianMesh& mesh, std::span<const double> cell_source,
                     const CellBlock& block) {
  Vector b = Vector::Zero(block.node_count());
  const Index stride = block.nx + 1;
  const double quarter = 0.25 * mesh.h * mesh.h;
  for (Index cj = 0; cj < block.ny; ++cj)
    for (Index ci = 0; ci < block.nx; ++ci) {
      const double f = cell_source[static_cast<std::size_t>(mesh.cell(block.i0 + ci, block.j0 + cj))];
      if (f == 0.0) continue;
      for (int r = 0; r < 4; ++r) b[(ci + kCornerDx[r]) + (cj + kCornerDy[r]) * stride] += quarter * f;
    }
  return b;
}

// ---------------------------------------------------------------------------
// Systems and Dirichlet elimination

SparseSystem make_system(SparseMatrix matrix, Vector rhs) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
    throw Error("internal", "system dimensions disagree");
  SparseSystem s;
  const Index n = matrix.rows();
  s.matrix = std::move(matrix);
  s.matrix.makeCompressed();
  s.rhs = std::move(rhs);
  s.dof_of_node.resize(static_cast<std::size_t>(n));
  s.node_of_dof.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s.dof_of_node[static_cast<std::size_t>(i)] = s.node_of_dof[static_cast<std::size_t>(i)] = i;
  s.coupling.resize(static_cast<int>(n), 0);
  return s;
}

Vector SparseSystem::lift(const Vector& full_rhs, std::span<const double> values) const {
  Vector r(dof_count());
  for (Index d = 0; d < dof_count(); ++d) r[d] = full_rhs[node_of_dof[static_cast<std::size_t>(d)]];
  if (!values.empty()) {
    const Eigen::Map<const Vector> v(values.data(), static_cast<Index>(values.size()));
    r -= coupling * v;
  }
  return r;
}

Vector SparseSystem::expand(const Vector& reduced) const {
  Vector full(node_count());
  for (Index d = 0; d < dof_count(); ++d) full[node_of_dof[static_cast<std::size_t>(d)]] = reduced[d];
  for (std::size_t k = 0; k < fixed_nodes.size(); ++k) full[fixed_nodes[k]] = fixed_values[k];
  return full;
}

SparseSystem apply_dirichlet(const SparseSystem& system, std::span<const Index> nodes,
                             std::span<const double> values) {
  if (nodes.size() != values.size()) throw Error("internal", "dirichlet node/value count mismatch");
  if (!system.fixed_nodes.empty() || system.dof_count() != system.node_count())
    throw Error("internal", "apply_dirichlet expects an unconstrained system");
  const Index n = system.node_count();

  std::map<Index, double> fixed;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0 || nodes[k] >= n) throw Error("internal", "dirichlet node out of range");
    const auto [it, inserted] = fixed.emplace(nodes[k], values[k]);
    if (!inserted && it->second != values[k])
      throw Error("dirichlet-conflict", "node " + std::to_string(nodes[k]) + " constrained to two different values");
  }

  SparseSystem out;
  out.dof_of_node.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> fixed_slot(static_cast<std::size_t>(n), -1);
  for (const auto& [node, value] : fixed) {
    fixed_slot[static_cast<std::size_t>(node)] = static_cast<Index>(out.fixed_nodes.size());
    out.fixed_nodes.push_back(node);
    out.fixed_values.push_back(value);
  }
  for (Index i = 0; i < n; ++i)
    if (fixed_slot[static_cast<std::size_t>(i)] < 0) {
      out.dof_of_node[static_cast<std::size_t>(i)] = static_cast<Index>(out.node_of_dof.size());
      out.node_of_dof.push_back(i);
    }
  const Index nf = out.dof_count();
  const auto nc = static_cast<Index>(out.fixed_nodes.size());

  std::vector<int> outer_f{0}, inner_f, outer_c{0}, inner_c;
  std::vector<double> val_f, val_c;
  inner_f.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  val_f.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  for (Index col = 0; col < n; ++col) {
    const bool is_fixed = fixed_slot[static_cast<std::size_t>(col)] >= 0;
    auto& inner = is_fixed ? inner_c : inner_f;
    auto& val = is_fixed ? val_c : val_f;
    for (SparseMatrix::InnerIterator it(system.matrix, static_cast<int>(col)); it; ++it) {
      const Index d = out.dof_of_node[static_cast<std::size_t>(it.row())];
      if (d < 0) continue;
      inner.push_back(static_cast<int>(d));
      val.push_back(it.value());
    }
    (is_fixed ? outer_c : outer_f).push_back(static_cast<int>(inner.size()));
  }
  out.matrix = SparseMatrix(Eigen::Map<const SparseMatrix>(static_cast<int>(nf), static_cast<int>(nf),
                                                           static_cast<int>(inner_f.size()), outer_f.data(),
                                                           inner_f.data(), val_f.data()));
  out.coupling = SparseMatrix(Eigen::Map<const SparseMatrix>(static_cast<int>(nf), static_cast<int>(nc),
                                                             static_cast<int>(inner_c.size()), outer_c.data(),
                                                             inner_c.data(), val_c.data()));
  Vector full_rhs = system.rhs;
  out.rhs = out.lift(full_rhs, out.fixed_values);
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

SparseLU::SparseLU(SparseMatrix matrix, double tolerance)
    : matrix_(std::make_unique<SparseMatrix>(std::move(matrix))),
      tolerance_(tolerance),
      lu_(std::make_unique<Eigen::UmfPackLU<SparseMatrix>>()) {
  if (matrix_->rows() != matrix_->cols()) throw SolverError("matrix is not square", 0.0);
  matrix_->makeCompressed();
  if (matrix_->rows() == 0) return;
  lu_->compute(*matrix_);
  if (lu_->info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed (singular matrix?)", std::numeric_limits<double>::infinity());
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

Vector SparseLU::solve(const Vector& b) const {
  if (b.size() != matrix_->rows()) throw SolverError("rhs size mismatch", 0.0);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x = lu_->solve(b);
  Vector r = b - *matrix_ * x;
  double rel = r.norm() / bnorm;
  for (int it = 0; it < 4 && !(rel <= tolerance_); ++it) {
    x += lu_->solve(r);
    r = b - *matrix_ * x;
    rel = r.norm() / bnorm;
  }
  if (!(rel <= tolerance_))
    throw SolverError("sparse solve did not reach the residual tolerance (relative residual " +
                          std::to_string(rel) + ")",
                      rel);
  return x;
}

Vector solve_sparse(const SparseSystem& system) {
  if (system.dof_count() == 0) return system.expand(Vector());
  const SparseLU lu(system.matrix);
  return system.expand(lu.solve(system.rhs));
}

double LinearFunctional::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * x[static_cast<std::size_t>(nodes[k])];
  return s;
}

namespace {

SparseMatrix bordered(const SparseMatrix& k, const std::vector<LinearFunctional>& constraints) {
  const Index n = k.rows();
  const auto c = static_cast<Index>(constraints.size());
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(k.nonZeros()) + 2 * static_cast<std::size_t>(n));
  for (int col = 0; col < k.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) t.emplace_back(static_cast<int>(it.row()), col, it.value());
  for (Index j = 0; j < c; ++j) {
    const LinearFunctional& f = constraints[static_cast<std::size_t>(j)];
    if (f.nodes.size() != f.weights.size()) throw Error("internal", "functional node/weight mismatch");
    for (std::size_t q = 0; q < f.nodes.size(); ++q) {
      if (f.nodes[q] < 0 || f.nodes[q] >= n) throw Error("internal", "functional node out of range");
      t.emplace_back(static_cast<int>(n + j), static_cast<int>(f.nodes[q]), f.weights[q]);
      t.emplace_back(static_cast<int>(f.nodes[q]), static_cast<int>(n + j), f.weights[q]);
    }
  }
  SparseMatrix a(static_cast<int>(n + c), static_cast<int>(n + c));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseLU factor_bordered(SparseMatrix a, double tolerance) {
  try {
    return SparseLU(std::move(a), tolerance);
  } catch (const SolverError& e) {
    throw SolverError(std::string("rank-deficient constraint border: ") + e.what(), e.residual());
  }
}

}  // namespace

SaddleSolver::SaddleSolver(const SparseMatrix& k, std::vector<LinearFunctional> constraints, double tolerance)
    : n_(k.rows()), constraints_(std::move(constraints)), lu_(factor_bordered(bordered(k, constraints_), tolerance)) {}

SaddleSolution SaddleSolver::solve(const Vector& b, std::span<const double> targets) const {
  const auto c = static_cast<Index>(constraints_.size());
  if (static_cast<Index>(targets.size()) != c) throw Error("internal", "target count mismatch");
  Vector rhs(n_ + c);
  rhs.head(n_) = b;
  for (Index j = 0; j < c; ++j) rhs[n_ + j] = targets[static_cast<std::size_t>(j)];
  const Vector z = lu_.solve(rhs);
  SaddleSolution s{z.head(n_), z.tail(c)};
  for (Index j = 0; j < c; ++j) {
    const double got = constraints_[static_cast<std::size_t>(j)](std::span<const double>(s.x.data(), static_cast<std::size_t>(n_)));
    const double err = std::abs(got - targets[static_cast<std::size_t>(j)]);
    if (!(err <= 1e-10 * std::max(1.0, std::abs(targets[static_cast<std::size_t>(j)]))))
      throw SolverError("constraint residual too large", err);
  }
  return s;
}

SaddleSolution solve_saddle(const SparseMatrix& k, const Vector& b, std::vector<LinearFunctional> constraints,
                            std::span<const double> targets) {
  const SaddleSolver solver(k, std::move(constraints));
  return solver.solve(b, targets);
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_triplets(std::ostream& os, const SparseMatrix& matrix) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> rm(matrix);
  for (int r = 0; r < rm.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(rm, r); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << shortest(it.value()) << '\n';
}

void write_triplets(std::ostream& os, const Vector& vector) {
  for (Index i = 0; i < vector.size(); ++i) os << i << ' ' << shortest(vector[i]) << '\n';
}

}  // namespace crmsfem
