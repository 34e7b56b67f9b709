#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "crmsfem/error.hpp"
#include "crmsfem/fem.hpp"

using namespace crmsfem;

namespace {

CoefficientField uniform(const CartesianMesh& mesh, double a, double sigma, double f = 0.0) {
  CoefficientField c;
  c.mesh = mesh;
  const auto n = static_cast<std::size_t>(mesh.cell_count());
  c.a_beta.assign(n, a);
  c.sigma_beta.assign(n, sigma);
  c.f_beta.assign(n, f);
  c.mask.assign(n, 0);
  return c;
}

Eigen::MatrixXd dense(const StencilOperator& op) { return Eigen::MatrixXd(op.to_sparse()); }

std::vector<Index> boundary_nodes(const CartesianMesh& mesh) {
  std::vector<Index> out;
  for (Index j = 0; j <= mesh.ny; ++j)
    for (Index i = 0; i <= mesh.nx; ++i)
      if (mesh.on_boundary(i, j)) out.push_back(mesh.node(i, j));
  return out;
}

Vector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("Q1 element stiffness and mass on one cell") {
  const CartesianMesh mesh({0, 0.25, 0, 0.25}, 1, 1);
  const Eigen::MatrixXd k = dense(assemble_operator(uniform(mesh, 1.0, 0.0), {}));
  // nodes (0,0) (1,0) (0,1) (1,1)
  CHECK(k(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(k(0, 1) == doctest::Approx(-1.0 / 6));
  CHECK(k(0, 2) == doctest::Approx(-1.0 / 6));
  CHECK(k(0, 3) == doctest::Approx(-1.0 / 3));
  CHECK(k(3, 0) == doctest::Approx(-1.0 / 3));

  const double h2 = 0.25 * 0.25;
  const Eigen::MatrixXd m = dense(assemble_operator(uniform(mesh, 1e-300, 1.0), {}));
  CHECK(m(0, 0) == doctest::Approx(h2 / 9));
  CHECK(m(0, 1) == doctest::Approx(h2 / 18));
  CHECK(m(0, 3) == doctest::Approx(h2 / 36));
  CHECK(m.sum() == doctest::Approx(h2));
}

TEST_CASE("diffusion-reaction operator is symmetric positive semidefinite") {
  const CartesianMesh mesh(Domain2D::unit_square(), 6, 6);
  CoefficientField c = uniform(mesh, 0.5, 0.0);
  std::mt19937_64 rng(1);
  for (std::size_t k = 0; k < c.a_beta.size(); ++k) c.a_beta[k] = 0.1 + static_cast<double>(rng() % 100) / 50;
  const Eigen::MatrixXd k = dense(assemble_operator(c, {}));
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-13);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  // constants are in the kernel without reaction
  CHECK((k * Eigen::VectorXd::Ones(k.rows())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant advection is skew away from the boundary") {
  const CartesianMesh mesh(Domain2D::unit_square(), 5, 5);
  const CoefficientField c = uniform(mesh, 1.0, 0.0);
  const Eigen::MatrixXd k0 = dense(assemble_operator(c, {}));
  const Eigen::MatrixXd kw = dense(assemble_operator(c, [](double, double) { return Vec2{0.7, -1.3}; }));
  const Eigen::MatrixXd adv = kw - k0;
  const Eigen::MatrixXd sym = adv + adv.transpose();
  CHECK(adv.cwiseAbs().maxCoeff() > 1e-3);
  for (Index j = 1; j < mesh.ny; ++j)
    for (Index i = 1; i < mesh.nx; ++i) CHECK(sym.row(mesh.node(i, j)).cwiseAbs().maxCoeff() < 1e-13);
  // w.grad(1) = 0
  CHECK((adv * Eigen::VectorXd::Ones(adv.rows())).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("stencil apply, form and sparse export agree") {
  const CartesianMesh mesh({0, 1.75, 0, 1}, 7, 4);
  CoefficientField c = uniform(mesh, 1.0, 2.0);
  c.mask[3] = 1;
  c.a_beta[3] = 100.0;
  const StencilOperator op = assemble_operator(c, [](double x, double y) { return Vec2{y, -x}; });
  const SparseMatrix s = op.to_sparse();
  const Vector x = random_vector(op.size(), 2);
  const Vector y = random_vector(op.size(), 3);
  const Vector a = op.apply(x);
  const Vector b = s * x;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op.form(std::span<const double>(y.data(), y.size()), std::span<const double>(x.data(), x.size())) ==
        doctest::Approx(y.dot(b)).epsilon(1e-12));
}

TEST_CASE("unmasked cell set drops perforated cells") {
  const CartesianMesh mesh({0, 2, 0, 1}, 2, 1);
  CoefficientField c = uniform(mesh, 1.0, 0.0);
  c.mask[1] = 1;
  const Eigen::MatrixXd k = dense(assemble_operator(c, {}, CellBlock::whole(mesh), CellSet::Unmasked));
  // node (2,0) only touches the masked cell
  CHECK(k.row(mesh.node(2, 0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(k(0, 0) == doctest::Approx(2.0 / 3));
}

TEST_CASE("load vector integrates the cell source") {
  const CartesianMesh mesh(Domain2D::centered_square(), 4, 4);
  std::vector<double> f(16, 3.0);
  const Vector b = assemble_load(mesh, f, CellBlock::whole(mesh));
  CHECK(b.sum() == doctest::Approx(12.0));
  CHECK(b[mesh.node(0, 0)] == doctest::Approx(3.0 * mesh.h * mesh.h / 4));
  const Vector part = assemble_load(mesh, f, {1, 1, 2, 2});
  CHECK(part.size() == 9);
  CHECK(part.sum() == doctest::Approx(3.0));
}

TEST_CASE("Dirichlet elimination: duplicates and conflicts") {
  const CartesianMesh mesh(Domain2D::unit_square(), 2, 2);
  const StencilOperator op = assemble_operator(uniform(mesh, 1.0, 0.0), {});
  const SparseSystem base = make_system(op.to_sparse(), Vector::Zero(op.size()));
  const std::vector<Index> nodes{0, 1, 1};
  const std::vector<double> same{1.0, 2.0, 2.0};
  const SparseSystem s = apply_dirichlet(base, nodes, same);
  CHECK(s.dof_count() == 7);
  const std::vector<double> clash{1.0, 2.0, 2.5};
  try {
    apply_dirichlet(base, nodes, clash);
    FAIL("expected a conflict");
  } catch (const Error& e) {
    CHECK(e.code() == "dirichlet-conflict");
  }
}

TEST_CASE("bilinear data is reproduced exactly") {
  const CartesianMesh mesh({-1, 1, -1, 1}, 12, 12);
  const auto u = [](double x, double y) { return 0.3 + 1.1 * x - 0.7 * y + 0.5 * x * y; };
  const StencilOperator op = assemble_operator(uniform(mesh, 2.5, 0.0), {});
  const auto nodes = boundary_nodes(mesh);
  std::vector<double> values;
  for (Index n : nodes) {
    const Index i = n % (mesh.nx + 1), j = n / (mesh.nx + 1);
    const Point p = mesh.node_point(i, j);
    values.push_back(u(p.x, p.y));
  }
  const Vector x = solve_sparse(apply_dirichlet(make_system(op.to_sparse(), Vector::Zero(op.size())), nodes, values));
  double err = 0.0;
  for (Index j = 0; j <= mesh.ny; ++j)
    for (Index i = 0; i <= mesh.nx; ++i) {
      const Point p = mesh.node_point(i, j);
      err = std::max(err, std::abs(x[mesh.node(i, j)] - u(p.x, p.y)));
    }
  CHECK(err < 1e-11);
}

TEST_CASE("manufactured solution converges at second order") {
  const double pi = std::numbers::pi;
  std::vector<double> errs;
  for (Index n : {16, 32, 64}) {
    const CartesianMesh mesh(Domain2D::unit_square(), n, n);
    CoefficientField c = uniform(mesh, 1.0, 0.0);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const Point p = mesh.cell_center(i, j);
        c.f_beta[static_cast<std::size_t>(mesh.cell(i, j))] = 2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
      }
    const StencilOperator op = assemble_operator(c, {});
    const auto nodes = boundary_nodes(mesh);
    const std::vector<double> zero(nodes.size(), 0.0);
    const Vector x = solve_sparse(apply_dirichlet(make_system(op.to_sparse(), assemble_load(c)), nodes, zero));
    double err = 0.0;
    for (Index j = 0; j <= n; ++j)
      for (Index i = 0; i <= n; ++i) {
        const Point p = mesh.node_point(i, j);
        err = std::max(err, std::abs(x[mesh.node(i, j)] - std::sin(pi * p.x) * std::sin(pi * p.y)));
      }
    errs.push_back(err);
  }
  CHECK(std::log2(errs[0] / errs[1]) > 1.9);
  CHECK(std::log2(errs[1] / errs[2]) > 1.9);
}

TEST_CASE("bordered solve satisfies both blocks") {
  const CartesianMesh mesh(Domain2D::unit_square(), 6, 6);
  const StencilOperator op = assemble_operator(uniform(mesh, 1.0, 0.0), [](double, double) { return Vec2{1, 0}; });
  const SparseMatrix k = op.to_sparse();
  std::vector<LinearFunctional> cs;
  for (Index side = 0; side < 4; ++side) {
    LinearFunctional f;
    for (Index t = 0; t <= 6; ++t) {
      const Index i = side == 0 ? t : side == 1 ? 6 : side == 2 ? t : 0;
      const Index j = side == 0 ? 0 : side == 1 ? t : side == 2 ? 6 : t;
      f.nodes.push_back(mesh.node(i, j));
      f.weights.push_back((t == 0 || t == 6) ? 1.0 / 12 : 1.0 / 6);
    }
    cs.push_back(f);
  }
  const Vector b = random_vector(op.size(), 9);
  const std::vector<double> d{1.0, -0.5, 0.25, 2.0};
  const SaddleSolution s = solve_saddle(k, b, cs, d);
  Vector r = k * s.x - b;
  for (std::size_t c = 0; c < cs.size(); ++c)
    for (std::size_t q = 0; q < cs[c].nodes.size(); ++q)
      r[cs[c].nodes[q]] += cs[c].weights[q] * s.multipliers[static_cast<Index>(c)];
  CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  for (std::size_t c = 0; c < cs.size(); ++c)
    CHECK(cs[c](std::span<const double>(s.x.data(), s.x.size())) == doctest::Approx(d[c]).epsilon(1e-10));
}

TEST_CASE("singular system is reported as a solver failure") {
  const CartesianMesh mesh(Domain2D::unit_square(), 3, 3);
  const StencilOperator op = assemble_operator(uniform(mesh, 1.0, 0.0), {});
  CHECK_THROWS_AS(solve_sparse(make_system(op.to_sparse(), Vector::Ones(op.size()))), SolverError);
}

TEST_CASE("triplet export is sorted") {
  SparseMatrix m(2, 2);
  m.insert(1, 0) = 2.5;
  m.insert(0, 1) = -1.0;
  m.makeCompressed();
  std::ostringstream os;
  write_triplets(os, m);
  CHECK(os.str() == "0 1 -1\n1 0 2.5\n");
}
