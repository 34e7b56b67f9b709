#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crmsfem/coarse.hpp"
#include "crmsfem/error.hpp"

using namespace crmsfem;

namespace {

struct Pipeline {
  Hierarchy hierarchy;
  ProblemData data;
  CoefficientField coeffs;
  std::vector<ElementBasis> bases;
  CoarseSystem system;
  CoarseSolution solution;
};

Pipeline solve(Index NX, Index m, const PerforationSet& perfs, ProblemData data, BasisKind kind, bool bubble,
               const MsfemOptions& options = {}) {
  Pipeline p;
  p.hierarchy = build_hierarchy(perfs.domain(), NX, NX, m);
  p.data = std::move(data);
  p.coeffs = sample_coefficients(perfs, p.data, p.hierarchy.fine);
  p.bases = compute_bases(p.hierarchy.coarse, p.coeffs, p.data.velocity, kind, bubble, options);
  p.system = assemble_coarse(p.hierarchy.coarse, p.bases);
  const SparseSystem c = apply_boundary(p.system, p.hierarchy.coarse, p.hierarchy.fine, p.data);
  p.solution = solve_and_reconstruct(c, p.system, p.hierarchy, p.bases);
  return p;
}

PerforationSet lattice(Index n, double eps) { return build_periodic_perforations(Domain2D::unit_square(), n, n, eps); }

ProblemData linear_data(double a, double b, double c) {
  ProblemData d;
  d.boundary = [=](Side, double x, double y) { return a + b * x + c * y; };
  return d;
}

}  // namespace

TEST_CASE("element DOF maps follow the edge and node numbering") {
  const Hierarchy h = build_hierarchy(Domain2D::unit_square(), 3, 3, 2);
  const CoarseMesh& c = h.coarse;
  for (Index J = 0; J < 3; ++J)
    for (Index I = 0; I < 3; ++I) {
      const Index e = c.element(I, J);
      const auto cr = element_dofs(c, BasisKind::CrouzeixRaviart, true, e);
      CHECK(cr == std::vector<Index>{c.horizontal_edge(I, J), c.vertical_edge(I + 1, J), c.horizontal_edge(I, J + 1),
                                     c.vertical_edge(I, J), c.edge_count() + e});
      const auto lin = element_dofs(c, BasisKind::LinearNodal, false, e);
      CHECK(lin == std::vector<Index>{c.node(I, J), c.node(I + 1, J), c.node(I, J + 1), c.node(I + 1, J + 1)});
    }
}

TEST_CASE("coarse system sizes and mixed bases") {
  const Pipeline p = solve(4, 8, lattice(8, 0.05), linear_data(0, 0, 0), BasisKind::CrouzeixRaviart, true);
  CHECK(p.system.primary_count == 40);
  CHECK(p.system.bubble_count == 16);
  CHECK(p.system.size() == 56);
  CHECK(p.solution.primary_count() == 40);

  std::vector<ElementBasis> mixed = p.bases;
  mixed[3].bubble.clear();
  try {
    assemble_coarse(p.hierarchy.coarse, mixed);
    FAIL("expected mixed-basis");
  } catch (const Error& e) {
    CHECK(e.code() == "mixed-basis");
  }
}

TEST_CASE("CR reconstruction is continuous in edge means") {
  ProblemData d;
  d.diffusion = 0.5;
  d.source = [](double x, double y) { return 1.0 + x - y; };
  d.velocity = [](double x, double y) { return Vec2{y - 0.5, 0.5 - x}; };
  d.boundary = [](Side s, double x, double) { return s == Side::Top ? 1.0 : x * 0.25; };
  const Pipeline p = solve(4, 16, lattice(8, 0.05), d, BasisKind::CrouzeixRaviart, true);
  const CoarseMesh& c = p.hierarchy.coarse;
  for (const CoarseEdge& e : c.edges) {
    const double v = p.solution.edge_trace_means[static_cast<std::size_t>(e.id)];
    if (e.on_boundary())
      CHECK(v == doctest::Approx(boundary_edge_mean(c, p.hierarchy.fine, d, e.id)).epsilon(1e-8));
    else
      CHECK(std::abs(v) <= 1e-8);
    // the edge unknown is the mean of either trace
    CHECK(p.solution.dofs[e.id] == doctest::Approx(
        local_edge_mean(p.solution.element_fields[static_cast<std::size_t>(e.elements[0] >= 0 ? e.elements[0] : e.elements[1])], c.m,
                        e.elements[0] >= 0 ? (e.horizontal ? LocalEdge::Top : LocalEdge::Right)
                                           : (e.horizontal ? LocalEdge::Bottom : LocalEdge::Left))).epsilon(1e-8));
  }
}

TEST_CASE("boundary edge means of linear data are midpoint values") {
  const Hierarchy h = build_hierarchy(Domain2D::centered_square(), 4, 4, 6);
  const ProblemData d = linear_data(0.5, 2.0, -1.0);
  for (const CoarseEdge& e : h.coarse.edges) {
    if (!e.on_boundary()) continue;
    const double xm = 0.5 * (e.start.x + e.end.x), ym = 0.5 * (e.start.y + e.end.y);
    CHECK(boundary_edge_mean(h.coarse, h.fine, d, e.id) == doctest::Approx(0.5 + 2.0 * xm - ym));
  }
}

TEST_CASE("linear data without holes is reproduced by every method") {
  const PerforationSet none(Domain2D::unit_square(), {});
  const auto u = [](double x, double y) { return 0.2 + 0.9 * x - 0.4 * y; };
  for (BasisKind kind : {BasisKind::CrouzeixRaviart, BasisKind::LinearNodal})
    for (bool bubble : {false, true}) {
      const Pipeline p = solve(2, 8, none, linear_data(0.2, 0.9, -0.4), kind, bubble);
      const CartesianMesh& f = p.hierarchy.fine;
      double err = 0.0;
      for (Index j = 0; j <= f.ny; ++j)
        for (Index i = 0; i <= f.nx; ++i) {
          const Point q = f.node_point(i, j);
          err = std::max(err, std::abs(p.solution.averaged(i, j) - u(q.x, q.y)));
        }
      CHECK(err < 1e-9);
    }
  const Hierarchy h = build_hierarchy(Domain2D::unit_square(), 1, 1, 16);
  const ProblemData d = linear_data(0.2, 0.9, -0.4);
  const ScalarField r = reference_solve(sample_coefficients(none, d, h.fine), d);
  CHECK(r(5, 7) == doctest::Approx(u(5.0 / 16, 7.0 / 16)));
}

TEST_CASE("nodal baseline on one element: boundary nodes take g") {
  ProblemData d = linear_data(1.0, 0.0, 0.0);
  d.boundary = [](Side s, double, double) { return s == Side::Bottom ? 2.0 : 1.0; };
  const Pipeline p = solve(2, 4, lattice(4, 0.1), d, BasisKind::LinearNodal, false);
  const CoarseMesh& c = p.hierarchy.coarse;
  CHECK(p.solution.dofs[c.node(0, 0)] == 2.0);  // corner: horizontal side wins
  CHECK(p.solution.dofs[c.node(2, 0)] == 2.0);
  CHECK(p.solution.dofs[c.node(0, 1)] == 1.0);
  CHECK(p.solution.dofs[c.node(2, 2)] == 1.0);
  CHECK(std::isfinite(p.solution.dofs[c.node(1, 1)]));
}

TEST_CASE("void DOFs: bubbles of elements swallowed by a hole") {
  // one hole covering element (1,1) of a 4x4 coarse mesh entirely
  const PerforationSet hole(Domain2D::unit_square(), {{0.375, 0.375, 0.3, 0.3}});
  ProblemData d;
  d.source = [](double, double) { return 1.0; };
  MsfemOptions perforated;
  perforated.form = CoarseForm::Perforated;
  const Pipeline p = solve(4, 8, hole, d, BasisKind::CrouzeixRaviart, true, perforated);
  const auto v = void_dofs(p.system);
  const Index bubble = p.system.primary_count + p.hierarchy.coarse.element(1, 1);
  CHECK(std::find(v.begin(), v.end(), bubble) != v.end());
  CHECK(p.solution.dofs[bubble] == 0.0);
  CHECK(p.solution.dofs.allFinite());

  // penalized form: edge DOFs keep energy, the bubble has no source at all
  const Pipeline q = solve(4, 8, hole, d, BasisKind::CrouzeixRaviart, true);
  CHECK(void_dofs(q.system) == std::vector<Index>{bubble});
}

TEST_CASE("averaged field agrees with element fields at shared nodes of a continuous basis") {
  const PerforationSet none(Domain2D::unit_square(), {});
  ProblemData d;
  d.source = [](double, double) { return 1.0; };
  const Pipeline p = solve(3, 6, none, d, BasisKind::LinearNodal, true);
  const CoarseMesh& c = p.hierarchy.coarse;
  // the nodal baseline is conforming: element traces coincide
  const auto& left = p.solution.element_fields[static_cast<std::size_t>(c.element(0, 0))];
  const auto& right = p.solution.element_fields[static_cast<std::size_t>(c.element(1, 0))];
  for (Index b = 0; b <= 6; ++b)
    CHECK(left[static_cast<std::size_t>(6 + b * 7)] == doctest::Approx(right[static_cast<std::size_t>(b * 7)]).epsilon(1e-10));
  CHECK(p.solution.averaged(6, 3) == doctest::Approx(left[static_cast<std::size_t>(6 + 3 * 7)]).epsilon(1e-10));
}
