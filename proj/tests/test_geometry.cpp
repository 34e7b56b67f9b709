#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crmsfem/error.hpp"
#include "crmsfem/geometry.hpp"

using namespace crmsfem;

namespace {

bool brute_force(const PerforationSet& p, Point q) {
  for (const Rect& r : p.rects())
    if (q.x >= r.cx - r.w / 2 && q.x <= r.cx + r.w / 2 && q.y >= r.cy - r.h / 2 && q.y <= r.cy + r.h / 2) return true;
  return false;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST_CASE("periodic lattice") {
  const PerforationSet p = build_periodic_perforations(Domain2D::unit_square(), 32, 32, 0.025);
  CHECK(p.size() == 1024);
  CHECK(p.eps() == 0.025);
  CHECK(p.disjoint());
  CHECK(p.is_perforated({1.0 / 64, 1.0 / 64}));
  CHECK(p.is_perforated({1.0 / 64 + 0.0125, 1.0 / 64}));  // closed boundary
  CHECK_FALSE(p.is_perforated({1.0 / 32, 1.0 / 64}));
  // coarse lines x = k/8 run through the gaps
  for (int k = 1; k < 8; ++k)
    for (int s = 0; s < 100; ++s) CHECK_FALSE(p.is_perforated({k / 8.0, s / 100.0}));
}

TEST_CASE("half-pitch shift puts holes on the coarse lines") {
  const double pitch = 1.0 / 32;
  const PerforationSet p = build_periodic_perforations(Domain2D::unit_square(), 32, 32, 0.025, {pitch / 2, pitch / 2});
  CHECK(p.size() == 1024);
  CHECK(p.disjoint());
  CHECK(p.allow_boundary());
  for (int k = 1; k < 8; ++k) {
    CHECK(p.is_perforated({k / 8.0, 1.0 / 32}));
    CHECK(p.is_perforated({1.0 / 32, k / 8.0}));
  }
  // the column pushed onto x = 1 wraps to x = 0, keeping the count
  CHECK(p.is_perforated({0.0, 1.0 / 32}));
  CHECK_FALSE(p.is_perforated({1.0 - 0.005, 1.0 / 32}));
}

TEST_CASE("periodic layout rejects overlap") {
  CHECK(code_of([] { build_periodic_perforations(Domain2D::unit_square(), 32, 32, 1.0 / 32); }) ==
        "overlapping-perforations");
  CHECK(code_of([] { build_periodic_perforations(Domain2D::unit_square(), 4, 4, 0.0); }) == "perforation");
}

TEST_CASE("random layouts are seed-deterministic and disjoint") {
  const Domain2D box = Domain2D::centered_square();
  const PerforationSet a = build_random_perforations(box, 400, 0.025, 7);
  const PerforationSet b = build_random_perforations(box, 400, 0.025, 7);
  const PerforationSet c = build_random_perforations(box, 400, 0.025, 8);
  CHECK(a.size() == 400);
  CHECK(a == b);
  CHECK_FALSE(a.rects() == c.rects());
  CHECK(a.disjoint());
  for (const Rect& r : a.rects()) {
    CHECK(r.x0() > box.xmin);
    CHECK(r.x1() < box.xmax);
    CHECK(r.y0() > box.ymin);
    CHECK(r.y1() < box.ymax);
  }
  CHECK(build_random_perforations(box, 0, 0.1, 1).empty());
}

TEST_CASE("random layout gives up when the domain is full") {
  CHECK(code_of([] { build_random_perforations(Domain2D::unit_square(), 1000, 0.2, 1); }) == "placement-failure");
}

TEST_CASE("membership agrees with a brute-force scan") {
  const PerforationSet p = build_random_perforations(Domain2D::centered_square(), 300, 0.04, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const Point q{u(rng), u(rng)};
    REQUIRE(p.is_perforated(q) == brute_force(p, q));
  }
  // corners of every rect belong to it
  for (const Rect& r : p.rects()) CHECK(p.is_perforated({r.x1(), r.y1()}));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(PerforationSet(Domain2D::unit_square(), {{0.99, 0.5, 0.1, 0.1}}), GeometryError);
  CHECK_NOTHROW(PerforationSet(Domain2D::unit_square(), {{0.99, 0.5, 0.1, 0.1}}, true));
  CHECK_THROWS_AS(PerforationSet(Domain2D::unit_square(), {{0.5, 0.5, 0.0, 0.1}}), GeometryError);
  CHECK_THROWS_AS(PerforationSet({0, 0, 0, 1}, {}), GeometryError);
}

TEST_CASE("layout files round-trip bit for bit") {
  const PerforationSet p = build_random_perforations(Domain2D::centered_square(), 50, 0.0371, 99);
  std::stringstream ss;
  write_perforations(ss, p);
  const PerforationSet q = read_perforations(ss);
  CHECK(q == p);

  std::istringstream bad("domain 0 1 0 1\neps 0.1\nallow_boundary 0\ncount 2\n0.5 0.5 0.1 0.1\n");
  CHECK_THROWS_AS(read_perforations(bad), Error);
}

TEST_CASE("affine map scales centers and sizes") {
  const PerforationSet p = build_periodic_perforations(Domain2D::unit_square(), 4, 4, 0.1);
  const PerforationSet q = p.mapped_to(Domain2D::centered_square());
  CHECK(q.eps() == doctest::Approx(0.2));
  CHECK(q.rects()[0].cx == doctest::Approx(-0.75));
  CHECK(q.is_perforated({-0.75, -0.75}));
}

TEST_CASE("coefficient sampling: mask from cell centers and the three-way split") {
  const PerforationSet p = build_random_perforations(Domain2D::centered_square(), 60, 0.1, 5);
  ProblemData data;
  data.diffusion = 0.03;
  data.source = [](double x, double y) { return 1.0 + x * y; };
  const CartesianMesh mesh(Domain2D::centered_square(), 96, 96);
  const CoefficientField c = sample_coefficients(p, data, mesh);
  const double h = mesh.h;
  std::size_t masked = 0;
  for (Index j = 0; j < mesh.ny; ++j)
    for (Index i = 0; i < mesh.nx; ++i) {
      const auto k = static_cast<std::size_t>(mesh.cell(i, j));
      const Point q = mesh.cell_center(i, j);
      REQUIRE(c.mask[k] == (brute_force(p, q) ? 1 : 0));
      if (c.mask[k]) {
        ++masked;
        CHECK(c.a_beta[k] == 1.0 / h);
        CHECK(c.sigma_beta[k] == 1.0 / (h * h * h));
        CHECK(c.f_beta[k] == 0.0);
      } else {
        CHECK(c.a_beta[k] == 0.03);
        CHECK(c.sigma_beta[k] == 0.0);
        CHECK(c.f_beta[k] == 1.0 + q.x * q.y);
      }
    }
  CHECK(c.masked_count() == masked);
  CHECK(masked > 0);

  const auto nodes = c.masked_nodes();
  for (Index j = 1; j < mesh.ny; ++j)
    for (Index i = 1; i < mesh.nx; ++i) {
      const bool all = c.mask[static_cast<std::size_t>(mesh.cell(i - 1, j - 1))] &&
                       c.mask[static_cast<std::size_t>(mesh.cell(i, j - 1))] &&
                       c.mask[static_cast<std::size_t>(mesh.cell(i - 1, j))] &&
                       c.mask[static_cast<std::size_t>(mesh.cell(i, j))];
      REQUIRE((nodes[static_cast<std::size_t>(mesh.node(i, j))] != 0) == all);
    }
}

TEST_CASE("boundary data is side aware; corners take the horizontal side") {
  ProblemData data;
  data.boundary = [](Side s, double, double) { return s == Side::Top ? 1.0 : 0.0; };
  const CartesianMesh mesh(Domain2D::unit_square(), 4, 4);
  CHECK(data.g_at_node(mesh, 0, 4) == 1.0);
  CHECK(data.g_at_node(mesh, 4, 4) == 1.0);
  CHECK(data.g_at_node(mesh, 0, 3) == 0.0);
  CHECK(data.g_at_node(mesh, 2, 4) == 1.0);
  CHECK(data.g_at_node(mesh, 2, 0) == 0.0);
  ProblemData empty;
  CHECK(empty.g(Side::Left, 0.3, 0.2) == 0.0);
  CHECK(empty.f(0.3, 0.2) == 0.0);
  CHECK(empty.w(0.3, 0.2).x == 0.0);
}
