#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <vector>

#include "crmsfem/parallel.hpp"
#include "crmsfem/simd.hpp"

using namespace crmsfem;
using namespace crmsfem::simd;

namespace {

// 3x3 Gauss-Legendre on the unit cell: exact for bilinear^2.
double cell_square_integral(double a, double b, double c, double d) {
  const double g[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double w[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
  double s = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) {
      const double x = g[p], y = g[q];
      const double v = a * (1 - x) * (1 - y) + b * x * (1 - y) + c * (1 - x) * y + d * x * y;
      s += w[p] * w[q] * v * v;
    }
  return s;
}

struct RowData {
  std::vector<double> u_lo, u_hi, r_lo, r_hi;
  std::vector<std::uint8_t> mask;
};

RowData random_row(std::ptrdiff_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  RowData d;
  for (auto* v : {&d.u_lo, &d.u_hi, &d.r_lo, &d.r_hi}) {
    v->resize(static_cast<std::size_t>(n + 1));
    for (double& x : *v) x = u(rng);
  }
  d.mask.resize(static_cast<std::size_t>(n));
  for (auto& m : d.mask) m = (rng() % 3 == 0) ? 1 : 0;
  return d;
}

CellL2Sums run_row(Isa isa, const RowData& d, std::ptrdiff_t n) {
  CellL2Sums acc;
  cell_l2_row(isa, d.u_lo.data(), d.u_hi.data(), d.r_lo.data(), d.r_hi.data(), d.mask.data(), n, acc);
  return acc;
}

}  // namespace

TEST_CASE("cell_l2_row matches Gauss quadrature") {
  for (std::ptrdiff_t n : {1, 3, 4, 5, 17}) {
    const RowData d = random_row(n, static_cast<std::uint64_t>(n));
    CellL2Sums oracle;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double e = cell_square_integral(d.u_lo[k] - d.r_lo[k], d.u_lo[k + 1] - d.r_lo[k + 1],
                                            d.u_hi[k] - d.r_hi[k], d.u_hi[k + 1] - d.r_hi[k + 1]);
      const double r = cell_square_integral(d.r_lo[k], d.r_lo[k + 1], d.r_hi[k], d.r_hi[k + 1]);
      oracle.diff_full += e;
      oracle.ref_full += r;
      if (!d.mask[k]) {
        oracle.diff_excl += e;
        oracle.ref_excl += r;
      }
    }
    const CellL2Sums s = run_row(Isa::Scalar, d, n);
    CHECK(s.diff_full == doctest::Approx(oracle.diff_full).epsilon(1e-13));
    CHECK(s.diff_excl == doctest::Approx(oracle.diff_excl).epsilon(1e-13));
    CHECK(s.ref_full == doctest::Approx(oracle.ref_full).epsilon(1e-13));
    CHECK(s.ref_excl == doctest::Approx(oracle.ref_excl).epsilon(1e-13));
  }
}

TEST_CASE("cell_l2_row: avx2 agrees with scalar") {
  if (!cpu_supports(Isa::Avx2)) {
    MESSAGE("AVX2 not available, skipped");
    return;
  }
  for (std::ptrdiff_t n = 0; n <= 37; ++n) {
    const RowData d = random_row(n, 100 + static_cast<std::uint64_t>(n));
    const CellL2Sums a = run_row(Isa::Scalar, d, n);
    const CellL2Sums b = run_row(Isa::Avx2, d, n);
    CHECK(b.diff_full == doctest::Approx(a.diff_full).epsilon(1e-13));
    CHECK(b.diff_excl == doctest::Approx(a.diff_excl).epsilon(1e-13));
    CHECK(b.ref_full == doctest::Approx(a.ref_full).epsilon(1e-13));
    CHECK(b.ref_excl == doctest::Approx(a.ref_excl).epsilon(1e-13));
  }
}

TEST_CASE("stencil_row against a direct loop, both variants") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::ptrdiff_t count : {1, 2, 4, 7, 8, 9, 33}) {
    // rows carry one halo node on each side
    std::vector<double> rows_store[3], coef_store[9];
    for (auto& r : rows_store) {
      r.resize(static_cast<std::size_t>(count + 2));
      for (double& x : r) x = u(rng);
    }
    for (auto& c : coef_store) {
      c.resize(static_cast<std::size_t>(count));
      for (double& x : c) x = u(rng);
    }
    const double* coef[9];
    for (int o = 0; o < 9; ++o) coef[o] = coef_store[o].data();

    for (int missing = -1; missing < 3; missing += 2) {  // all rows, then no lower row
      const double* rows[3];
      for (int r = 0; r < 3; ++r) rows[r] = rows_store[r].data() + 1;
      if (missing == 1) rows[0] = nullptr;

      std::vector<double> oracle(static_cast<std::size_t>(count), 0.0);
      for (std::ptrdiff_t i = 0; i < count; ++i)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!rows[dj + 1]) continue;
          for (int di = -1; di <= 1; ++di)
            oracle[static_cast<std::size_t>(i)] +=
                coef[(di + 1) + 3 * (dj + 1)][i] * rows[dj + 1][i + di];
        }

      std::vector<double> y(static_cast<std::size_t>(count));
      stencil_row(Isa::Scalar, coef, rows, count, y.data());
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(oracle[i]).epsilon(1e-14));
      if (cpu_supports(Isa::Avx2)) {
        std::vector<double> z(static_cast<std::size_t>(count));
        stencil_row(Isa::Avx2, coef, rows, count, z.data());
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(y[i]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("isa names") {
  CHECK(isa_name(Isa::Scalar) == "scalar");
  CHECK(isa_name(Isa::Avx2) == "avx2");
  CHECK(cpu_supports(Isa::Scalar));
  CHECK(cpu_supports(active_isa()));
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, [&](std::ptrdiff_t i) { hits[static_cast<std::size_t>(i)]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::ptrdiff_t i) {
                    if (i == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  parallel_for(0, [](std::ptrdiff_t) { FAIL("called"); });
}
