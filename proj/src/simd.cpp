#include "crmsfem/simd.hpp"

#include <cstdlib>
#include <string>

#if defined(__x86_64__) || defined(_M_X64)
#define CRMSFEM_X86 1
#include <immintrin.h>
#else
#define CRMSFEM_X86 0
#endif

namespace crmsfem::simd {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if CRMSFEM_X86
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  static const Isa isa = [] {
    if (const char* env = std::getenv("CRMSFEM_SIMD")) {
      const std::string v(env);
      if (v == "scalar") return Isa::Scalar;
      if (v == "avx2" && cpu_supports(Isa::Avx2)) return Isa::Avx2;
    }
    return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

namespace scalar {

// Exact integral of a bilinear function over the unit cell from its corner
// values a=(0,0) b=(1,0) c=(0,1) d=(1,1).
static inline double bilinear_sq(double a, double b, double c, double d) {
  return (4.0 * (a * a + b * b + c * c + d * d) + 4.0 * (a * b + a * c + b * d + c * d) +
          2.0 * (a * d + b * c)) / 36.0;
}

void cell_l2_row(const double* u_lo, const double* u_hi, const double* r_lo, const double* r_hi,
                 const std::uint8_t* mask, std::ptrdiff_t ncells, CellL2Sums& acc) {
  for (std::ptrdiff_t c = 0; c < ncells; ++c) {
    const double dq = bilinear_sq(u_lo[c] - r_lo[c], u_lo[c + 1] - r_lo[c + 1], u_hi[c] - r_hi[c],
                                  u_hi[c + 1] - r_hi[c + 1]);
    const double rq = bilinear_sq(r_lo[c], r_lo[c + 1], r_hi[c], r_hi[c + 1]);
    acc.diff_full += dq;
    acc.ref_full += rq;
    if (mask[c] == 0) {
      acc.diff_excl += dq;
      acc.ref_excl += rq;
    }
  }
}

void stencil_row(const double* const coef[9], const double* const rows[3], std::ptrdiff_t count,
                 double* y) {
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (int dj = 0; dj < 3; ++dj) {
      const double* row = rows[dj];
      if (row == nullptr) continue;
      for (int di = 0; di < 3; ++di) s += coef[di + 3 * dj][i] * row[i + di - 1];
    }
    y[i] = s;
  }
}

}  // namespace scalar

namespace avx2 {

#if CRMSFEM_X86

__attribute__((target("avx2,fma"))) static inline __m256d bilinear_sq4(__m256d a, __m256d b, __m256d c,
                                                                       __m256d d) {
  const __m256d sq = _mm256_fmadd_pd(a, a, _mm256_fmadd_pd(b, b, _mm256_fmadd_pd(c, c, _mm256_mul_pd(d, d))));
  const __m256d adj = _mm256_fmadd_pd(a, b, _mm256_fmadd_pd(a, c, _mm256_fmadd_pd(b, d, _mm256_mul_pd(c, d))));
  const __m256d diag = _mm256_fmadd_pd(a, d, _mm256_mul_pd(b, c));
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d s = _mm256_fmadd_pd(four, sq, _mm256_fmadd_pd(four, adj, _mm256_mul_pd(two, diag)));
  return _mm256_div_pd(s, _mm256_set1_pd(36.0));
}

__attribute__((target("avx2,fma"))) static inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

__attribute__((target("avx2,fma"))) void cell_l2_row(const double* u_lo, const double* u_hi,
                                                      const double* r_lo, const double* r_hi,
                                                      const std::uint8_t* mask, std::ptrdiff_t ncells,
                                                      CellL2Sums& acc) {
  __m256d dfull = _mm256_setzero_pd();
  __m256d dexcl = _mm256_setzero_pd();
  __m256d rfull = _mm256_setzero_pd();
  __m256d rexcl = _mm256_setzero_pd();
  const __m256d zero = _mm256_setzero_pd();
  std::ptrdiff_t c = 0;
  for (; c + 4 <= ncells; c += 4) {
    const __m256d ra = _mm256_loadu_pd(r_lo + c);
    const __m256d rb = _mm256_loadu_pd(r_lo + c + 1);
    const __m256d rc = _mm256_loadu_pd(r_hi + c);
    const __m256d rd = _mm256_loadu_pd(r_hi + c + 1);
    const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(u_lo + c), ra);
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(u_lo + c + 1), rb);
    const __m256d dc = _mm256_sub_pd(_mm256_loadu_pd(u_hi + c), rc);
    const __m256d dd = _mm256_sub_pd(_mm256_loadu_pd(u_hi + c + 1), rd);
    const __m256d dq = bilinear_sq4(da, db, dc, dd);
    const __m256d rq = bilinear_sq4(ra, rb, rc, rd);

    std::int32_t bytes = 0;
    __builtin_memcpy(&bytes, mask + c, 4);
    const __m256d mk = _mm256_cvtepi32_pd(_mm_cvtepu8_epi32(_mm_cvtsi32_si128(bytes)));
    const __m256d keep = _mm256_cmp_pd(mk, zero, _CMP_EQ_OQ);

    dfull = _mm256_add_pd(dfull, dq);
    rfull = _mm256_add_pd(rfull, rq);
    dexcl = _mm256_add_pd(dexcl, _mm256_and_pd(dq, keep));
    rexcl = _mm256_add_pd(rexcl, _mm256_and_pd(rq, keep));
  }
  CellL2Sums tail;
  scalar::cell_l2_row(u_lo + c, u_hi + c, r_lo + c, r_hi + c, mask + c, ncells - c, tail);
  acc.diff_full += hsum(dfull) + tail.diff_full;
  acc.diff_excl += hsum(dexcl) + tail.diff_excl;
  acc.ref_full += hsum(rfull) + tail.ref_full;
  acc.ref_excl += hsum(rexcl) + tail.ref_excl;
}

__attribute__((target("avx2,fma"))) void stencil_row(const double* const coef[9],
                                                      const double* const rows[3],
                                                      std::ptrdiff_t count, double* y) {
  std::ptrdiff_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d s = _mm256_setzero_pd();
    for (int dj = 0; dj < 3; ++dj) {
      const double* row = rows[dj];
      if (row == nullptr) continue;
      for (int di = 0; di < 3; ++di)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(coef[di + 3 * dj] + i), _mm256_loadu_pd(row + i + di - 1), s);
    }
    _mm256_storeu_pd(y + i, s);
  }
  if (i < count) {
    const double* c2[9];
    for (int o = 0; o < 9; ++o) c2[o] = coef[o] + i;
    const double* r2[3];
    for (int k = 0; k < 3; ++k) r2[k] = rows[k] ? rows[k] + i : nullptr;
    scalar::stencil_row(c2, r2, count - i, y + i);
  }
}

#else

void cell_l2_row(const double* u_lo, const double* u_hi, const double* r_lo, const double* r_hi,
                 const std::uint8_t* mask, std::ptrdiff_t ncells, CellL2Sums& acc) {
  scalar::cell_l2_row(u_lo, u_hi, r_lo, r_hi, mask, ncells, acc);
}

void stencil_row(const double* const coef[9], const double* const rows[3], std::ptrdiff_t count,
                 double* y) {
  scalar::stencil_row(coef, rows, count, y);
}

#endif

}  // namespace avx2

void cell_l2_row(Isa isa, const double* u_lo, const double* u_hi, const double* r_lo,
                 const double* r_hi, const std::uint8_t* mask, std::ptrdiff_t ncells,
                 CellL2Sums& acc) {
  if (isa == Isa::Avx2)
    avx2::cell_l2_row(u_lo, u_hi, r_lo, r_hi, mask, ncells, acc);
  else
    scalar::cell_l2_row(u_lo, u_hi, r_lo, r_hi, mask, ncells, acc);
}

void stencil_row(Isa isa, const double* const coef[9], const double* const rows[3],
                 std::ptrdiff_t count, double* y) {
  if (isa == Isa::Avx2)
    avx2::stencil_row(coef, rows, count, y);
  else
    scalar::stencil_row(coef, rows, count, y);
}

}  // namespace crmsfem::simd
