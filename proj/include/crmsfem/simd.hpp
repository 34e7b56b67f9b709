#pragma once

// Data-parallel inner loops with a portable scalar reference and an AVX2
// variant. The variant is chosen once at runtime from the CPU feature bits;
// CRMSFEM_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace crmsfem::simd {

enum class Isa { Scalar, Avx2 };

bool cpu_supports(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);

/// Accumulated squared L2 integrals over a set of cells, in units of the
/// cell area (multiply by h^2).
struct CellL2Sums {
  double diff_full = 0.0;
  double diff_excl = 0.0;
  double ref_full = 0.0;
  double ref_excl = 0.0;

  CellL2Sums& operator+=(const CellL2Sums& o) {
    diff_full += o.diff_full;
    diff_excl += o.diff_excl;
    ref_full += o.ref_full;
    ref_excl += o.ref_excl;
    return *this;
  }
};

/// One row of `ncells` cells. u_lo/u_hi are the nodal values of the
/// approximation on the lower and upper node rows (ncells+1 entries each),
/// r_lo/r_hi the reference. Masked cells (mask != 0) only count toward the
/// *_full sums. Each cell integral is exact for bilinear interpolants.
void cell_l2_row(Isa isa, const double* u_lo, const double* u_hi, const double* r_lo,
                 const double* r_hi, const std::uint8_t* mask, std::ptrdiff_t ncells,
                 CellL2Sums& acc);

/// y[i] = sum_o coef[o][i] * x_o[i] for i in [0, count), where the nine
/// offsets o = (di+1) + 3*(dj+1) read x_o = row_{dj}[i + di]. `rows[0..2]`
/// point at the nodes of rows j-1, j, j+1 aligned to the first output node;
/// a null row pointer means that row does not exist (its coefficients are
/// ignored).
void stencil_row(Isa isa, const double* const coef[9], const double* const rows[3],
                 std::ptrdiff_t count, double* y);

/// Scalar reference implementations, always available.
namespace scalar {
void cell_l2_row(const double* u_lo, const double* u_hi, const double* r_lo, const double* r_hi,
                 const std::uint8_t* mask, std::ptrdiff_t ncells, CellL2Sums& acc);
void stencil_row(const double* const coef[9], const double* const rows[3], std::ptrdiff_t count,
                 double* y);
}  // namespace scalar

namespace avx2 {
void cell_l2_row(const double* u_lo, const double* u_hi, const double* r_lo, const double* r_hi,
                 const std::uint8_t* mask, std::ptrdiff_t ncells, CellL2Sums& acc);
void stencil_row(const double* const coef[9], const double* const rows[3], std::ptrdiff_t count,
                 double* y);
}  // namespace avx2

}  // namespace crmsfem::simd
