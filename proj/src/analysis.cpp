#include "crmsfem/analysis.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "crmsfem/error.hpp"
#include "crmsfem/parallel.hpp"
#include "crmsfem/simd.hpp"

namespace crmsfem {

std::string method_name(Method method) {
  switch (method) {
    case Method::CrBubble: return "cr_bubble";
    case Method::CrPlain: return "cr_plain";
    case Method::LinearBubble: return "linear_bubble";
    case Method::LinearPlain: return "linear_plain";
    case Method::Reference: return "reference";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::CrBubble, Method::CrPlain, Method::LinearBubble, Method::LinearPlain, Method::Reference})
    if (method_name(m) == name) return m;
  throw ConfigError("unknown method '" + name + "'", 0, "method");
}

BasisKind method_kind(Method method) {
  return (method == Method::LinearBubble || method == Method::LinearPlain) ? BasisKind::LinearNodal
                                                                            : BasisKind::CrouzeixRaviart;
}

bool method_has_bubble(Method method) { return method == Method::CrBubble || method == Method::LinearBubble; }

namespace {

RelativeL2 finish(double diff, double ref, double area) {
  if (ref > 0.0) return {std::sqrt(diff / ref), true};
  return {std::sqrt(diff * area), false};
}

ErrorNorms finish(const simd::CellL2Sums& s, double h) {
  return {finish(s.diff_excl, s.ref_excl, h * h), finish(s.diff_full, s.ref_full, h * h)};
}

void check_same_mesh(const CartesianMesh& a, const CartesianMesh& b) {
  if (a.nx != b.nx || a.ny != b.ny || a.domain.xmin != b.domain.xmin || a.domain.xmax != b.domain.xmax ||
      a.domain.ymin != b.domain.ymin || a.domain.ymax != b.domain.ymax)
    throw Error("mesh-mismatch", "fields live on different meshes");
}

}  // namespace

ErrorNorms relative_l2(const ScalarField& u, const ScalarField& uref, std::span<const std::uint8_t> mask) {
  check_same_mesh(u.mesh, uref.mesh);
  const CartesianMesh& mesh = u.mesh;
  if (static_cast<Index>(mask.size()) != mesh.cell_count()) throw Error("mesh-mismatch", "mask size");
  const simd::Isa isa = simd::active_isa();
  simd::CellL2Sums s;
  for (Index j = 0; j < mesh.ny; ++j) {
    const auto lo = static_cast<std::size_t>(mesh.node(0, j));
    const auto hi = static_cast<std::size_t>(mesh.node(0, j + 1));
    simd::cell_l2_row(isa, &u.values[lo], &u.values[hi], &uref.values[lo], &uref.values[hi],
                      &mask[static_cast<std::size_t>(mesh.cell(0, j))], mesh.nx, s);
  }
  return finish(s, mesh.h);
}

RelativeL2 relative_l2(const ScalarField& u, const ScalarField& uref, std::span<const std::uint8_t> mask,
                       Region region) {
  const ErrorNorms n = relative_l2(u, uref, mask);
  return region == Region::Full ? n.full : n.excl;
}

std::vector<double> prolong_block(std::span<const double> values, Index m, Index factor) {
  if (factor == 1) return {values.begin(), values.end()};
  const Index mf = m * factor;
  std::vector<double> out(static_cast<std::size_t>((mf + 1) * (mf + 1)));
  const double inv = 1.0 / static_cast<double>(factor);
  for (Index b = 0; b <= mf; ++b) {
    const Index cb = std::min(b / factor, m - 1);
    const double ty = static_cast<double>(b - cb * factor) * inv;
    for (Index a = 0; a <= mf; ++a) {
      const Index ca = std::min(a / factor, m - 1);
      const double tx = static_cast<double>(a - ca * factor) * inv;
      const auto at = [&](Index i, Index j) { return values[static_cast<std::size_t>(i + j * (m + 1))]; };
      out[static_cast<std::size_t>(a + b * (mf + 1))] =
          (1 - tx) * (1 - ty) * at(ca, cb) + tx * (1 - ty) * at(ca + 1, cb) + (1 - tx) * ty * at(ca, cb + 1) +
          tx * ty * at(ca + 1, cb + 1);
    }
  }
  return out;
}

ErrorNorms relative_l2(const CoarseSolution& u, const ScalarField& uref, std::span<const std::uint8_t> mask) {
  const CoarseMesh& coarse = u.hierarchy.coarse;
  const CartesianMesh& fine = u.hierarchy.fine;
  const CartesianMesh& ref = uref.mesh;
  if (ref.nx % fine.nx != 0 || ref.ny % fine.ny != 0 || ref.nx / fine.nx != ref.ny / fine.ny)
    throw Error("resolution-mismatch", "reference grid " + std::to_string(ref.nx) + "x" + std::to_string(ref.ny) +
                                           " is not an integer refinement of " + std::to_string(fine.nx) + "x" +
                                           std::to_string(fine.ny));
  if (static_cast<Index>(mask.size()) != ref.cell_count()) throw Error("mesh-mismatch", "mask size");
  const Index factor = ref.nx / fine.nx;
  const Index mf = coarse.m * factor;
  const simd::Isa isa = simd::active_isa();

  std::vector<simd::CellL2Sums> per_element(static_cast<std::size_t>(coarse.element_count()));
  parallel_for(coarse.element_count(), [&](Index k) {
    const CoarseElement& el = coarse.elements[static_cast<std::size_t>(k)];
    const std::vector<double> field = prolong_block(u.element_fields[static_cast<std::size_t>(k)], coarse.m, factor);
    simd::CellL2Sums s;
    for (Index b = 0; b < mf; ++b) {
      const Index gi = el.I * mf;
      const Index gj = el.J * mf + b;
      simd::cell_l2_row(isa, &field[static_cast<std::size_t>(b * (mf + 1))],
                        &field[static_cast<std::size_t>((b + 1) * (mf + 1))],
                        &uref.values[static_cast<std::size_t>(ref.node(gi, gj))],
                        &uref.values[static_cast<std::size_t>(ref.node(gi, gj + 1))],
                        &mask[static_cast<std::size_t>(ref.cell(gi, gj))], mf, s);
    }
    per_element[static_cast<std::size_t>(k)] = s;
  });
  simd::CellL2Sums total;
  for (const auto& s : per_element) total += s;
  return finish(total, ref.h);
}

std::string CoarseConfig::label() const { return std::to_string(NX) + "x" + std::to_string(NY); }

CoarseSolution run_msfem(const Problem& problem, Method method, const CoarseConfig& config,
                         const MsfemOptions& options) {
  if (method == Method::Reference) throw ConfigError("reference is not a multiscale method", 0, "method");
  const Hierarchy hierarchy = build_hierarchy(problem.domain, config.NX, config.NY, config.m);
  const CoefficientField coeffs = sample_coefficients(problem.perforations, problem.data, hierarchy.fine);
  const std::vector<ElementBasis> bases =
      compute_bases(hierarchy.coarse, coeffs, problem.data.velocity, method_kind(method), method_has_bubble(method), options);
  const CoarseSystem system = assemble_coarse(hierarchy.coarse, bases);
  const SparseSystem constrained = apply_boundary(system, hierarchy.coarse, hierarchy.fine, problem.data);
  return solve_and_reconstruct(constrained, system, hierarchy, bases);
}

ScalarField run_reference(const Problem& problem, Index resolution, CoefficientField* coeffs_out) {
  const double ny_real = static_cast<double>(resolution) * problem.domain.height() / problem.domain.width();
  const auto ny = static_cast<Index>(std::llround(ny_real));
  const CartesianMesh mesh(problem.domain, resolution, ny);
  CoefficientField coeffs = sample_coefficients(problem.perforations, problem.data, mesh);
  ScalarField u = reference_solve(coeffs, problem.data);
  if (coeffs_out) *coeffs_out = std::move(coeffs);
  return u;
}

ErrorReport make_report(const Problem& problem, Method method, const CoarseConfig& config, const ErrorNorms& norms) {
  ErrorReport r;
  r.config = config.label();
  r.method = method;
  r.H = problem.domain.width() / static_cast<double>(config.NX);
  r.h = r.H / static_cast<double>(config.m);
  r.eps = problem.perforations.empty() ? 0.0 : problem.perforations.eps();
  r.H_over_eps = r.eps > 0.0 ? r.H / r.eps : 0.0;
  r.l2_excl = norms.excl.value;
  r.l2_full = norms.full.value;
  return r;
}

std::vector<ErrorReport> run_convergence(const Problem& problem, Method method, std::span<const CoarseConfig> configs,
                                         Index reference_resolution, const MsfemOptions& options) {
  CoefficientField coeffs;
  const ScalarField ref = run_reference(problem, reference_resolution, &coeffs);
  std::vector<ErrorReport> rows;
  rows.reserve(configs.size());
  for (const CoarseConfig& c : configs) {
    try {
      const CoarseSolution sol = run_msfem(problem, method, c, options);
      rows.push_back(make_report(problem, method, c, relative_l2(sol, ref, coeffs.mask)));
    } catch (const Error& e) {
      throw Error(e.code(), "config " + c.label() + " (m=" + std::to_string(c.m) + "): " + e.what());
    }
  }
  return rows;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

}  // namespace

void write_error_csv(std::ostream& os, std::span<const ErrorReport> rows, bool header) {
  if (header) os << "config,H,H_over_eps,l2_excl,l2_full,method\n";
  for (const ErrorReport& r : rows)
    os << r.config << ',' << shortest(r.H) << ',' << shortest(r.H_over_eps) << ',' << shortest(r.l2_excl) << ','
       << shortest(r.l2_full) << ',' << method_name(r.method) << '\n';
}

}  // namespace crmsfem
