#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crmsfem/coarse.hpp"
#include "crmsfem/fem.hpp"
#include "crmsfem/geometry.hpp"

namespace crmsfem {

enum class Region { ExcludePerforations, Full };

enum class Method { CrBubble, CrPlain, LinearBubble, LinearPlain, Reference };

std::string method_name(Method method);  // "cr_bubble", ...
Method parse_method(const std::string& name);
BasisKind method_kind(Method method);
bool method_has_bubble(Method method);

/// Relative L2 error. When the reference norm vanishes the absolute norm is
/// returned with relative == false.
struct RelativeL2 {
  double value = 0.0;
  bool relative = true;
};

struct ErrorNorms {
  RelativeL2 excl;  // over unmasked cells
  RelativeL2 full;  // over every cell
};

/// u and uref must live on the same mesh; mask is the per-cell perforation
/// mask of that mesh. Both regions come out of one quadrature pass.
ErrorNorms relative_l2(const ScalarField& u, const ScalarField& uref,
                       std::span<const std::uint8_t> mask);
RelativeL2 relative_l2(const ScalarField& u, const ScalarField& uref,
                       std::span<const std::uint8_t> mask, Region region);

/// Element-wise comparison of a reconstruction against a reference on a
/// mesh that is equal or finer by an integer factor (bilinear prolongation
/// of each element field first).
ErrorNorms relative_l2(const CoarseSolution& u, const ScalarField& uref,
                       std::span<const std::uint8_t> mask);

/// Bilinear prolongation of a local (m+1)^2 block to (m*factor+1)^2.
std::vector<double> prolong_block(std::span<const double> values, Index m, Index factor);

/// Interpolates an analytic function at the nodes of a mesh.
template <class F>
ScalarField interpolate(const CartesianMesh& mesh, F&& fn) {
  ScalarField out(mesh);
  for (Index j = 0; j <= mesh.ny; ++j)
    for (Index i = 0; i <= mesh.nx; ++i) {
      const Point p = mesh.node_point(i, j);
      out(i, j) = fn(p.x, p.y);
    }
  return out;
}

/// A fully specified problem: geometry plus data.
struct Problem {
  std::string name;
  Domain2D domain;
  PerforationSet perforations;
  ProblemData data;
};

struct CoarseConfig {
  Index NX = 8;
  Index NY = 8;
  Index m = 64;

  std::string label() const;  // "8x8"
  bool operator==(const CoarseConfig&) const = default;
};

struct ErrorReport {
  std::string config;
  Method method = Method::CrBubble;
  double H = 0.0;
  double h = 0.0;
  double eps = 0.0;
  double H_over_eps = 0.0;
  double l2_excl = 0.0;
  double l2_full = 0.0;
};

/// Coefficients, bases, coarse solve and reconstruction for one config.
CoarseSolution run_msfem(const Problem& problem, Method method, const CoarseConfig& config,
                         const MsfemOptions& options = {});

/// Fine solve with `resolution` cells along x.
ScalarField run_reference(const Problem& problem, Index resolution,
                          CoefficientField* coeffs_out = nullptr);

ErrorReport make_report(const Problem& problem, Method method, const CoarseConfig& config,
                        const ErrorNorms& norms);

/// One reference solve, then every config in order. Failures are rethrown
/// with the offending config in the message.
std::vector<ErrorReport> run_convergence(const Problem& problem, Method method,
                                         std::span<const CoarseConfig> configs,
                                         Index reference_resolution,
                                         const MsfemOptions& options = {});

/// CSV with header `config,H,H_over_eps,l2_excl,l2_full,method`.
void write_error_csv(std::ostream& os, std::span<const ErrorReport> rows, bool header = true);

}  // namespace crmsfem
