#pragma once

#include <span>
#include <vector>

#include "crmsfem/fem.hpp"
#include "crmsfem/geometry.hpp"
#include "crmsfem/mesh.hpp"
#include "crmsfem/msbasis.hpp"

namespace crmsfem {

/// Global coarse system before boundary conditions. Unknowns are the
/// primary DOFs (edge means for CR, coarse nodes for the nodal baseline)
/// followed by one bubble amplitude per element when enriched.
struct CoarseSystem {
  BasisKind kind = BasisKind::CrouzeixRaviart;
  bool bubbles = false;
  Index primary_count = 0;
  Index bubble_count = 0;
  SparseMatrix matrix;
  Vector rhs;

  Index size() const { return primary_count + bubble_count; }
};

/// Global DOF indices of an element's local functions, in ElementBasis order.
std::vector<Index> element_dofs(const CoarseMesh& coarse, BasisKind kind, bool bubbles,
                                Index element);

/// Throws Error("mixed-basis") if the bases disagree on kind or enrichment.
CoarseSystem assemble_coarse(const CoarseMesh& coarse, std::span<const ElementBasis> bases);

/// DOFs whose functions carry no energy outside the perforations (zero
/// diagonal), e.g. bubbles of elements lying entirely inside a hole. They
/// are pinned to zero by the boundary routines below.
std::vector<Index> void_dofs(const CoarseSystem& system);

/// Mean of g over a coarse boundary edge using the fine trapezoid nodes.
double boundary_edge_mean(const CoarseMesh& coarse, const CartesianMesh& fine,
                          const ProblemData& data, Index edge_id);

/// CR: boundary edge DOFs fixed to the means of g and eliminated.
SparseSystem apply_boundary_means(const CoarseSystem& system, const CoarseMesh& coarse,
                                  const CartesianMesh& fine, const ProblemData& data);

/// Nodal baseline: boundary coarse nodes fixed to g at the node.
SparseSystem apply_boundary_nodal(const CoarseSystem& system, const CoarseMesh& coarse,
                                  const ProblemData& data);

SparseSystem apply_boundary(const CoarseSystem& system, const CoarseMesh& coarse,
                            const CartesianMesh& fine, const ProblemData& data);

/// Solved coarse problem and its fine-scale reconstruction.
struct CoarseSolution {
  BasisKind kind = BasisKind::CrouzeixRaviart;
  bool bubbles = false;
  Hierarchy hierarchy;
  Vector dofs;  // all coarse DOFs, boundary ones included
  /// Element-wise reconstruction on each element's local (m+1)^2 grid.
  std::vector<std::vector<double>> element_fields;
  /// Global fine field; nodes shared by several elements hold the average.
  ScalarField averaged;
  /// Per edge: mean of (trace from elements[1]) - (trace from elements[0])
  /// for interior edges, mean of the trace for boundary edges.
  std::vector<double> edge_trace_means;

  Index primary_count() const;
};

CoarseSolution solve_and_reconstruct(const SparseSystem& constrained, const CoarseSystem& system,
                                     const Hierarchy& hierarchy,
                                     std::span<const ElementBasis> bases);

/// Penalized Q1 solve on the whole fine mesh with nodal Dirichlet g.
ScalarField reference_solve(const CoefficientField& coeffs, const ProblemData& data);

}  // namespace crmsfem
