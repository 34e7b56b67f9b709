#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crmsfem/fem.hpp"
#include "crmsfem/geometry.hpp"
#include "crmsfem/mesh.hpp"

namespace crmsfem {

enum class BasisKind { CrouzeixRaviart, LinearNodal };

/// Right-hand side of the bubble problem. Unit: the indicator of the
/// unperforated cells. Load: the element's own f^beta, falling back to Unit
/// where that load vanishes identically.
enum class BubbleSource { Unit, Load };

/// Bilinear form of the coarse problem. Penalized: the penalized operator
/// over the whole element. Perforated: A and w over the unperforated cells
/// only; loses coercivity once elements fit inside holes.
enum class CoarseForm { Penalized, Perforated };

struct MsfemOptions {
  BubbleSource bubble = BubbleSource::Load;
  CoarseForm form = CoarseForm::Penalized;

  bool operator==(const MsfemOptions&) const = default;
};

/// Everything a local solve needs on one coarse element: the penalized fine
/// operator over the element's m x m cell block (no boundary conditions),
/// the f^beta load and the masked unit load that drives the bubble.
struct LocalOperator {
  Index element = 0;
  Index m = 0;
  double h = 0.0;
  CellBlock block;
  StencilOperator op;
  StencilOperator form;  // coarse bilinear form; a copy of op when penalized
  SparseMatrix matrix;
  Vector load;
  Vector unit_load;
};

LocalOperator build_local_operator(const CoarseMesh& coarse, Index element,
                                   const CoefficientField& coeffs, const VelocityField& w,
                                   CoarseForm form = CoarseForm::Penalized);

/// Multiscale basis of one coarse element, as nodal values on its local
/// (m+1)^2 grid. functions[0..3] are the edge functions (CR, indexed by
/// LocalEdge) or the corner functions (nodal, corners (0,0) (1,0) (0,1) (1,1)).
struct ElementBasis {
  Index element = 0;
  BasisKind kind = BasisKind::CrouzeixRaviart;
  Index m = 0;
  double h = 0.0;
  std::array<std::vector<double>, 4> functions;
  std::vector<double> bubble;  // empty without bubble enrichment
  /// CR only: multipliers[i][j] is the constant flux n.A grad(Phi_i) on edge j.
  std::array<std::array<double, 4>, 4> multipliers{};
  Eigen::MatrixXd local_stiffness;  // (test, trial)
  Eigen::VectorXd local_load;

  bool has_bubble() const { return !bubble.empty(); }
  int size() const { return has_bubble() ? 5 : 4; }
  const std::vector<double>& function(int k) const { return k == 4 ? bubble : functions[static_cast<std::size_t>(k)]; }
};

/// Edge functions: for each local edge e solve the bordered Neumann problem
/// a_T(Phi, v) = sum_j lambda_j mean_j(v), mean_i(Phi) = delta_ie.
ElementBasis compute_cr_basis(const LocalOperator& local);

/// Bubble: a_T(Phi_B, v) = (s, v) with Phi_B = 0 on the element boundary,
/// s = 1_{unmasked} or f^beta. Fills basis.bubble.
void compute_bubble(const LocalOperator& local, ElementBasis& basis,
                    BubbleSource source = BubbleSource::Unit);

/// Nodal basis with bilinear-hat Dirichlet data on every boundary node of
/// the element, perforated or not.
ElementBasis compute_linear_basis(const LocalOperator& local);

/// Fills local_stiffness (a_T(Phi_j, Phi_i) at (i, j), using local.form)
/// and local_load.
void local_coarse_matrices(const LocalOperator& local, ElementBasis& basis);

/// Full per-element pipeline, parallel over elements (CRMSFEM_THREADS),
/// output ordered by element id.
std::vector<ElementBasis> compute_bases(const CoarseMesh& coarse, const CoefficientField& coeffs,
                                        const VelocityField& w, BasisKind kind, bool with_bubble,
                                        const MsfemOptions& options = {});

/// Mean of a local field over one local edge (trapezoidal rule).
double local_edge_mean(std::span<const double> field, Index m, LocalEdge edge);

}  // namespace crmsfem
