#include "crmsfem/msbasis.hpp"

#include <string>

#include "crmsfem/error.hpp"
#include "crmsfem/parallel.hpp"

namespace crmsfem {

LocalOperator build_local_operator(const CoarseMesh& coarse, Index element,
                                   const CoefficientField& coeffs, const VelocityField& w, CoarseForm form) {
  if (element < 0 || element >= coarse.element_count()) throw Error("internal", "element id out of range");
  if (coeffs.mesh.nx != coarse.NX * coarse.m || coeffs.mesh.ny != coarse.NY * coarse.m)
    throw Error("internal", "coefficients are not sampled on the hierarchy's fine mesh");
  const CoarseElement& el = coarse.elements[static_cast<std::size_t>(element)];
  LocalOperator local;
  local.element = element;
  local.m = coarse.m;
  local.h = coeffs.mesh.h;
  local.block = {el.I * coarse.m, el.J * coarse.m, coarse.m, coarse.m};
  local.op = assemble_operator(coeffs, w, local.block);
  local.matrix = local.op.to_sparse();
  local.form = form == CoarseForm::Penalized ? local.op : assemble_operator(coeffs, w, local.block, CellSet::Unmasked);
  local.load = assemble_load(coeffs, local.block);

  local.unit_load = Vector::Zero(local.block.node_count());
  const double quarter = 0.25 * local.h * local.h;
  const Index stride = local.m + 1;
  for (Index cj = 0; cj < local.m; ++cj)
    for (Index ci = 0; ci < local.m; ++ci) {
      if (coeffs.mask[static_cast<std::size_t>(coeffs.mesh.cell(local.block.i0 + ci, local.block.j0 + cj))]) continue;
      const Index n = ci + cj * stride;
      local.unit_load[n] += quarter;
      local.unit_load[n + 1] += quarter;
      local.unit_load[n + stride] += quarter;
      local.unit_load[n + stride + 1] += quarter;
    }
  return local;
}

namespace {

std::vector<Index> boundary_nodes(Index m) {
  std::vector<Index> out;
  const Index stride = m + 1;
  for (Index b = 0; b <= m; ++b)
    for (Index a = 0; a <= m; ++a)
      if (a == 0 || b == 0 || a == m || b == m) out.push_back(a + b * stride);
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

[[noreturn]] void rethrow_for_element(const SolverError& e, Index element) {
  throw SolverError("element " + std::to_string(element) + ": " + e.what(), e.residual());
}

}  // namespace

double local_edge_mean(std::span<const double> field, Index m, LocalEdge edge) {
  const EdgeQuadrature q = local_edge_segments(m, 1.0 / static_cast<double>(m), edge);
  double s = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) s += q.weights[k] * field[static_cast<std::size_t>(q.nodes[k])];
  return s;
}

ElementBasis compute_cr_basis(const LocalOperator& local) {
  ElementBasis basis;
  basis.element = local.element;
  basis.kind = BasisKind::CrouzeixRaviart;
  basis.m = local.m;
  basis.h = local.h;

  const double length = static_cast<double>(local.m) * local.h;
  std::vector<LinearFunctional> means;
  for (int j = 0; j < 4; ++j) {
    const EdgeQuadrature q = local_edge_segments(local.m, local.h, static_cast<LocalEdge>(j));
    LinearFunctional f{q.nodes, q.weights};
    for (double& w : f.weights) w /= length;
    means.push_back(std::move(f));
  }

  try {
    const SaddleSolver solver(local.matrix, std::move(means));
    const Vector zero = Vector::Zero(local.block.node_count());
    for (int e = 0; e < 4; ++e) {
      double targets[4] = {0.0, 0.0, 0.0, 0.0};
      targets[e] = 1.0;
      const SaddleSolution s = solver.solve(zero, targets);
      basis.functions[static_cast<std::size_t>(e)] = to_std(s.x);
      // K x + C^T mu = 0 and (K x)_n = sum_j lambda_j * (edge weight)_n give
      // lambda_j = -mu_j / |edge|
      for (int j = 0; j < 4; ++j) basis.multipliers[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)] = -s.multipliers[j] / length;
    }
  } catch (const SolverError& err) {
    rethrow_for_element(err, local.element);
  }
  return basis;
}

void compute_bubble(const LocalOperator& local, ElementBasis& basis, BubbleSource source) {
  const bool use_load = source == BubbleSource::Load && local.load.cwiseAbs().maxCoeff() > 0.0;
  const std::vector<Index> nodes = boundary_nodes(local.m);
  const std::vector<double> zeros(nodes.size(), 0.0);
  try {
    const SparseSystem reduced = apply_dirichlet(make_system(local.matrix, use_load ? local.load : local.unit_load), nodes, zeros);
    basis.bubble = to_std(solve_sparse(reduced));
  } catch (const SolverError& err) {
    rethrow_for_element(err, local.element);
  }
}

ElementBasis compute_linear_basis(const LocalOperator& local) {
  ElementBasis basis;
  basis.element = local.element;
  basis.kind = BasisKind::LinearNodal;
  basis.m = local.m;
  basis.h = local.h;

  const Index m = local.m;
  const Index stride = m + 1;
  const std::vector<Index> nodes = boundary_nodes(m);
  const Vector zero = Vector::Zero(local.block.node_count());
  try {
    const SparseSystem reduced =
        apply_dirichlet(make_system(local.matrix, zero), nodes, std::vector<double>(nodes.size(), 0.0));
    const SparseLU lu(reduced.matrix);
    for (int c = 0; c < 4; ++c) {
      const int cx = c % 2;
      const int cy = c / 2;
      std::vector<double> values;
      values.reserve(reduced.fixed_nodes.size());
      for (Index node : reduced.fixed_nodes) {
        const double s = static_cast<double>(node % stride) / static_cast<double>(m);
        const double t = static_cast<double>(node / stride) / static_cast<double>(m);
        values.push_back((cx ? s : 1.0 - s) * (cy ? t : 1.0 - t));
      }
      const Vector x = reduced.dof_count() > 0 ? lu.solve(reduced.lift(zero, values)) : Vector();
      std::vector<double> full(static_cast<std::size_t>(local.block.node_count()));
      for (Index d = 0; d < reduced.dof_count(); ++d) full[static_cast<std::size_t>(reduced.node_of_dof[static_cast<std::size_t>(d)])] = x[d];
      for (std::size_t k = 0; k < values.size(); ++k) full[static_cast<std::size_t>(reduced.fixed_nodes[k])] = values[k];
      basis.functions[static_cast<std::size_t>(c)] = std::move(full);
    }
  } catch (const SolverError& err) {
    rethrow_for_element(err, local.element);
  }
  return basis;
}

void local_coarse_matrices(const LocalOperator& local, ElementBasis& basis) {
  const int n = basis.size();
  std::vector<std::vector<double>> kphi(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::vector<double>& phi = basis.function(j);
    kphi[static_cast<std::size_t>(j)].resize(phi.size());
    local.form.apply(phi, kphi[static_cast<std::size_t>(j)]);
  }
  basis.local_stiffness.resize(n, n);
  basis.local_load.resize(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<double>& phi = basis.function(i);
    for (int j = 0; j < n; ++j) {
      const std::vector<double>& kp = kphi[static_cast<std::size_t>(j)];
      double s = 0.0;
      for (std::size_t q = 0; q < phi.size(); ++q) s += phi[q] * kp[q];
      basis.local_stiffness(i, j) = s;
    }
    double l = 0.0;
    for (std::size_t q = 0; q < phi.size(); ++q) l += phi[q] * local.load[static_cast<Index>(q)];
    basis.local_load[i] = l;
  }
}

std::vector<ElementBasis> compute_bases(const CoarseMesh& coarse, const CoefficientField& coeffs,
                                        const VelocityField& w, BasisKind kind, bool with_bubble,
                                        const MsfemOptions& options) {
  std::vector<ElementBasis> out(static_cast<std::size_t>(coarse.element_count()));
  parallel_for(coarse.element_count(), [&](Index k) {
    const LocalOperator local = build_local_operator(coarse, k, coeffs, w, options.form);
    ElementBasis basis = kind == BasisKind::CrouzeixRaviart ? compute_cr_basis(local) : compute_linear_basis(local);
    if (with_bubble) compute_bubble(local, basis, options.bubble);
    local_coarse_matrices(local, basis);
    out[static_cast<std::size_t>(k)] = std::move(basis);
  });
  return out;
}

}  // namespace crmsfem
