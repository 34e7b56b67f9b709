#include "crmsfem/coarse.hpp"

#include <cmath>
#include <cstdint>

#include "crmsfem/error.hpp"

namespace crmsfem {

std::vector<Index> element_dofs(const CoarseMesh& coarse, BasisKind kind, bool bubbles, Index element) {
  const CoarseElement& el = coarse.elements[static_cast<std::size_t>(element)];
  std::vector<Index> dofs;
  dofs.reserve(5);
  Index primary = 0;
  if (kind == BasisKind::CrouzeixRaviart) {
    dofs.assign(el.edges.begin(), el.edges.end());
    primary = coarse.edge_count();
  } else {
    dofs.assign(el.corners.begin(), el.corners.end());
    primary = coarse.node_count();
  }
  if (bubbles) dofs.push_back(primary + element);
  return dofs;
}

CoarseSystem assemble_coarse(const CoarseMesh& coarse, std::span<const ElementBasis> bases) {
  if (static_cast<Index>(bases.size()) != coarse.element_count())
    throw Error("internal", "one basis per coarse element expected");
  CoarseSystem sys;
  sys.kind = bases.front().kind;
  sys.bubbles = bases.front().has_bubble();
  for (const ElementBasis& b : bases)
    if (b.kind != sys.kind || b.has_bubble() != sys.bubbles)
      throw Error("mixed-basis", "coarse assembly over bases of different kinds");
  sys.primary_count = sys.kind == BasisKind::CrouzeixRaviart ? coarse.edge_count() : coarse.node_count();
  sys.bubble_count = sys.bubbles ? coarse.element_count() : 0;

  const Index n = sys.size();
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(bases.size() * 25);
  sys.rhs = Vector::Zero(n);
  for (const ElementBasis& b : bases) {
    const std::vector<Index> dofs = element_dofs(coarse, sys.kind, sys.bubbles, b.element);
    for (int i = 0; i < b.size(); ++i) {
      sys.rhs[dofs[static_cast<std::size_t>(i)]] += b.local_load[i];
      for (int j = 0; j < b.size(); ++j)
        t.emplace_back(static_cast<int>(dofs[static_cast<std::size_t>(i)]), static_cast<int>(dofs[static_cast<std::size_t>(j)]),
                       b.local_stiffness(i, j));
    }
  }
  sys.matrix.resize(static_cast<int>(n), static_cast<int>(n));
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();
  return sys;
}

std::vector<Index> void_dofs(const CoarseSystem& system) {
  const Vector d = system.matrix.diagonal();
  const double scale = d.cwiseAbs().maxCoeff();
  std::vector<Index> out;
  for (Index k = 0; k < d.size(); ++k)
    if (std::abs(d[k]) <= 1e-14 * scale) out.push_back(k);
  return out;
}

namespace {

// Boundary values plus zeros for void DOFs that are not already fixed.
SparseSystem constrain(const CoarseSystem& system, std::vector<Index> nodes, std::vector<double> values) {
  std::vector<std::uint8_t> fixed(static_cast<std::size_t>(system.size()), 0);
  for (Index n : nodes) fixed[static_cast<std::size_t>(n)] = 1;
  for (Index n : void_dofs(system))
    if (!fixed[static_cast<std::size_t>(n)]) {
      nodes.push_back(n);
      values.push_back(0.0);
    }
  return apply_dirichlet(make_system(system.matrix, system.rhs), nodes, values);
}

Side edge_side(const CoarseMesh& coarse, const CoarseEdge& e) {
  if (e.horizontal) return e.j == 0 ? Side::Bottom : Side::Top;
  return e.i == 0 ? Side::Left : Side::Right;
  (void)coarse;
}

}  // namespace

double boundary_edge_mean(const CoarseMesh& coarse, const CartesianMesh& fine, const ProblemData& data,
                          Index edge_id) {
  const CoarseEdge& e = coarse.edges[static_cast<std::size_t>(edge_id)];
  if (!e.on_boundary()) throw Error("internal", "boundary_edge_mean on an interior edge");
  const Side side = edge_side(coarse, e);
  const EdgeQuadrature q = edge_fine_segments(coarse, fine, edge_id);
  const Index stride = fine.nx + 1;
  double s = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const Point p = fine.node_point(q.nodes[k] % stride, q.nodes[k] / stride);
    s += q.weights[k] * data.g(side, p.x, p.y);
  }
  return s / e.length;
}

SparseSystem apply_boundary_means(const CoarseSystem& system, const CoarseMesh& coarse, const CartesianMesh& fine,
                                  const ProblemData& data) {
  if (system.kind != BasisKind::CrouzeixRaviart) throw Error("internal", "edge-mean boundary data needs CR bases");
  std::vector<Index> nodes;
  std::vector<double> values;
  for (const CoarseEdge& e : coarse.edges)
    if (e.on_boundary()) {
      nodes.push_back(e.id);
      values.push_back(boundary_edge_mean(coarse, fine, data, e.id));
    }
  return constrain(system, std::move(nodes), std::move(values));
}

SparseSystem apply_boundary_nodal(const CoarseSystem& system, const CoarseMesh& coarse, const ProblemData& data) {
  if (system.kind != BasisKind::LinearNodal) throw Error("internal", "nodal boundary data needs nodal bases");
  const CartesianMesh nodes_mesh(coarse.domain, coarse.NX, coarse.NY);
  std::vector<Index> nodes;
  std::vector<double> values;
  for (Index J = 0; J <= coarse.NY; ++J)
    for (Index I = 0; I <= coarse.NX; ++I)
      if (nodes_mesh.on_boundary(I, J)) {
        nodes.push_back(coarse.node(I, J));
        values.push_back(data.g_at_node(nodes_mesh, I, J));
      }
  return constrain(system, std::move(nodes), std::move(values));
}

SparseSystem apply_boundary(const CoarseSystem& system, const CoarseMesh& coarse, const CartesianMesh& fine,
                            const ProblemData& data) {
  return system.kind == BasisKind::CrouzeixRaviart ? apply_boundary_means(system, coarse, fine, data)
                                                   : apply_boundary_nodal(system, coarse, data);
}

Index CoarseSolution::primary_count() const {
  return kind == BasisKind::CrouzeixRaviart ? hierarchy.coarse.edge_count() : hierarchy.coarse.node_count();
}

CoarseSolution solve_and_reconstruct(const SparseSystem& constrained, const CoarseSystem& system,
                                     const Hierarchy& hierarchy, std::span<const ElementBasis> bases) {
  const CoarseMesh& coarse = hierarchy.coarse;
  const CartesianMesh& fine = hierarchy.fine;
  CoarseSolution sol;
  sol.kind = system.kind;
  sol.bubbles = system.bubbles;
  sol.hierarchy = hierarchy;
  sol.dofs = solve_sparse(constrained);

  const Index m = coarse.m;
  const Index local_nodes = (m + 1) * (m + 1);
  sol.element_fields.resize(bases.size());
  sol.averaged = ScalarField(fine);
  std::vector<int> hits(static_cast<std::size_t>(fine.node_count()), 0);
  for (const ElementBasis& b : bases) {
    const std::vector<Index> dofs = element_dofs(coarse, sol.kind, sol.bubbles, b.element);
    std::vector<double> field(static_cast<std::size_t>(local_nodes), 0.0);
    for (int i = 0; i < b.size(); ++i) {
      const double c = sol.dofs[dofs[static_cast<std::size_t>(i)]];
      if (c == 0.0) continue;
      const std::vector<double>& phi = b.function(i);
      for (std::size_t q = 0; q < field.size(); ++q) field[q] += c * phi[q];
    }
    const CoarseElement& el = coarse.elements[static_cast<std::size_t>(b.element)];
    for (Index bj = 0; bj <= m; ++bj)
      for (Index ai = 0; ai <= m; ++ai) {
        const auto g = static_cast<std::size_t>(fine.node(el.I * m + ai, el.J * m + bj));
        sol.averaged.values[g] += field[static_cast<std::size_t>(ai + bj * (m + 1))];
        ++hits[g];
      }
    sol.element_fields[static_cast<std::size_t>(b.element)] = std::move(field);
  }
  for (std::size_t g = 0; g < hits.size(); ++g) sol.averaged.values[g] /= static_cast<double>(hits[g]);

  sol.edge_trace_means.resize(coarse.edges.size());
  for (const CoarseEdge& e : coarse.edges) {
    const auto trace = [&](Index element, LocalEdge side) {
      return local_edge_mean(sol.element_fields[static_cast<std::size_t>(element)], m, side);
    };
    const LocalEdge first_side = e.horizontal ? LocalEdge::Top : LocalEdge::Right;
    const LocalEdge second_side = e.horizontal ? LocalEdge::Bottom : LocalEdge::Left;
    double v = 0.0;
    if (e.elements[0] >= 0 && e.elements[1] >= 0)
      v = trace(e.elements[1], second_side) - trace(e.elements[0], first_side);
    else if (e.elements[0] >= 0)
      v = trace(e.elements[0], first_side);
    else
      v = trace(e.elements[1], second_side);
    sol.edge_trace_means[static_cast<std::size_t>(e.id)] = v;
  }
  return sol;
}

ScalarField reference_solve(const CoefficientField& coeffs, const ProblemData& data) {
  const CartesianMesh& mesh = coeffs.mesh;
  const StencilOperator op = assemble_operator(coeffs, data.velocity);
  std::vector<Index> nodes;
  std::vector<double> values;
  for (Index j = 0; j <= mesh.ny; ++j)
    for (Index i = 0; i <= mesh.nx; ++i)
      if (mesh.on_boundary(i, j)) {
        nodes.push_back(mesh.node(i, j));
        values.push_back(data.g_at_node(mesh, i, j));
      }
  const SparseSystem reduced = apply_dirichlet(make_system(op.to_sparse(), assemble_load(coeffs)), nodes, values);
  const Vector u = solve_sparse(reduced);
  ScalarField out(mesh);
  for (Index k = 0; k < u.size(); ++k) out.values[static_cast<std::size_t>(k)] = u[k];
  return out;
}

}  // namespace crmsfem
