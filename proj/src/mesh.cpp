#include "crmsfem/mesh.hpp"

#include <cmath>
#include <ostream>

#include "crmsfem/error.hpp"

namespace crmsfem {

CartesianMesh::CartesianMesh(const Domain2D& d, Index nx_, Index ny_) : domain(d), nx(nx_), ny(ny_) {
  if (!d.valid()) throw GeometryError("domain", "degenerate domain");
  if (nx < 1 || ny < 1) throw GeometryError("mesh", "mesh needs at least one cell per axis");
  h = d.width() / static_cast<double>(nx);
  const double hy = d.height() / static_cast<double>(ny);
  if (std::abs(h - hy) > 1e-12 * h) throw GeometryError("mesh", "cells must be square");
}

Hierarchy build_hierarchy(const Domain2D& domain, Index NX, Index NY, Index m) {
  if (NX < 1 || NY < 1 || m < 1) throw GeometryError("mesh", "NX, NY and m must be >= 1");
  Hierarchy out;
  out.fine = CartesianMesh(domain, NX * m, NY * m);

  CoarseMesh& c = out.coarse;
  c.domain = domain;
  c.NX = NX;
  c.NY = NY;
  c.m = m;
  c.H = out.fine.h * static_cast<double>(m);

  const auto coarse_point = [&](Index I, Index J) {
    return Point{domain.xmin + static_cast<double>(I) * c.H, domain.ymin + static_cast<double>(J) * c.H};
  };

  c.edges.resize(static_cast<std::size_t>(c.edge_count()));
  for (Index J = 0; J <= NY; ++J)
    for (Index I = 0; I < NX; ++I) {
      CoarseEdge& e = c.edges[static_cast<std::size_t>(c.horizontal_edge(I, J))];
      e.id = c.horizontal_edge(I, J);
      e.horizontal = true;
      e.i = I;
      e.j = J;
      e.elements = {J > 0 ? c.element(I, J - 1) : -1, J < NY ? c.element(I, J) : -1};
      e.start = coarse_point(I, J);
      e.end = coarse_point(I + 1, J);
      e.length = c.H;
    }
  for (Index J = 0; J < NY; ++J)
    for (Index I = 0; I <= NX; ++I) {
      CoarseEdge& e = c.edges[static_cast<std::size_t>(c.vertical_edge(I, J))];
      e.id = c.vertical_edge(I, J);
      e.horizontal = false;
      e.i = I;
      e.j = J;
      e.elements = {I > 0 ? c.element(I - 1, J) : -1, I < NX ? c.element(I, J) : -1};
      e.start = coarse_point(I, J);
      e.end = coarse_point(I, J + 1);
      e.length = c.H;
    }

  c.elements.resize(static_cast<std::size_t>(c.element_count()));
  for (Index J = 0; J < NY; ++J)
    for (Index I = 0; I < NX; ++I) {
      CoarseElement& el = c.elements[static_cast<std::size_t>(c.element(I, J))];
      el.id = c.element(I, J);
      el.I = I;
      el.J = J;
      el.edges[static_cast<int>(LocalEdge::Bottom)] = c.horizontal_edge(I, J);
      el.edges[static_cast<int>(LocalEdge::Right)] = c.vertical_edge(I + 1, J);
      el.edges[static_cast<int>(LocalEdge::Top)] = c.horizontal_edge(I, J + 1);
      el.edges[static_cast<int>(LocalEdge::Left)] = c.vertical_edge(I, J);
      el.corners = {c.node(I, J), c.node(I + 1, J), c.node(I, J + 1), c.node(I + 1, J + 1)};
    }
  return out;
}

namespace {

std::vector<double> trapezoid_weights(Index m, double h) {
  std::vector<double> w(static_cast<std::size_t>(m + 1), h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

}  // namespace

EdgeQuadrature edge_fine_segments(const CoarseMesh& coarse, const CartesianMesh& fine,
                                  Index edge_id) {
  if (edge_id < 0 || edge_id >= coarse.edge_count()) throw GeometryError("mesh", "edge id out of range");
  const CoarseEdge& e = coarse.edges[static_cast<std::size_t>(edge_id)];
  EdgeQuadrature q;
  q.weights = trapezoid_weights(coarse.m, fine.h);
  q.nodes.reserve(q.weights.size());
  const Index i0 = e.i * coarse.m;
  const Index j0 = e.j * coarse.m;
  for (Index t = 0; t <= coarse.m; ++t)
    q.nodes.push_back(e.horizontal ? fine.node(i0 + t, j0) : fine.node(i0, j0 + t));
  return q;
}

EdgeQuadrature local_edge_segments(Index m, double h, LocalEdge edge) {
  EdgeQuadrature q;
  q.weights = trapezoid_weights(m, h);
  q.nodes.reserve(q.weights.size());
  const Index stride = m + 1;
  for (Index t = 0; t <= m; ++t) {
    switch (edge) {
      case LocalEdge::Bottom: q.nodes.push_back(t); break;
      case LocalEdge::Right: q.nodes.push_back(m + t * stride); break;
      case LocalEdge::Top: q.nodes.push_back(t + m * stride); break;
      case LocalEdge::Left: q.nodes.push_back(t * stride); break;
    }
  }
  return q;
}

void print_summary(std::ostream& os, const Hierarchy& hierarchy, std::optional<double> eps) {
  const CoarseMesh& c = hierarchy.coarse;
  const CartesianMesh& f = hierarchy.fine;
  os << "domain      [" << c.domain.xmin << ", " << c.domain.xmax << "] x [" << c.domain.ymin
     << ", " << c.domain.ymax << "]\n"
     << "coarse      " << c.NX << " x " << c.NY << " elements, " << c.edge_count() << " edges, H = "
     << c.H << "\n"
     << "fine        " << f.nx << " x " << f.ny << " cells, " << f.node_count()
     << " nodes, h = " << f.h << "\n"
     << "m           " << c.m << " fine cells per coarse cell\n";
  if (eps && *eps > 0.0) os << "H/eps       " << c.H / *eps << "\n";
}

}  // namespace crmsfem
