#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "crmsfem/domain.hpp"

namespace crmsfem {

using Index = std::ptrdiff_t;

/// Uniform Cartesian mesh of square cells. Nodes are numbered i + j*(nx+1),
/// cells i + j*nx.
struct CartesianMesh {
  Domain2D domain;
  Index nx = 1;
  Index ny = 1;
  double h = 1.0;

  CartesianMesh() = default;
  CartesianMesh(const Domain2D& d, Index nx_, Index ny_);

  Index node_count() const { return (nx + 1) * (ny + 1); }
  Index cell_count() const { return nx * ny; }
  Index node(Index i, Index j) const { return i + j * (nx + 1); }
  Index cell(Index i, Index j) const { return i + j * nx; }

  Point node_point(Index i, Index j) const {
    return {domain.xmin + static_cast<double>(i) * h, domain.ymin + static_cast<double>(j) * h};
  }
  Point cell_center(Index i, Index j) const {
    return {domain.xmin + (static_cast<double>(i) + 0.5) * h,
            domain.ymin + (static_cast<double>(j) + 0.5) * h};
  }
  bool on_boundary(Index i, Index j) const { return i == 0 || j == 0 || i == nx || j == ny; }
};

/// Horizontal edges are numbered first (row-major over their lower-left
/// node), then vertical edges.
struct CoarseEdge {
  Index id = 0;
  bool horizontal = true;
  Index i = 0;  // coarse node column of the start point
  Index j = 0;  // coarse node row of the start point
  std::array<Index, 2> elements{-1, -1};  // (below|left, above|right); -1 outside
  Point start;
  Point end;
  double length = 0.0;

  bool on_boundary() const { return elements[0] < 0 || elements[1] < 0; }
};

/// Local edge slots of a coarse element.
enum class LocalEdge { Bottom = 0, Right = 1, Top = 2, Left = 3 };

struct CoarseElement {
  Index id = 0;
  Index I = 0;
  Index J = 0;
  std::array<Index, 4> edges{};    // indexed by LocalEdge
  std::array<Index, 4> corners{};  // coarse nodes (0,0) (1,0) (0,1) (1,1)
};

struct CoarseMesh {
  Domain2D domain;
  Index NX = 1;
  Index NY = 1;
  Index m = 1;  // fine cells per coarse cell per axis
  double H = 1.0;
  std::vector<CoarseElement> elements;
  std::vector<CoarseEdge> edges;

  Index element_count() const { return NX * NY; }
  Index edge_count() const { return NX * (NY + 1) + NY * (NX + 1); }
  Index node_count() const { return (NX + 1) * (NY + 1); }
  Index node(Index I, Index J) const { return I + J * (NX + 1); }
  Index element(Index I, Index J) const { return I + J * NX; }
  Index horizontal_edge(Index I, Index J) const { return I + J * NX; }
  Index vertical_edge(Index I, Index J) const { return NX * (NY + 1) + I + J * (NX + 1); }
};

struct Hierarchy {
  CartesianMesh fine;
  CoarseMesh coarse;
};

/// Nested fine/coarse meshes; the fine mesh has NX*m by NY*m cells. Throws
/// GeometryError when the coarse cells would not be square.
Hierarchy build_hierarchy(const Domain2D& domain, Index NX, Index NY, Index m);

/// Trapezoidal weights of the edge integral on fine nodes; sum of weights is
/// the edge length. Nodes are fine-mesh node indices ordered along the edge.
struct EdgeQuadrature {
  std::vector<Index> nodes;
  std::vector<double> weights;
};

EdgeQuadrature edge_fine_segments(const CoarseMesh& coarse, const CartesianMesh& fine,
                                  Index edge_id);

/// Same quadrature expressed on the (m+1)^2 local grid of a coarse element.
EdgeQuadrature local_edge_segments(Index m, double h, LocalEdge edge);

/// Text summary: counts, H, h and H/eps when eps is given.
void print_summary(std::ostream& os, const Hierarchy& hierarchy, std::optional<double> eps = {});

}  // namespace crmsfem
