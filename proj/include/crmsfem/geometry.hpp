#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "crmsfem/domain.hpp"
#include "crmsfem/mesh.hpp"

namespace crmsfem {

/// Axis-aligned rectangular hole, stored by center and size.
struct Rect {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x0() const { return cx - 0.5 * w; }
  double x1() const { return cx + 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double y1() const { return cy + 0.5 * h; }

  bool contains(Point p) const { return p.x >= x0() && p.x <= x1() && p.y >= y0() && p.y <= y1(); }

  /// Closed-set intersection test.
  bool intersects(const Rect& o) const {
    return x0() <= o.x1() && o.x0() <= x1() && y0() <= o.y1() && o.y0() <= y1();
  }

  bool operator==(const Rect&) const = default;
};

/// The perforation set B_eps. `eps` is the smallest rectangle side.
class PerforationSet {
public:
  PerforationSet() = default;

  /// Validates containment in the domain (strict unless allow_boundary) and
  /// positive sizes. An empty set has eps = 0.
  PerforationSet(const Domain2D& domain, std::vector<Rect> rects, bool allow_boundary = false);

  const Domain2D& domain() const { return domain_; }
  const std::vector<Rect>& rects() const { return rects_; }
  std::size_t size() const { return rects_.size(); }
  bool empty() const { return rects_.empty(); }
  double eps() const { return eps_; }
  bool allow_boundary() const { return allow_boundary_; }

  /// True iff p lies in the closed union of the rectangles.
  bool is_perforated(Point p) const;

  /// Pairwise disjointness (closed rectangles).
  bool disjoint() const;

  /// Affine image onto another box; rectangle sizes scale with the x extent.
  PerforationSet mapped_to(const Domain2D& target) const;

  bool operator==(const PerforationSet&) const = default;

private:
  void build_index();

  Domain2D domain_{};
  std::vector<Rect> rects_;
  double eps_ = 0.0;
  bool allow_boundary_ = false;
  // uniform bucket grid over the domain for point queries
  Index bins_x_ = 0;
  Index bins_y_ = 0;
  std::vector<std::vector<std::uint32_t>> bins_;
};

/// Square holes of side eps on an nx-by-ny lattice, shifted by (dx, dy) and
/// wrapped periodically so the count stays nx*ny.
PerforationSet build_periodic_perforations(const Domain2D& domain, Index nx, Index ny, double eps,
                                           Point shift = {});

/// n disjoint squares of side eps placed by rejection sampling.
///
/// Centers come from std::mt19937_64 seeded with `seed`; each coordinate uses
/// one raw draw mapped to [0,1) as (draw >> 11) * 2^-53, x first then y, and
/// the center is placed uniformly so the square lies strictly inside the
/// domain. A candidate touching an already accepted square is rejected.
/// Gives up with GeometryError after 1000*(n+1) draws.
PerforationSet build_random_perforations(const Domain2D& domain, Index n, double eps,
                                         std::uint64_t seed);

/// Line format:
///   domain <xmin> <xmax> <ymin> <ymax>
///   eps <eps>
///   allow_boundary <0|1>
///   count <n>
///   <cx> <cy> <w> <h>      (n lines)
/// Lines starting with '#' are comments. Numbers are written in shortest
/// round-trip form, so write/read reproduces every rect bit for bit.
void write_perforations(std::ostream& os, const PerforationSet& perfs);
PerforationSet read_perforations(std::istream& is);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Data of the advection-diffusion problem on the unperforated box.
struct ProblemData {
  double diffusion = 1.0;
  std::function<Vec2(double, double)> velocity;     // empty => zero field
  std::function<double(double, double)> source;     // empty => zero
  /// Dirichlet data, keyed by side so that corner discontinuities are
  /// unambiguous along each side. Empty => zero.
  std::function<double(Side, double, double)> boundary;

  bool has_velocity() const { return static_cast<bool>(velocity); }
  Vec2 w(double x, double y) const { return velocity ? velocity(x, y) : Vec2{}; }
  double f(double x, double y) const { return source ? source(x, y) : 0.0; }
  double g(Side s, double x, double y) const { return boundary ? boundary(s, x, y) : 0.0; }
  /// Nodal value at a boundary node of `mesh`; corners take the value of the
  /// horizontal (bottom/top) side.
  double g_at_node(const CartesianMesh& mesh, Index i, Index j) const;
};

/// Per-cell penalized coefficients: A/sigma/f become 1/h, 1/h^3, 0 in masked
/// cells and A, 0, f(center) elsewhere. A cell is masked iff its center is
/// perforated.
struct CoefficientField {
  CartesianMesh mesh;
  std::vector<double> a_beta;
  std::vector<double> sigma_beta;
  std::vector<double> f_beta;
  std::vector<std::uint8_t> mask;

  double h() const { return mesh.h; }
  std::size_t masked_count() const;

  /// Nodes whose every adjacent cell is masked (the discrete hole interior).
  std::vector<std::uint8_t> masked_nodes() const;
};

CoefficientField sample_coefficients(const PerforationSet& perfs, const ProblemData& data,
                                     const CartesianMesh& fine_mesh);

}  // namespace crmsfem
