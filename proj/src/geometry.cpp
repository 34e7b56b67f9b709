#include "crmsfem/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "crmsfem/error.hpp"

namespace crmsfem {

PerforationSet::PerforationSet(const Domain2D& domain, std::vector<Rect> rects, bool allow_boundary)
    : domain_(domain), rects_(std::move(rects)), allow_boundary_(allow_boundary) {
  if (!domain_.valid()) throw GeometryError("domain", "degenerate domain");
  double eps = rects_.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const Rect& r : rects_) {
    if (!(r.w > 0.0) || !(r.h > 0.0)) throw GeometryError("perforation", "perforation with non-positive size");
    if (allow_boundary_) {
      if (r.cx < domain_.xmin || r.cx > domain_.xmax || r.cy < domain_.ymin || r.cy > domain_.ymax)
        throw GeometryError("perforation", "perforation center outside the domain");
    } else if (!(r.x0() > domain_.xmin && r.x1() < domain_.xmax && r.y0() > domain_.ymin &&
                 r.y1() < domain_.ymax)) {
      throw GeometryError("perforation", "perforation not strictly inside the domain");
    }
    eps = std::min({eps, r.w, r.h});
  }
  eps_ = eps;
  build_index();
}

void PerforationSet::build_index() {
  bins_.clear();
  if (rects_.empty()) {
    bins_x_ = bins_y_ = 0;
    return;
  }
  const auto side = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(rects_.size()))));
  bins_x_ = bins_y_ = std::max<Index>(1, side);
  bins_.resize(static_cast<std::size_t>(bins_x_ * bins_y_));
  const double bw = domain_.width() / static_cast<double>(bins_x_);
  const double bh = domain_.height() / static_cast<double>(bins_y_);
  const auto clamp_x = [&](double v) {
    return std::clamp<Index>(static_cast<Index>(std::floor((v - domain_.xmin) / bw)), 0, bins_x_ - 1);
  };
  const auto clamp_y = [&](double v) {
    return std::clamp<Index>(static_cast<Index>(std::floor((v - domain_.ymin) / bh)), 0, bins_y_ - 1);
  };
  for (std::size_t k = 0; k < rects_.size(); ++k) {
    const Rect& r = rects_[k];
    for (Index by = clamp_y(r.y0()); by <= clamp_y(r.y1()); ++by)
      for (Index bx = clamp_x(r.x0()); bx <= clamp_x(r.x1()); ++bx)
        bins_[static_cast<std::size_t>(bx + by * bins_x_)].push_back(static_cast<std::uint32_t>(k));
  }
}

bool PerforationSet::is_perforated(Point p) const {
  if (rects_.empty()) return false;
  const double bw = domain_.width() / static_cast<double>(bins_x_);
  const double bh = domain_.height() / static_cast<double>(bins_y_);
  const Index bx = std::clamp<Index>(static_cast<Index>(std::floor((p.x - domain_.xmin) / bw)), 0, bins_x_ - 1);
  const Index by = std::clamp<Index>(static_cast<Index>(std::floor((p.y - domain_.ymin) / bh)), 0, bins_y_ - 1);
  // a point exactly on a bin line may belong to a rect registered only in
  // the neighbouring bin
  for (Index dy = -1; dy <= 1; ++dy)
    for (Index dx = -1; dx <= 1; ++dx) {
      const Index x = bx + dx;
      const Index y = by + dy;
      if (x < 0 || y < 0 || x >= bins_x_ || y >= bins_y_) continue;
      for (std::uint32_t k : bins_[static_cast<std::size_t>(x + y * bins_x_)])
        if (rects_[k].contains(p)) return true;
    }
  return false;
}

bool PerforationSet::disjoint() const {
  for (std::size_t a = 0; a < rects_.size(); ++a)
    for (std::size_t b = a + 1; b < rects_.size(); ++b)
      if (rects_[a].intersects(rects_[b])) return false;
  return true;
}

PerforationSet PerforationSet::mapped_to(const Domain2D& target) const {
  const double sx = target.width() / domain_.width();
  const double sy = target.height() / domain_.height();
  std::vector<Rect> out;
  out.reserve(rects_.size());
  for (const Rect& r : rects_)
    out.push_back({target.xmin + (r.cx - domain_.xmin) * sx, target.ymin + (r.cy - domain_.ymin) * sy,
                   r.w * sx, r.h * sy});
  return PerforationSet(target, std::move(out), allow_boundary_);
}

PerforationSet build_periodic_perforations(const Domain2D& domain, Index nx, Index ny, double eps,
                                           Point shift) {
  if (nx < 1 || ny < 1) throw GeometryError("perforation", "periodic layout needs nx, ny >= 1");
  const double px = domain.width() / static_cast<double>(nx);
  const double py = domain.height() / static_cast<double>(ny);
  if (!(eps > 0.0)) throw GeometryError("perforation", "perforation width must be positive");
  if (eps >= std::min(px, py))
    throw GeometryError("overlapping-perforations", "perforation width must be below the lattice pitch");
  if (std::abs(shift.x) >= px || std::abs(shift.y) >= py)
    throw GeometryError("perforation", "shift must be smaller than the lattice pitch");

  const auto wrap = [](double v, double lo, double hi) {
    const double len = hi - lo;
    if (v >= hi) v -= len;
    if (v < lo) v += len;
    return v;
  };
  std::vector<Rect> rects;
  rects.reserve(static_cast<std::size_t>(nx * ny));
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const double cx = domain.xmin + (static_cast<double>(i) + 0.5) * px + shift.x;
      const double cy = domain.ymin + (static_cast<double>(j) + 0.5) * py + shift.y;
      rects.push_back({wrap(cx, domain.xmin, domain.xmax), wrap(cy, domain.ymin, domain.ymax), eps, eps});
    }
  const bool shifted = shift.x != 0.0 || shift.y != 0.0;
  return PerforationSet(domain, std::move(rects), shifted);
}

PerforationSet build_random_perforations(const Domain2D& domain, Index n, double eps,
                                         std::uint64_t seed) {
  if (n < 0) throw GeometryError("perforation", "negative perforation count");
  if (n == 0) return PerforationSet(domain, {});
  if (!(eps > 0.0)) throw GeometryError("perforation", "perforation width must be positive");
  if (eps >= std::min(domain.width(), domain.height()))
    throw GeometryError("placement-failure", "perforation wider than the domain");

  std::mt19937_64 rng(seed);
  const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<Rect> rects;
  rects.reserve(static_cast<std::size_t>(n));
  const Index budget = 1000 * (n + 1);
  for (Index attempt = 0; static_cast<Index>(rects.size()) < n; ++attempt) {
    if (attempt >= budget)
      throw GeometryError("placement-failure",
                          "could not place " + std::to_string(n) + " perforations (placed " +
                              std::to_string(rects.size()) + ")");
    const double ux = unit();
    const double uy = unit();
    const Rect c{domain.xmin + 0.5 * eps + ux * (domain.width() - eps),
                 domain.ymin + 0.5 * eps + uy * (domain.height() - eps), eps, eps};
    if (!(c.x0() > domain.xmin && c.x1() < domain.xmax && c.y0() > domain.ymin && c.y1() < domain.ymax))
      continue;
    const bool clash = std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.intersects(c); });
    if (!clash) rects.push_back(c);
  }
  return PerforationSet(domain, std::move(rects));
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, int line) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ConfigError("bad number '" + token + "'", line);
  return v;
}

}  // namespace

void write_perforations(std::ostream& os, const PerforationSet& perfs) {
  const Domain2D& d = perfs.domain();
  os << "# perforation layout: cx cy w h per line\n";
  os << "domain " << shortest(d.xmin) << ' ' << shortest(d.xmax) << ' ' << shortest(d.ymin) << ' '
     << shortest(d.ymax) << '\n';
  os << "eps " << shortest(perfs.eps()) << '\n';
  os << "allow_boundary " << (perfs.allow_boundary() ? 1 : 0) << '\n';
  os << "count " << perfs.size() << '\n';
  for (const Rect& r : perfs.rects())
    os << shortest(r.cx) << ' ' << shortest(r.cy) << ' ' << shortest(r.w) << ' ' << shortest(r.h) << '\n';
}

PerforationSet read_perforations(std::istream& is) {
  Domain2D domain;
  bool have_domain = false;
  bool allow_boundary = false;
  long long count = -1;
  std::vector<Rect> rects;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (raw.empty() || raw[0] == '#') continue;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "domain") {
      if (tok.size() != 5) throw ConfigError("domain needs 4 numbers", line, "domain");
      domain = {parse_double(tok[1], line), parse_double(tok[2], line), parse_double(tok[3], line),
                parse_double(tok[4], line)};
      have_domain = true;
    } else if (tok[0] == "eps") {
      // derived from the rects; kept in the file for readers
    } else if (tok[0] == "allow_boundary") {
      allow_boundary = tok.size() > 1 && tok[1] == "1";
    } else if (tok[0] == "count") {
      if (tok.size() != 2) throw ConfigError("count needs one integer", line, "count");
      count = std::stoll(tok[1]);
    } else {
      if (tok.size() != 4) throw ConfigError("expected 'cx cy w h'", line);
      rects.push_back({parse_double(tok[0], line), parse_double(tok[1], line), parse_double(tok[2], line),
                       parse_double(tok[3], line)});
    }
  }
  if (!have_domain) throw ConfigError("perforation file without domain line");
  if (count >= 0 && static_cast<std::size_t>(count) != rects.size())
    throw ConfigError("perforation count mismatch: header " + std::to_string(count) + ", found " +
                      std::to_string(rects.size()));
  return PerforationSet(domain, std::move(rects), allow_boundary);
}

double ProblemData::g_at_node(const CartesianMesh& mesh, Index i, Index j) const {
  const Point p = mesh.node_point(i, j);
  if (j == 0) return g(Side::Bottom, p.x, p.y);
  if (j == mesh.ny) return g(Side::Top, p.x, p.y);
  if (i == 0) return g(Side::Left, p.x, p.y);
  if (i == mesh.nx) return g(Side::Right, p.x, p.y);
  throw Error("internal", "g_at_node called on an interior node");
}

std::size_t CoefficientField::masked_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> CoefficientField::masked_nodes() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(mesh.node_count()), 0);
  for (Index j = 0; j <= mesh.ny; ++j)
    for (Index i = 0; i <= mesh.nx; ++i) {
      bool all = true;
      for (Index cj = j - 1; cj <= j && all; ++cj)
        for (Index ci = i - 1; ci <= i && all; ++ci) {
          if (ci < 0 || cj < 0 || ci >= mesh.nx || cj >= mesh.ny) continue;
          all = mask[static_cast<std::size_t>(mesh.cell(ci, cj))] != 0;
        }
      out[static_cast<std::size_t>(mesh.node(i, j))] = all ? 1 : 0;
    }
  return out;
}

CoefficientField sample_coefficients(const PerforationSet& perfs, const ProblemData& data,
                                     const CartesianMesh& fine_mesh) {
  CoefficientField c;
  c.mesh = fine_mesh;
  const auto n = static_cast<std::size_t>(fine_mesh.cell_count());
  c.a_beta.resize(n);
  c.sigma_beta.resize(n);
  c.f_beta.resize(n);
  c.mask.resize(n);
  const double h = fine_mesh.h;
  const double a_in = 1.0 / h;
  const double s_in = 1.0 / (h * h * h);
  for (Index j = 0; j < fine_mesh.ny; ++j)
    for (Index i = 0; i < fine_mesh.nx; ++i) {
      const auto k = static_cast<std::size_t>(fine_mesh.cell(i, j));
      const Point p = fine_mesh.cell_center(i, j);
      const bool masked = perfs.is_perforated(p);
      c.mask[k] = masked ? 1 : 0;
      c.a_beta[k] = masked ? a_in : data.diffusion;
      c.sigma_beta[k] = masked ? s_in : 0.0;
      c.f_beta[k] = masked ? 0.0 : data.f(p.x, p.y);
    }
  return c;
}

}  // namespace crmsfem
