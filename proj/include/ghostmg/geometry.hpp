// Background grids, level-set domains and cut-cell geometry.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghostmg {

using Point = std::array<double, 2>;

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Point& a) { return std::hypot(a[0], a[1]); }

/// Uniform Cartesian mesh of a box (an interval in 1D) with n cells per axis.
/// Node (i, j) has single index i + j (n + 1); cell (i, j) has index i + j n.
class CartesianGrid {
 public:
  CartesianGrid(int dim, std::size_t n, Point origin, double extent)
      : dim_(dim), n_(n), origin_(origin), extent_(extent) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("CartesianGrid: dim must be 1 or 2");
    if (n == 0) throw std::invalid_argument("CartesianGrid: n must be positive");
    if (!(extent > 0.0)) throw std::invalid_argument("CartesianGrid: extent must be positive");
    if (dim == 1) origin_[1] = 0.0;
  }

  int dim() const { return dim_; }
  std::size_t n() const { return n_; }
  const Point& origin() const { return origin_; }
  double extent() const { return extent_; }
  double h() const { return extent_ / static_cast<double>(n_); }

  std::size_t nodes_per_axis() const { return n_ + 1; }
  std::size_t node_count() const { return dim_ == 1 ? n_ + 1 : (n_ + 1) * (n_ + 1); }
  std::size_t cell_count() const { return dim_ == 1 ? n_ : n_ * n_; }
  std::size_t vertices_per_cell() const { return dim_ == 1 ? 2 : 4; }

  std::size_t node_index(std::size_t i, std::size_t j = 0) const { return i + j * (n_ + 1); }

  Point node(std::size_t k) const {
    const std::size_t i = k % (n_ + 1);
    const std::size_t j = k / (n_ + 1);
    return {origin_[0] + static_cast<double>(i) * h(),
            dim_ == 1 ? 0.0 : origin_[1] + static_cast<double>(j) * h()};
  }

  /// Lower-left corner of cell c.
  Point cell_origin(std::size_t c) const {
    if (dim_ == 1) return {origin_[0] + static_cast<double>(c) * h(), 0.0};
    return {origin_[0] + static_cast<double>(c % n_) * h(),
            origin_[1] + static_cast<double>(c / n_) * h()};
  }

  /// Vertex node ids of cell c in lexicographic order (x fastest). Only the
  /// first two entries are meaningful in 1D.
  std::array<std::size_t, 4> cell_nodes(std::size_t c) const {
    if (dim_ == 1) return {c, c + 1, 0, 0};
    const std::size_t i = c % n_;
    const std::size_t j = c / n_;
    const std::size_t k = node_index(i, j);
    return {k, k + 1, k + n_ + 1, k + n_ + 2};
  }

  bool on_box_boundary(std::size_t k) const {
    const std::size_t i = k % (n_ + 1);
    const std::size_t j = k / (n_ + 1);
    if (i == 0 || i == n_) return true;
    return dim_ == 2 && (j == 0 || j == n_);
  }

  CartesianGrid coarsened() const {
    if (n_ % 2 != 0) throw std::invalid_argument("CartesianGrid::coarsened: odd cell count");
    return CartesianGrid(dim_, n_ / 2, origin_, extent_);
  }

 private:
  int dim_;
  std::size_t n_;
  Point origin_;
  double extent_;
};

using Params = std::map<std::string, double>;

/// Level-set description of a domain Ω = {ψ < 0}. The evaluator is the max
/// over one or more components, so each boundary piece can be traced back to
/// the component that produced it.
class LevelSet {
 public:
  using Component = std::function<double(const Point&)>;

  LevelSet(std::string name, std::vector<Component> components, Params params = {})
      : name_(std::move(name)), components_(std::move(components)), params_(std::move(params)) {
    if (components_.empty()) throw std::invalid_argument("LevelSet: no components");
  }

  double operator()(const Point& x) const {
    double v = components_.front()(x);
    for (std::size_t k = 1; k < components_.size(); ++k) v = std::max(v, components_[k](x));
    return v;
  }

  std::size_t active_component(const Point& x) const {
    std::size_t best = 0;
    double v = components_.front()(x);
    for (std::size_t k = 1; k < components_.size(); ++k) {
      const double w = components_[k](x);
      if (w > v) {
        v = w;
        best = k;
      }
    }
    return best;
  }

  const std::string& name() const { return name_; }
  const Params& params() const { return params_; }
  std::size_t component_count() const { return components_.size(); }

 private:
  std::string name_;
  std::vector<Component> components_;
  Params params_;
};

enum class BoundaryKind { Dirichlet, Neumann };

/// Decides the condition on a boundary chord from its midpoint and the
/// level-set component that produced it.
using BoundaryAssignment = std::function<BoundaryKind(const Point& midpoint, std::size_t component)>;

inline BoundaryAssignment all_dirichlet() {
  return [](const Point&, std::size_t) { return BoundaryKind::Dirichlet; };
}

/// A catalog domain: level set, background box and boundary conditions.
struct Domain {
  LevelSet level_set;
  int dim = 2;
  Point box_origin{0.0, 0.0};
  double box_extent = 1.0;
  BoundaryAssignment bc = all_dirichlet();
  /// Selects background nodes on which Dirichlet data is imposed strongly.
  std::function<bool(const Point&)> strong_dirichlet;
};

struct CatalogEntry {
  std::string name;
  int dim;
  std::string description;
  Params defaults;
  std::vector<std::string> required;
};

inline const std::vector<CatalogEntry>& domain_catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"interval", 1, "1D interval (a, b), a=(1-theta1)h, b=1-(1-theta2)h; Dirichlet at a, Neumann at b",
       {}, {"theta1", "theta2", "h"}},
      {"disk", 2, "disk (x-xc)^2+(y-yc)^2-r^2 in [0,1]^2, Dirichlet",
       {{"xc", 0.5}, {"yc", 0.5}, {"r", 0.4}}, {}},
      {"annulus", 2, "annulus r1<|x-c|<r2 in [-1,1]^2; Dirichlet inner, Neumann outer",
       {{"xc", 0.0}, {"yc", 0.0}, {"r1", 0.5}, {"r2", 0.8}}, {}},
      {"flower", 2, "five-petal flower in [-1,1]^2, Dirichlet", {}, {}},
      {"leaf", 2, "intersection of two disks in [-1,1]^2; Dirichlet x>=0, Neumann x<0",
       {{"radius", 0.7}}, {}},
      {"hourglass", 2, "quartic hourglass in [-1,1]^2, Dirichlet", {}, {}},
      {"rectangle", 2,
       "[0,1]^2 cut by x = 1-(1-theta)h; weak Dirichlet on the cut, strong on x=0,y=0,y=1", {},
       {"theta", "h"}},
  };
  return entries;
}

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline double required_param(const Params& p, const std::string& domain, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) {
    throw std::invalid_argument("domain '" + domain + "' requires parameter '" + key + "'");
  }
  return it->second;
}

inline double flower_shift_x() { return 0.03 * std::sqrt(3.0); }
inline double flower_shift_y() { return 0.04 * std::sqrt(2.0); }

}  // namespace detail

/// Builds a catalog domain. Unknown names throw std::invalid_argument.
inline Domain make_domain(const std::string& name, const Params& params = {}) {
  using detail::param;
  using detail::required_param;
  if (name == "interval") {
    const double t1 = required_param(params, name, "theta1");
    const double t2 = required_param(params, name, "theta2");
    const double h = required_param(params, name, "h");
    const double a = (1.0 - t1) * h;
    const double b = 1.0 - (1.0 - t2) * h;
    Params p{{"theta1", t1}, {"theta2", t2}, {"h", h}, {"a", a}, {"b", b}};
    LevelSet ls(name, {[a](const Point& x) { return a - x[0]; },
                       [b](const Point& x) { return x[0] - b; }},
                p);
    Domain d{ls, 1, {0.0, 0.0}, 1.0};
    d.bc = [](const Point&, std::size_t comp) {
      return comp == 0 ? BoundaryKind::Dirichlet : BoundaryKind::Neumann;
    };
    return d;
  }
  if (name == "disk") {
    const double xc = param(params, "xc", 0.5);
    const double yc = param(params, "yc", 0.5);
    const double r = param(params, "r", 0.4);
    LevelSet ls(name,
                {[=](const Point& x) {
                  return (x[0] - xc) * (x[0] - xc) + (x[1] - yc) * (x[1] - yc) - r * r;
                }},
                {{"xc", xc}, {"yc", yc}, {"r", r}});
    return Domain{ls, 2, {0.0, 0.0}, 1.0};
  }
  if (name == "annulus") {
    const double xc = param(params, "xc", 0.0);
    const double yc = param(params, "yc", 0.0);
    const double r1 = param(params, "r1", 0.5);
    const double r2 = param(params, "r2", 0.8);
    auto d2 = [=](const Point& x) {
      return (x[0] - xc) * (x[0] - xc) + (x[1] - yc) * (x[1] - yc);
    };
    LevelSet ls(name,
                {[=](const Point& x) { return r1 * r1 - d2(x); },
                 [=](const Point& x) { return d2(x) - r2 * r2; }},
                {{"xc", xc}, {"yc", yc}, {"r1", r1}, {"r2", r2}});
    Domain d{ls, 2, {-1.0, -1.0}, 2.0};
    d.bc = [](const Point&, std::size_t comp) {
      return comp == 0 ? BoundaryKind::Dirichlet : BoundaryKind::Neumann;
    };
    return d;
  }
  if (name == "flower") {
    LevelSet ls(name, {[](const Point& p) {
                  const double X = p[0] - detail::flower_shift_x();
                  const double Y = p[1] - detail::flower_shift_y();
                  const double R = std::hypot(X, Y);
                  if (R == 0.0) return -0.52;
                  const double X2 = X * X;
                  const double Y2 = Y * Y;
                  const double num = Y2 * Y2 * Y + 5.0 * X2 * X2 * Y - 10.0 * X2 * Y2 * Y;
                  return R - 0.52 - num / (5.0 * std::pow(R, 5));
                }});
    return Domain{ls, 2, {-1.0, -1.0}, 2.0};
  }
  if (name == "leaf") {
    const double radius = param(params, "radius", 0.7);
    const double x1 = -0.25 * std::cos(std::numbers::pi / 4.0);
    const double x2 = 0.25 * std::sin(std::numbers::pi / 4.0);
    LevelSet ls(name,
                {[=](const Point& p) { return std::hypot(p[0] - x1, p[1]) - radius; },
                 [=](const Point& p) { return std::hypot(p[0] - x2, p[1]) - radius; }},
                {{"radius", radius}, {"x1", x1}, {"x2", x2}});
    Domain d{ls, 2, {-1.0, -1.0}, 2.0};
    d.bc = [](const Point& mid, std::size_t) {
      return mid[0] >= 0.0 ? BoundaryKind::Dirichlet : BoundaryKind::Neumann;
    };
    return d;
  }
  if (name == "hourglass") {
    LevelSet ls(name, {[](const Point& p) {
                  const double X = p[0] - detail::flower_shift_x();
                  const double Y = p[1] - detail::flower_shift_y();
                  const double X2 = X * X;
                  const double Y2 = Y * Y;
                  return 256.0 * Y2 * Y2 - 16.0 * X2 * X2 - 128.0 * Y2 + 36.0 * X2;
                }});
    return Domain{ls, 2, {-1.0, -1.0}, 2.0};
  }
  if (name == "rectangle") {
    const double theta = required_param(params, name, "theta");
    const double h = required_param(params, name, "h");
    const double shift = -1.0 + (1.0 - theta) * h;
    LevelSet ls(name, {[shift](const Point& p) { return p[0] + shift; }},
                {{"theta", theta}, {"h", h}});
    Domain d{ls, 2, {0.0, 0.0}, 1.0};
    d.strong_dirichlet = [](const Point& p) {
      return p[0] == 0.0 || p[1] == 0.0 || p[1] == 1.0;
    };
    return d;
  }
  throw std::invalid_argument("unknown domain '" + name + "'");
}

inline LevelSet domain_catalog(const std::string& name, const Params& params = {}) {
  return make_domain(name, params).level_set;
}

/// Nodal level-set values after snapping-back-to-grid.
struct SnappedNodeField {
  std::vector<double> psi;
  double alpha = 0.0;
  double threshold = 0.0;
};

/// Evaluates ψ on every node and replaces values with |ψ| < h^alpha by 0.
inline SnappedNodeField snap_nodes(const CartesianGrid& grid, const LevelSet& ls, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("snap_nodes: alpha must be positive");
  SnappedNodeField field;
  field.alpha = alpha;
  field.threshold = std::pow(grid.h(), alpha);
  field.psi.resize(grid.node_count());
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const double v = ls(grid.node(k));
    field.psi[k] = std::abs(v) < field.threshold ? 0.0 : v;
  }
  return field;
}

enum class CellTag { Internal, External, Cut };

struct CellClassification {
  std::vector<CellTag> tags;
  std::size_t internal = 0;
  std::size_t external = 0;
  std::size_t cut = 0;

  bool active(std::size_t c) const { return tags[c] != CellTag::External; }
};

namespace detail {

inline bool interior(double psi) { return psi < 0.0; }

// Local lexicographic vertex ids in counterclockwise order.
inline constexpr std::array<std::size_t, 4> kCcw = {0, 1, 3, 2};

inline CellTag classify_square(const std::array<double, 4>& v) {
  int m = 0;
  for (double x : v) m += interior(x) ? 1 : 0;
  if (m == 0) return CellTag::External;
  if (m == 4) return CellTag::Internal;
  if (m == 3) {
    // Boundary touching a single node: zero-length chord.
    for (double x : v)
      if (!interior(x) && x == 0.0) return CellTag::Internal;
    return CellTag::Cut;
  }
  if (m == 2) {
    const bool diagonal = interior(v[0]) == interior(v[3]);
    if (diagonal) {
      const double e1 = interior(v[0]) ? v[1] : v[0];
      const double e2 = interior(v[0]) ? v[2] : v[3];
      if (e1 == 0.0 && e2 == 0.0) return CellTag::Internal;
    }
  }
  return CellTag::Cut;
}

}  // namespace detail

/// Tags each cell from the signs of its snapped vertex values. A vertex is
/// interior iff ψ < 0. Cells whose boundary contact has zero length (a single
/// snapped node) count as internal.
inline CellClassification classify_cells(const CartesianGrid& grid, const SnappedNodeField& field) {
  if (field.psi.size() != grid.node_count()) {
    throw std::invalid_argument("classify_cells: field size does not match grid");
  }
  CellClassification cls;
  cls.tags.resize(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    CellTag tag;
    if (grid.dim() == 1) {
      const int m = (detail::interior(field.psi[nodes[0]]) ? 1 : 0) +
                    (detail::interior(field.psi[nodes[1]]) ? 1 : 0);
      tag = m == 0 ? CellTag::External : (m == 2 ? CellTag::Internal : CellTag::Cut);
    } else {
      tag = detail::classify_square({field.psi[nodes[0]], field.psi[nodes[1]],
                                     field.psi[nodes[2]], field.psi[nodes[3]]});
    }
    cls.tags[c] = tag;
    switch (tag) {
      case CellTag::Internal: ++cls.internal; break;
      case CellTag::External: ++cls.external; break;
      case CellTag::Cut: ++cls.cut; break;
    }
  }
  return cls;
}

/// Interior fraction of an edge from an interior vertex (psi_a < 0) to a
/// non-interior one (psi_b >= 0), by linear interpolation of ψ.
inline double cut_fraction(double psi_a, double psi_b) {
  if (!(psi_a < 0.0) || !(psi_b >= 0.0)) {
    throw std::invalid_argument("cut_fraction: expected psi_a < 0 <= psi_b");
  }
  return psi_a / (psi_a - psi_b);
}

enum class CutShape { Segment, Triangle, Quadrilateral, Pentagon };

inline const char* to_string(CutShape s) {
  switch (s) {
    case CutShape::Segment: return "segment";
    case CutShape::Triangle: return "triangle";
    case CutShape::Quadrilateral: return "quadrilateral";
    case CutShape::Pentagon: return "pentagon";
  }
  return "?";
}

/// Geometry of K ∩ Ω for one cut cell with the boundary replaced by a
/// straight chord. In 1D the polygon is the interior segment and the chord
/// collapses to the boundary point (chord_a == chord_b).
struct CutCellGeometry {
  std::size_t cell = 0;
  CutShape shape = CutShape::Triangle;
  std::array<double, 2> theta{1.0, 1.0};
  std::vector<Point> polygon;  // counterclockwise
  Point chord_a{};
  Point chord_b{};
  Point normal{};  // unit, pointing out of Ω
  BoundaryKind boundary = BoundaryKind::Dirichlet;

  double chord_length() const { return norm(chord_b - chord_a); }
  Point chord_midpoint() const { return 0.5 * (chord_a + chord_b); }
};

class CheckerboardCell : public std::runtime_error {
 public:
  explicit CheckerboardCell(std::size_t cell)
      : std::runtime_error("cut cell " + std::to_string(cell) +
                           " has a checkerboard sign pattern"),
        cell_(cell) {}
  std::size_t cell() const { return cell_; }

 private:
  std::size_t cell_;
};

inline double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

namespace detail {

inline CutCellGeometry extract_square(const CartesianGrid& grid, std::size_t c,
                                      const std::array<double, 4>& psi) {
  const double h = grid.h();
  const Point o = grid.cell_origin(c);
  const std::array<Point, 4> vtx = {o, o + Point{h, 0.0}, o + Point{0.0, h}, o + Point{h, h}};

  int m = 0;
  for (double v : psi) m += interior(v) ? 1 : 0;
  if (m == 2 && interior(psi[0]) == interior(psi[3])) throw CheckerboardCell(c);

  CutCellGeometry g;
  g.cell = c;
  g.shape = m == 1 ? CutShape::Triangle : (m == 2 ? CutShape::Quadrilateral : CutShape::Pentagon);

  // CCW edges: 0 bottom, 1 right, 2 top, 3 left.
  std::optional<Point> out_pt;
  std::optional<Point> in_pt;
  double theta_out = 1.0;
  double theta_in = 1.0;
  std::size_t edge_out = 0;
  std::size_t edge_in = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t a = kCcw[k];
    const std::size_t b = kCcw[(k + 1) % 4];
    if (interior(psi[a])) g.polygon.push_back(vtx[a]);
    if (interior(psi[a]) && !interior(psi[b])) {
      theta_out = cut_fraction(psi[a], psi[b]);
      out_pt = vtx[a] + theta_out * (vtx[b] - vtx[a]);
      edge_out = k;
      g.polygon.push_back(*out_pt);
    } else if (!interior(psi[a]) && interior(psi[b])) {
      theta_in = cut_fraction(psi[b], psi[a]);
      in_pt = vtx[b] + theta_in * (vtx[a] - vtx[b]);
      edge_in = k;
      g.polygon.push_back(*in_pt);
    }
  }
  g.chord_a = *out_pt;
  g.chord_b = *in_pt;
  const Point d = g.chord_b - g.chord_a;
  const double len = norm(d);
  g.normal = len > 0.0 ? Point{d[1] / len, -d[0] / len} : Point{0.0, 0.0};

  // theta[0]: horizontal edge (triangle/pentagon) or bottom/left edge
  // (quadrilateral); theta[1] the other crossing.
  const bool out_first = g.shape == CutShape::Quadrilateral ? (edge_out == 0 || edge_out == 3)
                                                             : edge_out % 2 == 0;
  g.theta = out_first ? std::array<double, 2>{theta_out, theta_in}
                      : std::array<double, 2>{theta_in, theta_out};
  return g;
}

}  // namespace detail

/// Cut-cell geometries for every cut cell, with chords labelled through the
/// domain's boundary assignment.
inline std::vector<CutCellGeometry> extract_cut_geometry(const CartesianGrid& grid,
                                                         const SnappedNodeField& field,
                                                         const CellClassification& cls,
                                                         const LevelSet& ls,
                                                         const BoundaryAssignment& bc) {
  std::vector<CutCellGeometry> cuts;
  cuts.reserve(cls.cut);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (cls.tags[c] != CellTag::Cut) continue;
    const auto nodes = grid.cell_nodes(c);
    CutCellGeometry g;
    if (grid.dim() == 1) {
      const Point x0 = grid.node(nodes[0]);
      const Point x1 = grid.node(nodes[1]);
      const bool left_in = detail::interior(field.psi[nodes[0]]);
      const Point xin = left_in ? x0 : x1;
      const Point xout = left_in ? x1 : x0;
      const double pin = field.psi[left_in ? nodes[0] : nodes[1]];
      const double pout = field.psi[left_in ? nodes[1] : nodes[0]];
      const double theta = cut_fraction(pin, pout);
      const Point xb = xin + theta * (xout - xin);
      g.cell = c;
      g.shape = CutShape::Segment;
      g.theta = {theta, theta};
      g.polygon = left_in ? std::vector<Point>{xin, xb} : std::vector<Point>{xb, xin};
      g.chord_a = g.chord_b = xb;
      g.normal = {left_in ? 1.0 : -1.0, 0.0};
    } else {
      g = detail::extract_square(
          grid, c,
          {field.psi[nodes[0]], field.psi[nodes[1]], field.psi[nodes[2]], field.psi[nodes[3]]});
    }
    const Point mid = g.chord_midpoint();
    g.boundary = bc(mid, ls.active_component(mid));
    cuts.push_back(std::move(g));
  }
  return cuts;
}

/// Everything geometric about one grid level.
struct Discretization {
  CartesianGrid grid;
  SnappedNodeField field;
  CellClassification classification;
  std::vector<CutCellGeometry> cuts;

  /// Nodes belonging to at least one active cell.
  std::vector<char> active_node_mask() const {
    std::vector<char> mask(grid.node_count(), 0);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (!classification.active(c)) continue;
      const auto nodes = grid.cell_nodes(c);
      for (std::size_t v = 0; v < grid.vertices_per_cell(); ++v) mask[nodes[v]] = 1;
    }
    return mask;
  }

  /// Nodes belonging to at least one cut cell.
  std::vector<char> cut_node_mask() const {
    std::vector<char> mask(grid.node_count(), 0);
    for (const auto& g : cuts) {
      const auto nodes = grid.cell_nodes(g.cell);
      for (std::size_t v = 0; v < grid.vertices_per_cell(); ++v) mask[nodes[v]] = 1;
    }
    return mask;
  }
};

inline Discretization discretize(const CartesianGrid& grid, const Domain& domain, double alpha) {
  if (grid.dim() != domain.dim) throw std::invalid_argument("discretize: dimension mismatch");
  auto field = snap_nodes(grid, domain.level_set, alpha);
  auto cls = classify_cells(grid, field);
  auto cuts = extract_cut_geometry(grid, field, cls, domain.level_set, domain.bc);
  return Discretization{grid, std::move(field), std::move(cls), std::move(cuts)};
}

}  // namespace ghostmg
