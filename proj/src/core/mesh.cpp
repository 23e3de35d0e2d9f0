#include "perfhom/core/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "perfhom/core/error.hpp"

namespace perfhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mesh

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[static_cast<std::size_t>(tri[0])];
  const Point b = vertices[static_cast<std::size_t>(tri[1])];
  const Point c = vertices[static_cast<std::size_t>(tri[2])];
  return 0.5 * cross(b - a, c - a);
}

double Mesh::area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += signed_area(t);
  return s;
}

double Mesh::region_area(int region) const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    if (triangle_region[t] == region) s += signed_area(t);
  }
  return s;
}

std::size_t Mesh::tagged_edge_count(int tag) const {
  return static_cast<std::size_t>(
      std::count_if(boundary_edges.begin(), boundary_edges.end(), [&](const BoundaryEdge& e) { return e.tag == tag; }));
}

double Mesh::tagged_edge_length(int tag) const {
  double s = 0.0;
  for (const auto& e : boundary_edges) {
    if (e.tag == tag) s += distance(vertices[static_cast<std::size_t>(e.a)], vertices[static_cast<std::size_t>(e.b)]);
  }
  return s;
}

std::vector<int> Mesh::tagged_vertices(int tag) const {
  std::vector<int> out;
  for (const auto& e : boundary_edges) {
    if (e.tag != tag) continue;
    out.push_back(e.a);
    out.push_back(e.b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const Mesh> m, std::vector<Complex> v)
    : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw invalid_argument("discrete function needs a mesh");
  if (values.size() != mesh->vertex_count()) {
    throw invalid_argument("value count " + std::to_string(values.size()) + " does not match vertex count " +
                           std::to_string(mesh->vertex_count()));
  }
}

DiscreteFunction DiscreteFunction::interpolate(std::shared_ptr<const Mesh> m, const std::function<Complex(Point)>& f) {
  std::vector<Complex> v(m->vertex_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(m->vertices[i]);
  return {std::move(m), std::move(v)};
}

// ---------------------------------------------------------------------------
// Loops

CurveLoop circle_loop(Point center, double radius, int inside_region, int outside_region, int tag,
                      std::size_t min_segments) {
  CurveLoop l;
  l.point = [center, radius](double t) { return Point{center.x + radius * std::cos(t), center.y + radius * std::sin(t)}; };
  l.period = kTwoPi;
  l.inside_region = inside_region;
  l.outside_region = outside_region;
  l.tag = tag;
  l.min_segments = min_segments;
  return l;
}

CurveLoop rectangle_loop(Point lo, Point hi, int tag) {
  const double w = hi.x - lo.x;
  const double h = hi.y - lo.y;
  CurveLoop l;
  l.point = [lo, hi, w, h](double s) {
    if (s < w) return Point{lo.x + s, lo.y};
    s -= w;
    if (s < h) return Point{hi.x, lo.y + s};
    s -= h;
    if (s < w) return Point{hi.x - s, hi.y};
    s -= w;
    return Point{lo.x, hi.y - s};
  };
  l.period = 2.0 * (w + h);
  l.breaks = {0.0, w, w + h, 2.0 * w + h};
  l.inside_region = 0;
  l.outside_region = kVoidRegion;
  l.tag = tag;
  l.min_segments = 4;
  return l;
}

CurveLoop cavity_loop(const ScaledCavity& cavity, int inside_region, int outside_region, int tag,
                      std::size_t min_segments) {
  CurveLoop l;
  l.point = [cavity](double t) { return cavity.boundary_point(t); };
  l.period = kTwoPi;
  l.inside_region = inside_region;
  l.outside_region = outside_region;
  l.tag = tag;
  l.min_segments = min_segments;
  return l;
}

CurveLoop domain_loop(const DomainSpec& domain, std::size_t min_segments) {
  if (domain.kind() == DomainKind::disk) {
    return circle_loop(domain.center(), domain.radius(), 0, kVoidRegion, 0, min_segments);
  }
  return rectangle_loop(domain.lo(), domain.hi(), 0);
}

// ---------------------------------------------------------------------------
// Perforated meshes

namespace {

// min(h, c_k + g * max(0, |x - M_k| - r_k)) over nearby cavities, with c_k the near-cavity size.
class CavitySizeField {
 public:
  CavitySizeField(const Perforation& p, double h, const PerforatedMeshOptions& o) : h_(h), grading_(o.grading) {
    const double scale = p.cavity_scale();
    near_ = std::min(h, o.near_factor * scale);
    double rmax = 0.0;
    for (const Cavity& c : p.cavities) {
      centers_.push_back(c.center);
      const double r = scale * (c.shape.max_radius() + 1.0);
      radii_.push_back(r);
      rmax = std::max(rmax, r);
    }
    reach_ = rmax + (h - near_) / grading_;
    auto [lo, hi] = p.domain.bounding_box();
    lo_ = lo;
    cell_ = std::max(reach_, 1e-12);
    nx_ = std::max<long>(1, static_cast<long>(std::ceil((hi.x - lo.x) / cell_)) + 1);
    ny_ = std::max<long>(1, static_cast<long>(std::ceil((hi.y - lo.y) / cell_)) + 1);
    cells_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      cells_[static_cast<std::size_t>(cy(centers_[k]) * nx_ + cx(centers_[k]))].push_back(static_cast<int>(k));
    }
  }

  double operator()(Point x) const {
    double s = h_;
    const long i = cx(x);
    const long j = cy(x);
    for (long b = std::max(0L, j - 1); b <= std::min(ny_ - 1, j + 1); ++b) {
      for (long a = std::max(0L, i - 1); a <= std::min(nx_ - 1, i + 1); ++a) {
        for (int k : cells_[static_cast<std::size_t>(b * nx_ + a)]) {
          const double d = distance(x, centers_[static_cast<std::size_t>(k)]) - radii_[static_cast<std::size_t>(k)];
          s = std::min(s, near_ + grading_ * std::max(0.0, d));
        }
      }
    }
    return s;
  }

 private:
  long cx(Point x) const { return std::clamp(static_cast<long>(std::floor((x.x - lo_.x) / cell_)), 0L, nx_ - 1); }
  long cy(Point x) const { return std::clamp(static_cast<long>(std::floor((x.y - lo_.y) / cell_)), 0L, ny_ - 1); }

  double h_;
  double grading_;
  double near_ = 0.0;
  double reach_ = 0.0;
  std::vector<Point> centers_;
  std::vector<double> radii_;
  Point lo_;
  double cell_ = 1.0;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

void check_cavity_layout(const Perforation& p) {
  const double scale = p.cavity_scale();
  std::vector<double> outer(p.cavities.size());
  for (std::size_t k = 0; k < p.cavities.size(); ++k) {
    outer[k] = scale * p.cavities[k].shape.max_radius();
    if (p.domain.boundary_distance(p.cavities[k].center) <= outer[k]) {
      throw mesh_error("cavity " + std::to_string(k + 1) + " touches the outer boundary");
    }
  }
  for (std::size_t k = 0; k < p.cavities.size(); ++k) {
    for (std::size_t j = k + 1; j < p.cavities.size(); ++j) {
      if (distance(p.cavities[k].center, p.cavities[j].center) <= outer[k] + outer[j]) {
        throw mesh_error("cavities " + std::to_string(k + 1) + " and " + std::to_string(j + 1) + " overlap");
      }
    }
  }
}

std::vector<CurveLoop> perforation_loops(const Perforation& p, double h, const PerforatedMeshOptions& o, bool filled) {
  if (!(h > 0.0)) throw invalid_argument("mesh size h must be positive");
  if (o.segments_per_cavity < 8) throw invalid_argument("segments_per_cavity must be at least 8");
  check_cavity_layout(p);
  std::vector<CurveLoop> loops;
  loops.push_back(domain_loop(p.domain, 16));
  const double scale = p.cavity_scale();
  // Chord sagitta of a radius-r arc with N pieces is about r pi^2 / (2 N^2); hold it to (h/(eps eta))^2 relative.
  const double rel = std::min(1.0, (h / scale) * (h / scale));
  const auto n_geo = static_cast<std::size_t>(std::ceil(std::numbers::pi / std::sqrt(2.0 * rel)));
  for (std::size_t k = 0; k < p.cavities.size(); ++k) {
    const ScaledCavity cav = scaled_cavity(p, k);
    const int tag = static_cast<int>(k) + 1;
    const std::size_t n = std::max(o.segments_per_cavity, n_geo);
    loops.push_back(filled ? cavity_loop(cav, tag, 0, tag, n) : cavity_loop(cav, kVoidRegion, 0, tag, n));
  }
  return loops;
}

Mesh mesh_with_loops(const Perforation& p, double h, const PerforatedMeshOptions& o, bool filled) {
  const auto loops = perforation_loops(p, h, o, filled);
  const auto field = std::make_shared<CavitySizeField>(p, h, o);
  Mesh m = triangulate(loops, [field](Point x) { return (*field)(x); });
  m.cavity_count = p.cavities.size();
  return m;
}

}  // namespace

Mesh mesh_perforated(const Perforation& p, double h, const PerforatedMeshOptions& options) {
  return mesh_with_loops(p, h, options, false);
}

Mesh mesh_filled(const Perforation& p, double h, const PerforatedMeshOptions& options) {
  Mesh m = mesh_with_loops(p, h, options, true);
  return m;
}

Mesh mesh_unperforated(const DomainSpec& domain, double h) {
  if (!(h > 0.0)) throw invalid_argument("mesh size h must be positive");
  if (!(domain.area() > 0.0)) throw mesh_error("degenerate domain");
  return triangulate({domain_loop(domain, 16)}, [h](Point) { return h; });
}

Mesh extract_region(const Mesh& mesh, int region, std::vector<int>* vertex_map) {
  Mesh out;
  out.cavity_count = mesh.cavity_count;
  std::vector<int> map(mesh.vertex_count(), -1);
  std::unordered_map<std::uint64_t, int> edge_use;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_region[t] != region) continue;
    std::array<int, 3> tri{};
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles[t][static_cast<std::size_t>(i)];
      int& id = map[static_cast<std::size_t>(v)];
      if (id < 0) {
        id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
      }
      tri[static_cast<std::size_t>(i)] = id;
    }
    for (int i = 0; i < 3; ++i) ++edge_use[edge_key(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>((i + 1) % 3)])];
    out.triangles.push_back(tri);
    out.triangle_region.push_back(region);
  }
  auto remap = [&](const BoundaryEdge& e, BoundaryEdge& r) {
    r = {map[static_cast<std::size_t>(e.a)], map[static_cast<std::size_t>(e.b)], e.tag};
    return r.a >= 0 && r.b >= 0 && edge_use.count(edge_key(r.a, r.b)) > 0;
  };
  BoundaryEdge r;
  for (const auto& e : mesh.boundary_edges) {
    if (remap(e, r)) out.boundary_edges.push_back(r);
  }
  for (const auto& e : mesh.interface_edges) {
    if (!remap(e, r)) continue;
    if (edge_use[edge_key(r.a, r.b)] == 1) {
      out.boundary_edges.push_back(r);
    } else {
      out.interface_edges.push_back(r);
    }
  }
  for (const auto& t : out.triangles) {
    for (int i = 0; i < 3; ++i) {
      out.h_max = std::max(out.h_max, distance(out.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])],
                                               out.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((i + 1) % 3)])]));
    }
  }
  if (vertex_map) *vertex_map = std::move(map);
  return out;
}

std::vector<std::string> check_mesh(const Mesh& mesh, const Perforation* p, double tol) {
  std::vector<std::string> issues;
  if (mesh.triangle_region.size() != mesh.triangles.size()) issues.push_back("region array size mismatch");
  std::unordered_map<std::uint64_t, int> use;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertex_count()) {
        issues.push_back("triangle " + std::to_string(t) + " has an invalid vertex index");
        return issues;
      }
    }
    if (!(mesh.signed_area(t) > 0.0)) issues.push_back("triangle " + std::to_string(t) + " has nonpositive area");
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) ++use[edge_key(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>((i + 1) % 3)])];
  }
  std::size_t single = 0;
  for (const auto& [key, n] : use) {
    if (n > 2) issues.push_back("edge shared by more than two triangles");
    if (n == 1) ++single;
  }
  for (const auto& e : mesh.boundary_edges) {
    const auto it = use.find(edge_key(e.a, e.b));
    if (it == use.end() || it->second != 1) issues.push_back("boundary edge not on exactly one triangle");
  }
  if (single != mesh.boundary_edges.size()) issues.push_back("boundary edges do not cover the mesh rim");
  if (p) {
    const double scale = p->cavity_scale();
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag <= 0) continue;
      if (static_cast<std::size_t>(e.tag) > p->cavities.size()) {
        issues.push_back("cavity tag out of range");
        continue;
      }
      const Cavity& c = p->cavities[static_cast<std::size_t>(e.tag - 1)];
      for (int v : {e.a, e.b}) {
        const Point x = mesh.vertices[static_cast<std::size_t>(v)] - c.center;
        const double r = scale * c.shape.radius(std::atan2(x.y, x.x));
        if (std::abs(norm(x) - r) > tol * std::max(1.0, r) + tol) {
          issues.push_back("cavity " + std::to_string(e.tag) + " edge endpoint off the boundary");
        }
      }
    }
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      const Point x = mesh.vertices[i];
      for (std::size_t k = 0; k < p->cavities.size(); ++k) {
        const Point d = x - p->cavities[k].center;
        const double r = scale * p->cavities[k].shape.radius(std::atan2(d.y, d.x));
        if (norm(d) < r * (1.0 - tol)) {
          issues.push_back("vertex " + std::to_string(i) + " inside cavity " + std::to_string(k + 1));
        }
      }
    }
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Location and transfer

PointLocator::PointLocator(const Mesh& mesh) : mesh_(mesh) {
  Point lo{1e300, 1e300};
  Point hi{-1e300, -1e300};
  for (const Point& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  if (mesh.vertices.empty()) return;
  lo_ = lo;
  const double w = std::max(hi.x - lo.x, 1e-300);
  const double h = std::max(hi.y - lo.y, 1e-300);
  const double n = std::max(1.0, static_cast<double>(mesh.triangle_count()));
  cell_ = std::sqrt(w * h / n) * 1.5;
  nx_ = std::max<long>(1, static_cast<long>(std::ceil(w / cell_)) + 1);
  ny_ = std::max<long>(1, static_cast<long>(std::ceil(h / cell_)) + 1);
  cells_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    Point tlo{1e300, 1e300};
    Point thi{-1e300, -1e300};
    for (int v : mesh.triangles[t]) {
      const Point q = mesh.vertices[static_cast<std::size_t>(v)];
      tlo = {std::min(tlo.x, q.x), std::min(tlo.y, q.y)};
      thi = {std::max(thi.x, q.x), std::max(thi.y, q.y)};
    }
    const long i0 = std::clamp(static_cast<long>((tlo.x - lo_.x) / cell_), 0L, nx_ - 1);
    const long i1 = std::clamp(static_cast<long>((thi.x - lo_.x) / cell_), 0L, nx_ - 1);
    const long j0 = std::clamp(static_cast<long>((tlo.y - lo_.y) / cell_), 0L, ny_ - 1);
    const long j1 = std::clamp(static_cast<long>((thi.y - lo_.y) / cell_), 0L, ny_ - 1);
    for (long j = j0; j <= j1; ++j) {
      for (long i = i0; i <= i1; ++i) cells_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
    }
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(Point p, double snap_tol) const {
  if (cells_.empty()) return std::nullopt;
  const double fx = (p.x - lo_.x) / cell_;
  const double fy = (p.y - lo_.y) / cell_;
  if (fx < -1.0 || fy < -1.0 || fx > nx_ + 1.0 || fy > ny_ + 1.0) return std::nullopt;
  const long i = std::clamp(static_cast<long>(fx), 0L, nx_ - 1);
  const long j = std::clamp(static_cast<long>(fy), 0L, ny_ - 1);
  Hit best;
  double best_min = -1e300;
  for (int t : cells_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto& tri = mesh_.triangles[static_cast<std::size_t>(t)];
    const Point a = mesh_.vertices[static_cast<std::size_t>(tri[0])];
    const Point b = mesh_.vertices[static_cast<std::size_t>(tri[1])];
    const Point c = mesh_.vertices[static_cast<std::size_t>(tri[2])];
    const double det = cross(b - a, c - a);
    const double l1 = cross(b - p, c - p) / det;
    const double l2 = cross(c - p, a - p) / det;
    const double l3 = 1.0 - l1 - l2;
    const double m = std::min({l1, l2, l3});
    if (m > best_min) {
      best_min = m;
      best.triangle = t;
      best.bary = {l1, l2, l3};
    }
    if (m >= 0.0) break;
  }
  if (best.triangle < 0 || best_min < -snap_tol) return std::nullopt;
  if (best_min < 0.0) {
    double s = 0.0;
    for (double& l : best.bary) {
      l = std::max(l, 0.0);
      s += l;
    }
    for (double& l : best.bary) l /= s;
  }
  return best;
}

DiscreteFunction transfer(const DiscreteFunction& u, std::shared_ptr<const Mesh> target, double snap_tol) {
  if (!u.mesh || !target) throw invalid_argument("transfer needs both meshes");
  const Mesh& a = *u.mesh;
  PointLocator locator(a);
  std::vector<Complex> values(target->vertex_count());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < target->vertex_count(); ++i) {
    const auto hit = locator.locate(target->vertices[i], snap_tol);
    if (!hit) {
      missing.push_back(i);
      continue;
    }
    const auto& tri = a.triangles[static_cast<std::size_t>(hit->triangle)];
    values[i] = hit->bary[0] * u.values[static_cast<std::size_t>(tri[0])] +
                hit->bary[1] * u.values[static_cast<std::size_t>(tri[1])] +
                hit->bary[2] * u.values[static_cast<std::size_t>(tri[2])];
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " target vertices lie outside the source mesh:";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 8); ++k) {
      const Point q = target->vertices[missing[k]];
      msg << " #" << missing[k] << " (" << q.x << ", " << q.y << ")";
    }
    if (missing.size() > 8) msg << " ...";
    throw mesh_error(msg.str());
  }
  return {std::move(target), std::move(values)};
}

// ---------------------------------------------------------------------------
// Text format

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
  const auto old = out.precision(17);
  out << "VERTICES " << mesh.vertex_count() << '\n';
  for (const Point& v : mesh.vertices) out << v.x << ' ' << v.y << '\n';
  out << "TRIANGLES " << mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "BOUNDARY " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) out << e.a << ' ' << e.b << ' ' << e.tag << '\n';
  out.precision(old);
}

std::string mesh_to_text(const Mesh& mesh) {
  std::ostringstream ss;
  write_mesh_text(mesh, ss);
  return ss.str();
}

Mesh read_mesh_text(std::istream& in) {
  Mesh m;
  std::string section;
  std::size_t n = 0;
  auto expect = [&](const char* name) {
    if (!(in >> section >> n) || section != name) throw io_error(std::string("mesh text: expected section ") + name);
  };
  expect("VERTICES");
  m.vertices.resize(n);
  for (auto& v : m.vertices) {
    if (!(in >> v.x >> v.y)) throw io_error("mesh text: truncated VERTICES");
  }
  expect("TRIANGLES");
  m.triangles.resize(n);
  for (auto& t : m.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw io_error("mesh text: truncated TRIANGLES");
  }
  m.triangle_region.assign(n, 0);
  expect("BOUNDARY");
  m.boundary_edges.resize(n);
  int max_tag = 0;
  for (auto& e : m.boundary_edges) {
    if (!(in >> e.a >> e.b >> e.tag)) throw io_error("mesh text: truncated BOUNDARY");
    max_tag = std::max(max_tag, e.tag);
  }
  m.cavity_count = static_cast<std::size_t>(max_tag);
  for (const auto& t : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      m.h_max = std::max(m.h_max, distance(m.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])],
                                           m.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((i + 1) % 3)])]));
    }
  }
  return m;
}

}  // namespace perfhom
