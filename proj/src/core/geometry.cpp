#include "perfhom/core/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "perfhom/core/error.hpp"

namespace perfhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string cavity_label(std::size_t k) { return std::to_string(k + 1); }

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec DomainSpec::disk(Point center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw invalid_argument("disk domain needs a positive radius");
  }
  DomainSpec d;
  d.kind_ = DomainKind::disk;
  d.center_ = center;
  d.radius_ = radius;
  d.lo_ = {center.x - radius, center.y - radius};
  d.hi_ = {center.x + radius, center.y + radius};
  return d;
}

DomainSpec DomainSpec::rectangle(Point lo, Point hi) {
  if (!(hi.x > lo.x) || !(hi.y > lo.y)) {
    throw invalid_argument("rectangle domain needs strictly positive side lengths");
  }
  DomainSpec d;
  d.kind_ = DomainKind::rectangle;
  d.lo_ = lo;
  d.hi_ = hi;
  d.center_ = {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
  return d;
}

Point DomainSpec::center() const { return center_; }

double DomainSpec::area() const {
  if (kind_ == DomainKind::disk) return std::numbers::pi * radius_ * radius_;
  return (hi_.x - lo_.x) * (hi_.y - lo_.y);
}

double DomainSpec::perimeter() const {
  if (kind_ == DomainKind::disk) return kTwoPi * radius_;
  return 2.0 * ((hi_.x - lo_.x) + (hi_.y - lo_.y));
}

bool DomainSpec::contains(Point p) const { return boundary_distance(p) > 0.0; }

double DomainSpec::boundary_distance(Point p) const {
  if (kind_ == DomainKind::disk) return radius_ - distance(p, center_);
  const double inside = std::min({p.x - lo_.x, hi_.x - p.x, p.y - lo_.y, hi_.y - p.y});
  if (inside >= 0.0) return inside;
  const double dx = std::max({lo_.x - p.x, 0.0, p.x - hi_.x});
  const double dy = std::max({lo_.y - p.y, 0.0, p.y - hi_.y});
  return -std::hypot(dx, dy);
}

double DomainSpec::ray_length(double theta) const {
  if (kind_ == DomainKind::disk) return radius_;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double hx = 0.5 * (hi_.x - lo_.x);
  const double hy = 0.5 * (hi_.y - lo_.y);
  double t = std::numeric_limits<double>::infinity();
  if (std::abs(c) > 0.0) t = std::min(t, hx / std::abs(c));
  if (std::abs(s) > 0.0) t = std::min(t, hy / std::abs(s));
  return t;
}

std::pair<Point, Point> DomainSpec::bounding_box() const { return {lo_, hi_}; }

// ---------------------------------------------------------------------------
// Shapes

double FourierProfile::value(double theta) const {
  double r = a0;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) r += cos_coeffs[k] * std::cos((k + 1) * theta);
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) r += sin_coeffs[k] * std::sin((k + 1) * theta);
  return r;
}

double FourierProfile::derivative(double theta) const {
  double d = 0.0;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    d -= static_cast<double>(k + 1) * cos_coeffs[k] * std::sin((k + 1) * theta);
  }
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    d += static_cast<double>(k + 1) * sin_coeffs[k] * std::cos((k + 1) * theta);
  }
  return d;
}

FourierProfile FourierProfile::from_samples(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 3) throw invalid_argument("star profile needs at least 3 samples");
  FourierProfile p;
  p.a0 = 0.0;
  for (double s : samples) p.a0 += s;
  p.a0 /= static_cast<double>(n);
  // Drop the Nyquist term for even n so the interpolant stays real and smooth.
  const std::size_t harmonics = (n - 1) / 2;
  p.cos_coeffs.assign(harmonics, 0.0);
  p.sin_coeffs.assign(harmonics, 0.0);
  for (std::size_t k = 1; k <= harmonics; ++k) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      c += samples[j] * std::cos(k * th);
      s += samples[j] * std::sin(k * th);
    }
    p.cos_coeffs[k - 1] = 2.0 * c / static_cast<double>(n);
    p.sin_coeffs[k - 1] = 2.0 * s / static_cast<double>(n);
  }
  return p;
}

CavityShape CavityShape::unit_disk() { return CavityShape{}; }

CavityShape CavityShape::star(FourierProfile profile, Point inner_center) {
  CavityShape s;
  s.kind_ = ShapeKind::star;
  s.profile_ = std::move(profile);
  s.inner_center_ = inner_center;
  if (!(s.min_radius() > 0.0)) throw invalid_argument("star profile must stay positive");
  return s;
}

double CavityShape::radius(double theta) const {
  return kind_ == ShapeKind::unit_disk ? 1.0 : profile_.value(theta);
}

double CavityShape::radius_derivative(double theta) const {
  return kind_ == ShapeKind::unit_disk ? 0.0 : profile_.derivative(theta);
}

bool CavityShape::contains(Point local) const {
  const double r = norm(local);
  if (r == 0.0) return true;
  return r < radius(std::atan2(local.y, local.x));
}

double CavityShape::min_radius(int grid) const {
  if (kind_ == ShapeKind::unit_disk) return 1.0;
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) m = std::min(m, radius(kTwoPi * i / grid));
  return m;
}

double CavityShape::max_radius(int grid) const {
  if (kind_ == ShapeKind::unit_disk) return 1.0;
  double m = 0.0;
  for (int i = 0; i < grid; ++i) m = std::max(m, radius(kTwoPi * i / grid));
  return m;
}

double CavityShape::max_abs_derivative(int grid) const {
  if (kind_ == ShapeKind::unit_disk) return 0.0;
  double m = 0.0;
  for (int i = 0; i < grid; ++i) m = std::max(m, std::abs(radius_derivative(kTwoPi * i / grid)));
  return m;
}

CavityShape shape_from_preset(const std::string& preset, Radii radii, std::uint64_t draw) {
  if (preset == "disk") return CavityShape::unit_disk();
  if (preset == "star3") {
    FourierProfile p;
    p.a0 = 0.8;
    p.cos_coeffs = {0.0, 0.0, 0.1};
    return CavityShape::star(p);
  }
  if (preset == "mixed") {
    std::mt19937_64 rng(mix_seed(draw, 17));
    if (rng() % 4 == 0) return CavityShape::unit_disk();
    const int harmonic = 2 + static_cast<int>(rng() % 4);
    const double lo = radii.r1;
    const double hi = std::min(radii.r2, 1.0);
    const double mid = 0.5 * (lo + hi);
    const double amp = 0.4 * (hi - lo) * uniform01(rng);
    const double phase = kTwoPi * uniform01(rng);
    FourierProfile p;
    p.a0 = mid;
    p.cos_coeffs.assign(harmonic, 0.0);
    p.sin_coeffs.assign(harmonic, 0.0);
    p.cos_coeffs[harmonic - 1] = amp * std::cos(phase);
    p.sin_coeffs[harmonic - 1] = amp * std::sin(phase);
    return CavityShape::star(p);
  }
  throw invalid_argument("unknown shape preset '" + preset + "'");
}

// ---------------------------------------------------------------------------
// Scaled cavities

bool ScaledCavity::contains(Point x) const { return shape_.contains((1.0 / scale_) * (x - center_)); }

Point ScaledCavity::boundary_point(double theta) const {
  const double r = scale_ * shape_.radius(theta);
  return {center_.x + r * std::cos(theta), center_.y + r * std::sin(theta)};
}

std::vector<Point> ScaledCavity::boundary_polygon(std::size_t vertices) const {
  if (vertices < 3) throw invalid_argument("boundary polygon needs at least 3 vertices");
  std::vector<Point> poly;
  poly.reserve(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    poly.push_back(boundary_point(kTwoPi * static_cast<double>(i) / static_cast<double>(vertices)));
  }
  return poly;
}

ScaledCavity scaled_cavity(const Perforation& p, std::size_t k) {
  if (k >= p.cavities.size()) {
    throw invalid_argument("cavity index " + std::to_string(k) + " out of range (" +
                           std::to_string(p.cavities.size()) + " cavities)");
  }
  return {p.cavities[k].center, p.cavity_scale(), p.cavities[k].shape};
}

double polygon_perimeter(const std::vector<Point>& polygon) {
  double s = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) s += distance(polygon[i], polygon[(i + 1) % polygon.size()]);
  return s;
}

double polygon_area(const std::vector<Point>& polygon) {
  double a = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) a += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  return 0.5 * a;
}

double surface_measure_constant(const CavityShape& shape, Radii radii) {
  return kTwoPi * (radii.r2 + shape.max_abs_derivative());
}

// ---------------------------------------------------------------------------
// Generation

std::size_t packing_bound(const DomainSpec& domain, double epsilon, double r3) {
  const double g = r3 * epsilon;
  return static_cast<std::size_t>(std::floor(domain.area() / (std::numbers::pi * g * g)));
}

namespace {

// Uniform background grid with cells of side <= min distance / sqrt(2): one center per cell.
class CenterGrid {
 public:
  CenterGrid(Point lo, Point hi, double min_dist)
      : lo_(lo), cell_(min_dist / std::sqrt(2.0)), min_dist2_(min_dist * min_dist) {
    nx_ = std::max<long>(1, static_cast<long>(std::ceil((hi.x - lo.x) / cell_)) + 1);
    ny_ = std::max<long>(1, static_cast<long>(std::ceil((hi.y - lo.y) / cell_)) + 1);
    cells_.assign(static_cast<std::size_t>(nx_ * ny_), -1);
  }

  bool admissible(Point p, const std::vector<Point>& centers) const {
    const long ix = index_x(p);
    const long iy = index_y(p);
    for (long j = std::max(0L, iy - 2); j <= std::min(ny_ - 1, iy + 2); ++j) {
      for (long i = std::max(0L, ix - 2); i <= std::min(nx_ - 1, ix + 2); ++i) {
        const int c = cells_[static_cast<std::size_t>(j * nx_ + i)];
        if (c >= 0 && distance_squared(p, centers[static_cast<std::size_t>(c)]) < min_dist2_) return false;
      }
    }
    return true;
  }

  void add(Point p, int id) { cells_[static_cast<std::size_t>(index_y(p) * nx_ + index_x(p))] = id; }

 private:
  long index_x(Point p) const { return std::clamp(static_cast<long>((p.x - lo_.x) / cell_), 0L, nx_ - 1); }
  long index_y(Point p) const { return std::clamp(static_cast<long>((p.y - lo_.y) / cell_), 0L, ny_ - 1); }

  Point lo_;
  double cell_;
  double min_dist2_;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<int> cells_;
};

}  // namespace

Perforation generate_perforation(const DomainSpec& domain, double epsilon, double eta, Radii radii,
                                 const GenerationOptions& options) {
  if (!(radii.r1 < radii.r2 && radii.r2 < radii.r3) || !(radii.r1 > 0.0)) {
    throw invalid_argument("radii must satisfy 0 < R1 < R2 < R3");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw invalid_argument("epsilon must lie in (0, 1]");
  if (!(eta > 0.0 && eta <= 1.0)) throw invalid_argument("eta must lie in (0, 1]");
  if (!(domain.area() > 0.0)) throw invalid_argument("domain must be nonempty");

  const std::size_t bound = packing_bound(domain, epsilon, radii.r3);
  if (options.target_count && *options.target_count > bound) {
    std::ostringstream msg;
    msg << "infeasible request: target_count " << *options.target_count << " exceeds packing bound " << bound
        << " = floor(area / (pi (R3 eps)^2))";
    throw infeasible(msg.str());
  }

  // Reject shape presets that cannot satisfy the radii before sampling anything.
  const CavityShape probe = shape_from_preset(options.shape_preset, radii, 0);
  if (probe.max_radius() > radii.r2 || probe.min_radius() - norm(probe.inner_center()) < radii.r1) {
    throw invalid_argument("shape preset '" + options.shape_preset + "' is incompatible with radii R1/R2");
  }

  Perforation perf;
  perf.domain = domain;
  perf.epsilon = epsilon;
  perf.eta = eta;
  perf.radii = radii;

  const double guard = radii.r3 * epsilon;
  const std::size_t target = options.target_count.value_or(std::numeric_limits<std::size_t>::max());
  if (target == 0) return perf;

  Point lo;
  Point hi;
  if (domain.kind() == DomainKind::rectangle) {
    lo = {domain.lo().x + guard, domain.lo().y + guard};
    hi = {domain.hi().x - guard, domain.hi().y - guard};
  } else {
    const double r = domain.radius() - guard;
    lo = {domain.center().x - r, domain.center().y - r};
    hi = {domain.center().x + r, domain.center().y + r};
  }
  const bool region_empty = !(hi.x >= lo.x && hi.y >= lo.y);
  if (region_empty) {
    if (options.target_count) throw infeasible("infeasible request: no admissible center at distance R3 eps from the boundary");
    return perf;
  }

  const std::size_t cap = options.rejection_cap > 0 ? options.rejection_cap : std::max<std::size_t>(100, 10 * bound);
  std::mt19937_64 rng(options.seed);
  CenterGrid grid(lo, hi, 2.0 * guard);
  std::vector<Point> centers;
  std::size_t rejections = 0;
  while (centers.size() < target && rejections < cap) {
    const Point c{lo.x + (hi.x - lo.x) * uniform01(rng), lo.y + (hi.y - lo.y) * uniform01(rng)};
    if (domain.boundary_distance(c) < guard || !grid.admissible(c, centers)) {
      ++rejections;
      continue;
    }
    grid.add(c, static_cast<int>(centers.size()));
    centers.push_back(c);
    rejections = 0;
  }
  if (options.target_count && centers.size() < target) {
    std::ostringstream msg;
    msg << "infeasible request: placed " << centers.size() << " of " << target << " cavities before "
        << cap << " consecutive rejections";
    throw infeasible(msg.str());
  }

  perf.cavities.reserve(centers.size());
  for (const Point& c : centers) perf.cavities.push_back({c, shape_from_preset(options.shape_preset, radii, rng())});
  return perf;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_a1(const Perforation& p, double rel_tol) {
  ValidationReport report;
  auto& v = report.violations;
  const Radii& r = p.radii;
  if (!(r.r1 > 0.0 && r.r1 < r.r2 && r.r2 < r.r3)) v.push_back("radii ordering (need 0 < R1 < R2 < R3)");
  if (!(p.epsilon > 0.0 && p.epsilon <= 1.0)) v.push_back("epsilon out of range (0,1]");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) v.push_back("eta out of range (0,1]");

  const double guard = r.r3 * p.epsilon;
  const double min_d2 = 4.0 * guard * guard * (1.0 - rel_tol);
  const std::size_t n = p.cavities.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = k + 1; j < n; ++j) {
      if (distance_squared(p.cavities[k].center, p.cavities[j].center) < min_d2) {
        v.push_back("guard-ball overlap (k=" + cavity_label(k) + ",j=" + cavity_label(j) + ")");
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (p.domain.boundary_distance(p.cavities[k].center) < guard * (1.0 - rel_tol)) {
      v.push_back("boundary clearance (k=" + cavity_label(k) + ")");
    }
    const CavityShape& s = p.cavities[k].shape;
    constexpr int grid = 2048;
    double max_fd = 0.0;
    bool finite = true;
    const double dtheta = kTwoPi / grid;
    for (int i = 0; i < grid; ++i) {
      const double th = dtheta * i;
      const double rho = s.radius(th);
      finite = finite && std::isfinite(rho);
      if (rho > r.r2 * (1.0 + rel_tol)) {
        v.push_back("shape exceeds outer ball R2 (k=" + cavity_label(k) + ")");
        break;
      }
      if (rho - norm(s.inner_center()) < r.r1 * (1.0 - rel_tol)) {
        v.push_back("inner ball R1 not contained (k=" + cavity_label(k) + ")");
        break;
      }
      max_fd = std::max(max_fd, std::abs(s.radius(th + dtheta) - rho) / dtheta);
    }
    if (!finite || !std::isfinite(max_fd)) v.push_back("profile not C1 (k=" + cavity_label(k) + ")");
  }
  return report;
}

}  // namespace perfhom
