#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace perfhom {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline double distance_squared(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

enum class DomainKind { disk, rectangle };

/// Base domain Omega. Disks are C-infinity; rectangles are admitted with corners.
class DomainSpec {
 public:
  static DomainSpec disk(Point center, double radius);
  static DomainSpec rectangle(Point lo, Point hi);
  static DomainSpec unit_square() { return rectangle({0.0, 0.0}, {1.0, 1.0}); }
  static DomainSpec unit_disk() { return disk({0.0, 0.0}, 1.0); }

  DomainKind kind() const { return kind_; }
  Point center() const;
  double radius() const { return radius_; }
  Point lo() const { return lo_; }
  Point hi() const { return hi_; }

  double area() const;
  double perimeter() const;
  bool contains(Point p) const;
  /// Distance to the boundary for interior points; negative outside.
  double boundary_distance(Point p) const;
  /// Distance along the ray from center() in direction theta to the boundary.
  double ray_length(double theta) const;
  std::pair<Point, Point> bounding_box() const;

 private:
  DomainKind kind_ = DomainKind::rectangle;
  Point center_{};
  double radius_ = 0.0;
  Point lo_{};
  Point hi_{};
};

/// rho(theta) = a0 + sum_k (cos_k cos(k theta) + sin_k sin(k theta)), k = 1..N.
struct FourierProfile {
  double a0 = 1.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double value(double theta) const;
  double derivative(double theta) const;
  /// Trigonometric interpolation of equally spaced samples over [0, 2 pi).
  static FourierProfile from_samples(const std::vector<double>& samples);
};

enum class ShapeKind { unit_disk, star };

/// Reference cavity shape omega_{k,eps}, star-shaped with respect to the origin.
class CavityShape {
 public:
  static CavityShape unit_disk();
  static CavityShape star(FourierProfile profile, Point inner_center = {});

  ShapeKind kind() const { return kind_; }
  const FourierProfile& profile() const { return profile_; }
  Point inner_center() const { return inner_center_; }

  double radius(double theta) const;
  double radius_derivative(double theta) const;
  bool contains(Point local) const;

  /// Extremes of rho and |rho'| sampled on a uniform angular grid.
  double min_radius(int grid = 2048) const;
  double max_radius(int grid = 2048) const;
  double max_abs_derivative(int grid = 2048) const;

 private:
  ShapeKind kind_ = ShapeKind::unit_disk;
  FourierProfile profile_{};
  Point inner_center_{};
};

/// R1 < R2 < R3 of the geometric assumption.
struct Radii {
  double r1 = 0.5;
  double r2 = 1.0;
  double r3 = 1.5;
};

struct Cavity {
  Point center;
  CavityShape shape;
};

struct Perforation {
  DomainSpec domain;
  double epsilon = 0.1;
  double eta = 1.0;
  Radii radii;
  std::vector<Cavity> cavities;

  /// Scale eps * eta applied to the reference shapes.
  double cavity_scale() const { return epsilon * eta; }
  double guard_radius() const { return radii.r3 * epsilon; }
};

/// omega_k^eps = M_k + (eps eta) omega_{k,eps}.
class ScaledCavity {
 public:
  ScaledCavity(Point center, double scale, CavityShape shape)
      : center_(center), scale_(scale), shape_(std::move(shape)) {}

  Point center() const { return center_; }
  double scale() const { return scale_; }
  const CavityShape& shape() const { return shape_; }

  bool contains(Point x) const;
  Point boundary_point(double theta) const;
  /// Vertices at equally spaced angles, all on the exact scaled boundary.
  std::vector<Point> boundary_polygon(std::size_t vertices) const;
  double outer_radius() const { return scale_ * shape_.max_radius(); }

 private:
  Point center_;
  double scale_;
  CavityShape shape_;
};

ScaledCavity scaled_cavity(const Perforation& p, std::size_t k);

struct GenerationOptions {
  /// Empty means fill until the rejection cap is hit.
  std::optional<std::size_t> target_count;
  std::uint64_t seed = 0;
  /// "disk", "star3" or "mixed".
  std::string shape_preset = "disk";
  /// Consecutive rejections before stopping; 0 selects 10 * packing bound.
  std::size_t rejection_cap = 0;
};

/// floor(area(Omega) / (pi (R3 eps)^2)).
std::size_t packing_bound(const DomainSpec& domain, double epsilon, double r3);

Perforation generate_perforation(const DomainSpec& domain, double epsilon, double eta, Radii radii,
                                 const GenerationOptions& options);

CavityShape shape_from_preset(const std::string& preset, Radii radii, std::uint64_t draw = 0);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_a1(const Perforation& p, double rel_tol = 1e-12);

/// C with perimeter(scaled boundary) <= C (eps eta)^{d-1}, C = 2 pi (R2 + max|rho'|).
double surface_measure_constant(const CavityShape& shape, Radii radii);

double polygon_perimeter(const std::vector<Point>& polygon);
double polygon_area(const std::vector<Point>& polygon);

/// Deterministic 64-bit mixing used for seeds derived from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace perfhom
