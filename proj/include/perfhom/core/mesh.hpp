#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perfhom/core/geometry.hpp"

namespace perfhom {

using Complex = std::complex<double>;

/// Tag 0 is the outer boundary, k+1 is cavity k.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int tag = 0;
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<BoundaryEdge> boundary_edges;
  /// Constrained curves strictly inside the meshed region (filled cavities, lemma rings).
  std::vector<BoundaryEdge> interface_edges;
  /// 0 for the main region; k+1 for the interior of internal loop k.
  std::vector<int> triangle_region;
  double h_max = 0.0;
  std::size_t cavity_count = 0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  double signed_area(std::size_t t) const;
  double area() const;
  double region_area(int region) const;
  std::size_t tagged_edge_count(int tag) const;
  double tagged_edge_length(int tag) const;
  /// Vertices lying on an edge with the given tag.
  std::vector<int> tagged_vertices(int tag) const;
};

/// Nodal P1 values on a mesh.
struct DiscreteFunction {
  std::shared_ptr<const Mesh> mesh;
  std::vector<Complex> values;

  DiscreteFunction() = default;
  DiscreteFunction(std::shared_ptr<const Mesh> m, std::vector<Complex> v);
  static DiscreteFunction interpolate(std::shared_ptr<const Mesh> m, const std::function<Complex(Point)>& f);
};

// ---------------------------------------------------------------------------
// Generic mesher

constexpr int kVoidRegion = -1;

/// Closed counter-clockwise curve parameterised on [0, period).
struct CurveLoop {
  std::function<Point(double)> point;
  double period = 1.0;
  /// Parameters that must be vertices (corners).
  std::vector<double> breaks;
  int inside_region = 0;
  int outside_region = kVoidRegion;
  int tag = 0;
  std::size_t min_segments = 8;
};

CurveLoop circle_loop(Point center, double radius, int inside_region, int outside_region, int tag,
                      std::size_t min_segments = 16);
CurveLoop rectangle_loop(Point lo, Point hi, int tag = 0);
CurveLoop cavity_loop(const ScaledCavity& cavity, int inside_region, int outside_region, int tag,
                      std::size_t min_segments);
CurveLoop domain_loop(const DomainSpec& domain, std::size_t min_segments = 16);

using SizeField = std::function<double(Point)>;

struct MesherOptions {
  double min_angle_deg = 20.0;
  std::size_t max_vertices = 3'000'000;
};

/// Conforming Delaunay refinement: loop edges are split on the exact curves until they are
/// Gabriel, then triangles are refined for angle and size.
Mesh triangulate(const std::vector<CurveLoop>& loops, const SizeField& size, const MesherOptions& options = {});

// ---------------------------------------------------------------------------
// Domain meshes

struct PerforatedMeshOptions {
  std::size_t segments_per_cavity = 32;
  /// Near-cavity target edge length is min(h, near_factor * eps * eta).
  double near_factor = 0.25;
  double grading = 0.3;
};

Mesh mesh_perforated(const Perforation& p, double h, const PerforatedMeshOptions& options = {});
/// Mesh of the whole domain with the cavity curves as interfaces; cavity k interiors carry region k+1.
Mesh mesh_filled(const Perforation& p, double h, const PerforatedMeshOptions& options = {});
Mesh mesh_unperforated(const DomainSpec& domain, double h);

/// Sub-mesh of one region. Interface edges on its rim become boundary edges.
Mesh extract_region(const Mesh& mesh, int region, std::vector<int>* vertex_map = nullptr);

/// Invariant check; empty when the mesh is valid (and matches p when given).
std::vector<std::string> check_mesh(const Mesh& mesh, const Perforation* p = nullptr, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Point location and transfer

class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };
  /// Points outside by at most snap_tol (relative to the local triangle) are clamped onto it.
  std::optional<Hit> locate(Point p, double snap_tol = 1e-10) const;

 private:
  const Mesh& mesh_;
  Point lo_;
  double cell_ = 1.0;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

DiscreteFunction transfer(const DiscreteFunction& u, std::shared_ptr<const Mesh> target, double snap_tol = 1e-10);

// ---------------------------------------------------------------------------
// Text format: VERTICES / TRIANGLES / BOUNDARY sections, index base 0.

void write_mesh_text(const Mesh& mesh, std::ostream& out);
std::string mesh_to_text(const Mesh& mesh);
Mesh read_mesh_text(std::istream& in);

}  // namespace perfhom
