#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dtninv {

using Index = std::int32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class DomainKind { unit_square, disk };

struct BoundaryEdge {
  std::array<Index, 2> v;  // traversal order along the boundary loop
  Point normal;            // unit outward normal
  double length = 0.0;
};

/// Conforming P1 triangulation of a 2D domain.
///
/// Triangles are counterclockwise. Boundary edges are stored as one closed
/// counterclockwise loop, and `boundary_vertices()` lists the loop vertices
/// in the same order (vertex i is the start of edge i).
class Mesh {
public:
  Mesh(DomainKind kind, std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
       Point center = {0.5, 0.5}, double radius = 0.5);

  DomainKind kind() const { return kind_; }
  Point disk_center() const { return center_; }
  double disk_radius() const { return radius_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const std::array<Index, 3>> triangles() const { return triangles_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_edges_; }
  std::span<const Index> boundary_vertices() const { return boundary_vertices_; }

  Point vertex(Index i) const { return vertices_[static_cast<std::size_t>(i)]; }
  bool on_boundary(Index v) const { return boundary_slot_[static_cast<std::size_t>(v)] >= 0; }
  /// Position of `v` in `boundary_vertices()`, or -1 for interior vertices.
  Index boundary_slot(Index v) const { return boundary_slot_[static_cast<std::size_t>(v)]; }

  double triangle_area(std::size_t t) const { return areas_[t]; }
  std::span<const double> triangle_areas() const { return areas_; }

  /// Half the summed length of the two boundary edges touching each boundary
  /// vertex, in `boundary_vertices()` order.
  std::span<const double> boundary_weights() const { return boundary_weights_; }

  std::size_t num_edges() const { return num_edges_; }
  double boundary_length() const;
  double max_edge_length() const;
  /// Lower-left and upper-right corners of the vertex bounding box.
  std::pair<Point, Point> bounding_box() const;

  /// FNV-1a hash of vertex coordinates and connectivity, as 16 hex digits.
  std::string fingerprint() const;

private:
  void build_topology();

  DomainKind kind_;
  Point center_;
  double radius_;
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<double> areas_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Index> boundary_vertices_;
  std::vector<Index> boundary_slot_;
  std::vector<double> boundary_weights_;
  std::size_t num_edges_ = 0;
};

/// Structured mesh of the unit square: vertex (i, j) sits at (i/n, j/n) and
/// every cell is split along its lower-left to upper-right diagonal.
Mesh unit_square_mesh(int n);

/// Concentric-ring mesh of a disk.
///
/// Ring j (j = 0..R, R = ceil(radius / target_h)) has radius j*radius/R and
/// 6j vertices at angles 2*pi*i/(6j); consecutive rings are stitched by an
/// angular sweep. Vertex count is 3R(R+1)+1 and the boundary ring nests
/// under refinement (R -> 2R keeps every old boundary vertex).
Mesh disk_mesh(Point center, double radius, double target_h);

enum class Side { left, right, bottom, top };

struct Exclusion {
  Side side;
  double lo;
  double hi;
};

struct ObservationSpec {
  enum class Mode { full, partial } mode = Mode::full;
  std::vector<Exclusion> exclusions;

  static ObservationSpec full() { return {}; }
  /// Unobserved boundary covering 40% of the unit square's perimeter.
  static ObservationSpec paper_partial();
};

std::string to_string(Side s);
Side side_from_string(const std::string& s);
/// "left:0.4:0.8,right:0.2:0.6"; empty string or "full" gives full observation.
ObservationSpec parse_observation(const std::string& text);
std::string format_observation(const ObservationSpec& spec);

struct BoundaryMask {
  std::vector<bool> observed;  // per boundary vertex, `boundary_vertices()` order
  double gamma0_length = 0.0;

  std::size_t num_observed() const;
};

/// Vertices strictly inside an excluded interval are unobserved; interval
/// endpoints and corners stay observed. The excluded length sums the boundary
/// edges whose midpoint falls strictly inside an interval.
BoundaryMask mark_boundary(const Mesh& mesh, const ObservationSpec& spec);

BoundaryMask full_mask(const Mesh& mesh);

/// Legacy VTK ASCII unstructured grid with optional point scalars.
void write_vtk(std::ostream& os, const Mesh& mesh,
               const std::vector<std::pair<std::string, std::span<const double>>>& point_data = {});

/// CSV table "id,x,y,on_boundary,observed".
void write_vertex_csv(std::ostream& os, const Mesh& mesh, const BoundaryMask& mask);

} // namespace dtninv
