#include "dtninv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {

double signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

} // namespace

Mesh::Mesh(DomainKind kind, std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
           Point center, double radius)
    : kind_(kind), center_(center), radius_(radius), vertices_(std::move(vertices)),
      triangles_(std::move(triangles)) {
  build_topology();
}

void Mesh::build_topology() {
  const auto nv = static_cast<Index>(vertices_.size());
  areas_.reserve(triangles_.size());
  for (const auto& t : triangles_) {
    for (Index v : t) require(v >= 0 && v < nv, "triangle references a missing vertex");
    const double a = signed_area(vertex(t[0]), vertex(t[1]), vertex(t[2]));
    require(a > 0.0, "triangle with non-positive signed area");
    areas_.push_back(a);
  }

  // Directed half-edges; an undirected edge seen once is on the boundary.
  std::map<std::pair<Index, Index>, std::pair<int, std::pair<Index, Index>>> edges;
  for (const auto& t : triangles_) {
    for (int e = 0; e < 3; ++e) {
      const Index a = t[e];
      const Index b = t[(e + 1) % 3];
      auto& entry = edges[{std::min(a, b), std::max(a, b)}];
      entry.first += 1;
      entry.second = {a, b};
    }
  }
  num_edges_ = edges.size();

  std::map<Index, Index> next;  // boundary loop successor
  for (const auto& [key, entry] : edges) {
    require(entry.first <= 2, "edge shared by more than two triangles");
    if (entry.first == 1) {
      require(next.emplace(entry.second.first, entry.second.second).second,
              "boundary is not a simple loop");
    }
  }
  require(!next.empty(), "mesh has no boundary");

  const Index start = next.begin()->first;
  Index cur = start;
  do {
    const Index nxt = next.at(cur);
    const Point a = vertex(cur);
    const Point b = vertex(nxt);
    const double len = distance(a, b);
    boundary_edges_.push_back({{cur, nxt}, {(b.y - a.y) / len, -(b.x - a.x) / len}, len});
    boundary_vertices_.push_back(cur);
    cur = nxt;
    require(boundary_edges_.size() <= next.size(), "boundary loop does not close");
  } while (cur != start);
  require(boundary_edges_.size() == next.size(), "boundary consists of more than one loop");

  boundary_slot_.assign(vertices_.size(), -1);
  for (std::size_t i = 0; i < boundary_vertices_.size(); ++i) {
    boundary_slot_[static_cast<std::size_t>(boundary_vertices_[i])] = static_cast<Index>(i);
  }

  const std::size_t nb = boundary_edges_.size();
  boundary_weights_.assign(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    boundary_weights_[i] += 0.5 * boundary_edges_[i].length;
    boundary_weights_[(i + 1) % nb] += 0.5 * boundary_edges_[i].length;
  }
}

double Mesh::boundary_length() const {
  double s = 0.0;
  for (const auto& e : boundary_edges_) s += e.length;
  return s;
}

std::pair<Point, Point> Mesh::bounding_box() const {
  Point lo = vertices_.front();
  Point hi = lo;
  for (const auto& p : vertices_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& t : triangles_) {
    for (int e = 0; e < 3; ++e) m = std::max(m, distance(vertex(t[e]), vertex(t[(e + 1) % 3])));
  }
  return m;
}

std::string Mesh::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : vertices_) {
    mix(&p.x, sizeof(double));
    mix(&p.y, sizeof(double));
  }
  for (const auto& t : triangles_) mix(t.data(), sizeof(Index) * 3);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Mesh unit_square_mesh(int n) {
  require(n >= 1, "unit_square_mesh: n must be at least 1");
  const int m = n + 1;
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(m) * m);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  std::vector<std::array<Index, 3>> tris;
  tris.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Index v00 = j * m + i;
      const Index v10 = v00 + 1;
      const Index v01 = v00 + m;
      const Index v11 = v01 + 1;
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  }
  return Mesh(DomainKind::unit_square, std::move(verts), std::move(tris));
}

Mesh disk_mesh(Point center, double radius, double target_h) {
  require(std::isfinite(radius) && radius > 0.0, "disk_mesh: radius must be positive");
  require(std::isfinite(target_h) && target_h > 0.0 && target_h < radius,
          "disk_mesh: target_h must lie in (0, radius)");
  const int rings = static_cast<int>(std::ceil(radius / target_h - 1e-12));
  const double two_pi = 2.0 * std::numbers::pi;

  auto ring_start = [](int j) -> Index { return j == 0 ? 0 : 1 + 3 * j * (j - 1); };
  auto ring_size = [](int j) -> Index { return j == 0 ? 1 : 6 * j; };

  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(ring_start(rings + 1)));
  verts.push_back(center);
  for (int j = 1; j <= rings; ++j) {
    const double r = radius * j / rings;
    const Index nj = ring_size(j);
    for (Index i = 0; i < nj; ++i) {
      const double th = two_pi * i / nj;
      verts.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
    }
  }

  std::vector<std::array<Index, 3>> tris;
  tris.reserve(6 * static_cast<std::size_t>(rings) * rings);
  for (Index o = 0; o < 6; ++o) tris.push_back({0, 1 + o, 1 + (o + 1) % 6});
  for (int j = 2; j <= rings; ++j) {
    const Index n0 = ring_size(j - 1);
    const Index n1 = ring_size(j);
    const Index s0 = ring_start(j - 1);
    const Index s1 = ring_start(j);
    Index in = 0;
    Index out = 0;
    auto dist2 = [&](Index a, Index b) {
      const Point p = verts[static_cast<std::size_t>(a)], q = verts[static_cast<std::size_t>(b)];
      return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
    };
    while (in < n0 || out < n1) {
      // Add the shorter of the two candidate diagonals.
      const bool advance_outer =
          in == n0 || (out < n1 && dist2(s0 + in, s1 + (out + 1) % n1) < dist2(s1 + out, s0 + (in + 1) % n0));
      if (advance_outer) {
        tris.push_back({s0 + in % n0, s1 + out, s1 + (out + 1) % n1});
        ++out;
      } else {
        tris.push_back({s0 + in, s1 + out % n1, s0 + (in + 1) % n0});
        ++in;
      }
    }
  }
  return Mesh(DomainKind::disk, std::move(verts), std::move(tris), center, radius);
}

ObservationSpec ObservationSpec::paper_partial() {
  ObservationSpec s;
  s.mode = Mode::partial;
  s.exclusions = {{Side::left, 2.0 / 5.0, 4.0 / 5.0},
                  {Side::right, 1.0 / 5.0, 3.0 / 5.0},
                  {Side::bottom, 1.5 / 5.0, 3.5 / 5.0},
                  {Side::top, 2.5 / 5.0, 4.5 / 5.0}};
  return s;
}

std::string to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "bottom") return Side::bottom;
  if (s == "top") return Side::top;
  throw InvalidArgument("unknown boundary side '" + s + "'");
}

ObservationSpec parse_observation(const std::string& text) {
  if (text.empty() || text == "full") return ObservationSpec::full();
  if (text == "paper") return ObservationSpec::paper_partial();
  ObservationSpec spec;
  spec.mode = ObservationSpec::Mode::partial;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream is(item);
    std::string side, lo, hi;
    if (!std::getline(is, side, ':') || !std::getline(is, lo, ':') || !std::getline(is, hi)) {
      throw InvalidArgument("malformed exclusion '" + item + "', expected side:lo:hi");
    }
    Exclusion ex{side_from_string(side), std::stod(lo), std::stod(hi)};
    require(ex.lo >= 0.0 && ex.hi <= 1.0 && ex.lo <= ex.hi, "exclusion interval must lie in [0,1]");
    spec.exclusions.push_back(ex);
  }
  return spec;
}

std::string format_observation(const ObservationSpec& spec) {
  if (spec.mode == ObservationSpec::Mode::full) return "full";
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < spec.exclusions.size(); ++i) {
    const auto& e = spec.exclusions[i];
    if (i) os << ',';
    os << to_string(e.side) << ':' << e.lo << ':' << e.hi;
  }
  return os.str();
}

std::size_t BoundaryMask::num_observed() const {
  return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), true));
}

BoundaryMask full_mask(const Mesh& mesh) {
  return {std::vector<bool>(mesh.boundary_vertices().size(), true), 0.0};
}

namespace {

// Coordinate along `side` if `p` lies on it, else NaN.
double side_coordinate(Point p, Side side) {
  constexpr double tol = 1e-12;
  switch (side) {
    case Side::left: return std::abs(p.x) < tol ? p.y : NAN;
    case Side::right: return std::abs(p.x - 1.0) < tol ? p.y : NAN;
    case Side::bottom: return std::abs(p.y) < tol ? p.x : NAN;
    case Side::top: return std::abs(p.y - 1.0) < tol ? p.x : NAN;
  }
  return NAN;
}

bool strictly_excluded(Point p, const ObservationSpec& spec) {
  constexpr double tol = 1e-12;
  for (const auto& e : spec.exclusions) {
    const double s = side_coordinate(p, e.side);
    if (std::isnan(s)) continue;
    // Corners sit on two sides; they are never strictly inside a side interval
    // of the adjacent side, and we treat them as observed.
    if (s > e.lo + tol && s < e.hi - tol && s > tol && s < 1.0 - tol) return true;
  }
  return false;
}

} // namespace

BoundaryMask mark_boundary(const Mesh& mesh, const ObservationSpec& spec) {
  BoundaryMask mask = full_mask(mesh);
  if (spec.mode == ObservationSpec::Mode::full || spec.exclusions.empty()) return mask;
  require(mesh.kind() == DomainKind::unit_square, "boundary exclusions need a unit-square mesh");

  const auto bv = mesh.boundary_vertices();
  for (std::size_t i = 0; i < bv.size(); ++i) {
    mask.observed[i] = !strictly_excluded(mesh.vertex(bv[i]), spec);
  }
  for (const auto& e : mesh.boundary_edges()) {
    const Point a = mesh.vertex(e.v[0]);
    const Point b = mesh.vertex(e.v[1]);
    if (strictly_excluded({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}, spec)) mask.gamma0_length += e.length;
  }
  return mask;
}

void write_vtk(std::ostream& os, const Mesh& mesh,
               const std::vector<std::pair<std::string, std::span<const double>>>& point_data) {
  os << "# vtk DataFile Version 3.0\n"
     << "dtninv mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i) os << "5\n";
  if (!point_data.empty()) {
    os << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& [name, values] : point_data) {
      require(values.size() == mesh.num_vertices(), "point data size mismatch for " + name);
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) os << v << '\n';
    }
  }
}

void write_vertex_csv(std::ostream& os, const Mesh& mesh, const BoundaryMask& mask) {
  os << "id,x,y,on_boundary,observed\n" << std::setprecision(17);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto p = mesh.vertex(static_cast<Index>(v));
    const Index slot = mesh.boundary_slot(static_cast<Index>(v));
    const bool observed = slot >= 0 && mask.observed[static_cast<std::size_t>(slot)];
    os << v << ',' << p.x << ',' << p.y << ',' << (slot >= 0 ? 1 : 0) << ',' << (observed ? 1 : 0) << '\n';
  }
}

} // namespace dtninv
