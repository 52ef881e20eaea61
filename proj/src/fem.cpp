#include "dtninv/fem.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {

std::atomic<std::uint64_t> g_interior_solves{0};

std::int64_t find_slot(const SparseMatrix& m, Index row, Index col) {
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  for (auto k = outer[col]; k < outer[col + 1]; ++k) {
    if (inner[k] == row) return k;
  }
  throw InvalidArgument("sparsity pattern is missing an element coupling");
}

} // namespace

NodalField::NodalField(const Mesh& mesh, Vector values) : mesh_(&mesh), values_(std::move(values)) {
  require(static_cast<std::size_t>(values_.size()) == mesh.num_vertices(), "nodal field size mismatch");
  require(values_.allFinite(), "nodal field has non-finite values");
}

NodalField::NodalField(const Mesh& mesh, double fill)
    : NodalField(mesh, Vector::Constant(static_cast<Eigen::Index>(mesh.num_vertices()), fill)) {}

NodalField::NodalField(const Mesh& mesh, const std::vector<double>& values)
    : NodalField(mesh, Vector(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())))) {}

void check_positive(const Vector& k) {
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (!(std::isfinite(k[i]) && k[i] > 0.0)) {
      throw InvalidArgument("coefficient must be finite and positive (vertex " + std::to_string(i) + ")");
    }
  }
}

P1Space::P1Space(const Mesh& mesh) : mesh_(&mesh) {
  const auto nv = static_cast<Index>(mesh.num_vertices());
  interior_index_.assign(static_cast<std::size_t>(nv), -1);
  for (Index v = 0; v < nv; ++v) {
    if (!mesh.on_boundary(v)) {
      interior_index_[static_cast<std::size_t>(v)] = static_cast<Index>(interior_vertices_.size());
      interior_vertices_.push_back(v);
    }
  }

  lumped_mass_ = Vector::Zero(nv);
  local_.reserve(mesh.num_triangles());
  std::vector<Eigen::Triplet<double>> full_trip;
  std::vector<Eigen::Triplet<double>> int_trip;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.triangle_area(t);
    std::array<Point, 3> grad;
    for (int i = 0; i < 3; ++i) {
      const Point pj = mesh.vertex(tri[(i + 1) % 3]);
      const Point pk = mesh.vertex(tri[(i + 2) % 3]);
      grad[i] = {(pj.y - pk.y) / (2.0 * area), (pk.x - pj.x) / (2.0 * area)};
    }
    std::array<double, 9> kloc{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        kloc[i * 3 + j] = area * (grad[i].x * grad[j].x + grad[i].y * grad[j].y);
        full_trip.emplace_back(tri[i], tri[j], 0.0);
        const Index ii = interior_index(tri[i]);
        const Index jj = interior_index(tri[j]);
        if (ii >= 0 && jj >= 0) int_trip.emplace_back(ii, jj, 0.0);
      }
      lumped_mass_[tri[i]] += area / 3.0;
    }
    local_.push_back(kloc);
  }

  pattern_.resize(nv, nv);
  pattern_.setFromTriplets(full_trip.begin(), full_trip.end());
  pattern_.makeCompressed();
  const auto ni = static_cast<Index>(interior_vertices_.size());
  interior_pattern_.resize(ni, ni);
  interior_pattern_.setFromTriplets(int_trip.begin(), int_trip.end());
  interior_pattern_.makeCompressed();

  slots_.resize(mesh.num_triangles());
  interior_slots_.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        slots_[t][i * 3 + j] = find_slot(pattern_, tri[i], tri[j]);
        const Index ii = interior_index(tri[i]);
        const Index jj = interior_index(tri[j]);
        interior_slots_[t][i * 3 + j] = (ii >= 0 && jj >= 0) ? find_slot(interior_pattern_, ii, jj) : -1;
      }
    }
  }
}

SparseMatrix P1Space::assemble(const Vector& k) const {
  require(static_cast<std::size_t>(k.size()) == mesh_->num_vertices(), "coefficient size mismatch");
  check_positive(k);
  SparseMatrix a = pattern_;
  double* val = a.valuePtr();
  std::fill(val, val + a.nonZeros(), 0.0);
  const auto tris = mesh_->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const double kbar = (k[tri[0]] + k[tri[1]] + k[tri[2]]) / 3.0;
    for (int e = 0; e < 9; ++e) val[slots_[t][e]] += kbar * local_[t][e];
  }
  return a;
}

SparseMatrix P1Space::assemble_interior(const Vector& k) const {
  require(static_cast<std::size_t>(k.size()) == mesh_->num_vertices(), "coefficient size mismatch");
  check_positive(k);
  SparseMatrix a = interior_pattern_;
  double* val = a.valuePtr();
  std::fill(val, val + a.nonZeros(), 0.0);
  const auto tris = mesh_->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const double kbar = (k[tri[0]] + k[tri[1]] + k[tri[2]]) / 3.0;
    for (int e = 0; e < 9; ++e) {
      if (interior_slots_[t][e] >= 0) val[interior_slots_[t][e]] += kbar * local_[t][e];
    }
  }
  return a;
}

Vector P1Space::stiffness_derivative(const Vector& q, const Vector& p) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(mesh_->num_vertices()));
  const auto tris = mesh_->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const auto& kl = local_[t];
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double kp = kl[i * 3] * p[tri[0]] + kl[i * 3 + 1] * p[tri[1]] + kl[i * 3 + 2] * p[tri[2]];
      s += q[tri[i]] * kp;
    }
    s /= 3.0;
    for (int i = 0; i < 3; ++i) out[tri[i]] += s;
  }
  return out;
}

SparseMatrix P1Space::mass_matrix() const {
  std::vector<Eigen::Triplet<double>> trip;
  const auto tris = mesh_->triangles();
  trip.reserve(tris.size() * 9);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const double a = mesh_->triangle_area(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(tris[t][i], tris[t][j], (i == j ? 2.0 : 1.0) * a / 12.0);
    }
  }
  const auto nv = static_cast<Eigen::Index>(mesh_->num_vertices());
  SparseMatrix m(nv, nv);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& k) {
  require(&k.mesh() == &mesh, "coefficient lives on a different mesh");
  return P1Space(mesh).assemble(k.values());
}

Vector assemble_load_from_function(const Mesh& mesh, const std::function<double(Point)>& f) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  const auto tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (Index v : tris[t]) b[v] += mesh.triangle_area(t) / 3.0;
  }
  for (Eigen::Index v = 0; v < b.size(); ++v) b[v] *= f(mesh.vertex(static_cast<Index>(v)));
  return b;
}

std::uint64_t interior_solve_count() { return g_interior_solves.load(); }

DirichletSolver::DirichletSolver(const P1Space& space) : space_(&space) {
  if (space.num_interior() > 0) llt_.analyzePattern(space.interior_pattern());
}

void DirichletSolver::factorize(const SparseMatrix& interior_block) {
  interior_ = interior_block;
  if (interior_.rows() == 0) return;
  if (interior_.nonZeros() != space_->interior_pattern().nonZeros()) llt_.analyzePattern(interior_);
  llt_.factorize(interior_);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed: interior stiffness block is not positive definite");
  }
}

Vector DirichletSolver::solve(const Vector& rhs) const {
  g_interior_solves.fetch_add(1);
  if (rhs.size() == 0) return Vector();
  Vector x = llt_.solve(rhs);
  if (llt_.info() != Eigen::Success || !x.allFinite()) throw NumericalError("interior solve failed");
  const double rn = rhs.norm();
  const double res = (interior_ * x - rhs).norm();
  if (res > 1e-10 * rn) {
    throw NumericalError("interior solve residual " + std::to_string(res) + " exceeds 1e-10 * " +
                         std::to_string(rn));
  }
  return x;
}

Vector DirichletSolver::solve_dirichlet(const SparseMatrix& full, const Vector& load, const Vector& g) const {
  const Mesh& mesh = space_->mesh();
  const auto bv = mesh.boundary_vertices();
  require(static_cast<std::size_t>(g.size()) == bv.size(), "Dirichlet data size mismatch");
  require(static_cast<std::size_t>(load.size()) == mesh.num_vertices(), "load size mismatch");
  Vector p = Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < bv.size(); ++i) p[bv[i]] = g[static_cast<Eigen::Index>(i)];
  const Vector lifted = full * p;
  const auto& interior = space_->interior_vertices();
  Vector rhs(static_cast<Eigen::Index>(interior.size()));
  for (std::size_t i = 0; i < interior.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = load[interior[i]] - lifted[interior[i]];
  const Vector x = solve(rhs);
  for (std::size_t i = 0; i < interior.size(); ++i) p[interior[i]] = x[static_cast<Eigen::Index>(i)];
  return p;
}

SparseSpdSystem make_system(const Mesh& mesh, const NodalField& k, Vector load) {
  require(static_cast<std::size_t>(load.size()) == mesh.num_vertices(), "load size mismatch");
  const auto bv = mesh.boundary_vertices();
  return {assemble_stiffness(mesh, k), std::move(load), std::vector<Index>(bv.begin(), bv.end())};
}

NodalField solve_dirichlet(const Mesh& mesh, const SparseSpdSystem& system, const Vector& g) {
  require(static_cast<std::size_t>(g.size()) == system.dirichlet_set.size(), "Dirichlet data size mismatch");
  const auto bv = mesh.boundary_vertices();
  require(std::equal(bv.begin(), bv.end(), system.dirichlet_set.begin(), system.dirichlet_set.end()),
          "Dirichlet set must be the mesh boundary in loop order");
  P1Space space(mesh);
  SparseMatrix interior(static_cast<Eigen::Index>(space.num_interior()),
                        static_cast<Eigen::Index>(space.num_interior()));
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < system.stiffness.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(system.stiffness, col); it; ++it) {
        const Index i = space.interior_index(static_cast<Index>(it.row()));
        const Index j = space.interior_index(static_cast<Index>(it.col()));
        if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
      }
    }
    interior.setFromTriplets(trip.begin(), trip.end());
  }
  DirichletSolver solver(space);
  solver.factorize(interior);
  return NodalField(mesh, solver.solve_dirichlet(system.stiffness, system.load, g));
}

double l2_norm(const P1Space& space, const Vector& v) {
  const SparseMatrix m = space.mass_matrix();
  return std::sqrt(std::max(0.0, v.dot(m * v)));
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n' << std::setprecision(17);
  for (int col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

} // namespace dtninv
