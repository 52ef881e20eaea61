#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "dtninv/mesh.hpp"

namespace dtninv {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// One real value per mesh vertex.
class NodalField {
public:
  NodalField(const Mesh& mesh, Vector values);
  NodalField(const Mesh& mesh, double fill);
  NodalField(const Mesh& mesh, const std::vector<double>& values);

  const Mesh& mesh() const { return *mesh_; }
  const Vector& values() const { return values_; }
  double operator[](Index v) const { return values_[v]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

private:
  const Mesh* mesh_;
  Vector values_;
};

/// Per-mesh P1 precomputation: element matrices, sparsity patterns with
/// scatter slots, and the interior/boundary numbering.
class P1Space {
public:
  explicit P1Space(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::size_t num_interior() const { return interior_vertices_.size(); }
  const std::vector<Index>& interior_vertices() const { return interior_vertices_; }
  /// Interior numbering of vertex v, or -1 on the boundary.
  Index interior_index(Index v) const { return interior_index_[static_cast<std::size_t>(v)]; }

  /// Unit-coefficient element stiffness, row-major 3x3.
  const std::array<double, 9>& local_stiffness(std::size_t t) const { return local_[t]; }
  /// One third of the adjacent triangle areas at every vertex.
  const Vector& lumped_mass() const { return lumped_mass_; }

  /// Full stiffness for nodal coefficient k (centroid mean per element).
  SparseMatrix assemble(const Vector& k) const;
  /// Interior-interior block of the same matrix.
  SparseMatrix assemble_interior(const Vector& k) const;
  const SparseMatrix& interior_pattern() const { return interior_pattern_; }

  /// d/dk_v of q^T A(k) p for every vertex v.
  Vector stiffness_derivative(const Vector& q, const Vector& p) const;

  SparseMatrix mass_matrix() const;

private:
  const Mesh* mesh_;
  std::vector<std::array<double, 9>> local_;
  std::vector<Index> interior_vertices_;
  std::vector<Index> interior_index_;
  Vector lumped_mass_;
  SparseMatrix pattern_;
  SparseMatrix interior_pattern_;
  std::vector<std::array<std::int64_t, 9>> slots_;
  std::vector<std::array<std::int64_t, 9>> interior_slots_;
};

/// Throws InvalidArgument unless every entry is finite and strictly positive.
void check_positive(const Vector& k);

SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& k);

/// Lumped vertex quadrature: b_j = f(x_j) * (sum of adjacent areas) / 3.
Vector assemble_load_from_function(const Mesh& mesh, const std::function<double(Point)>& f);

/// Number of interior solves performed by every DirichletSolver in the process.
std::uint64_t interior_solve_count();

/// Sparse Cholesky on the interior block. The symbolic analysis is done once
/// per space; every `factorize` is numeric only.
class DirichletSolver {
public:
  explicit DirichletSolver(const P1Space& space);

  const P1Space& space() const { return *space_; }

  void factorize(const SparseMatrix& interior_block);
  /// Solves A_II x = rhs and checks ||A_II x - rhs|| <= 1e-10 ||rhs||.
  Vector solve(const Vector& rhs) const;

  /// Full-vertex solution with p = g on the boundary (g in boundary-loop
  /// order) and A_II p_I = load_I - A_IB g. `full` is the matching full matrix.
  Vector solve_dirichlet(const SparseMatrix& full, const Vector& load, const Vector& g) const;

private:
  const P1Space* space_;
  SparseMatrix interior_;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

struct SparseSpdSystem {
  SparseMatrix stiffness;            // full, all vertices
  Vector load;                       // all vertices
  std::vector<Index> dirichlet_set;  // boundary vertices, loop order
};

SparseSpdSystem make_system(const Mesh& mesh, const NodalField& k, Vector load);

/// Solves the reduced system with `g` prescribed on `dirichlet_set`.
NodalField solve_dirichlet(const Mesh& mesh, const SparseSpdSystem& system, const Vector& g);

/// L2 norm of a P1 field using the consistent mass matrix.
double l2_norm(const P1Space& space, const Vector& v);

void write_matrix_market(std::ostream& os, const SparseMatrix& a);

} // namespace dtninv
