#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dtninv/coeff.hpp"
#include "dtninv/fem.hpp"
#include "dtninv/mesh.hpp"

namespace dtninv {

/// Neumann data h_i = k dp/dnu at boundary vertices (boundary-loop order).
/// Entries outside the observation mask are NaN.
struct BoundaryTrace {
  Vector values;
  Vector weights;  // lumped boundary mass m_i
  std::vector<bool> observed;
};

struct CauchySample {
  int id = 0;
  Vector g;     // Dirichlet trace, boundary-loop order, zero on unobserved vertices
  Vector load;  // weak source, one entry per vertex
  BoundaryTrace h;
  double a = 0.0;
  double b = 0.0;
  std::string tag;
};

struct CauchyDataset {
  std::vector<CauchySample> samples;
  std::uint64_t seed = 0;
  std::string mesh_fingerprint;
  ObservationSpec observation;
  BoundaryMask mask;
};

/// Variationally consistent flux: h_i = (A p - load)_i / m_i on the boundary.
/// Throws NumericalError if the interior residual exceeds 1e-8 * scale.
BoundaryTrace boundary_flux(const Mesh& mesh, const SparseMatrix& stiffness, const Vector& p, const Vector& load);

/// Discrete DtN action: assemble, solve with Dirichlet data g, recover flux.
BoundaryTrace dtn_apply(const Mesh& mesh, const NodalField& k, const Vector& g, const Vector& load);

/// Weak load encoding f = -div(k grad p*) for a nodal k: the element
/// integrals of kbar grad(I p*) . grad(phi_j), minus the lumped boundary flux
/// k_j dp*/dnu so that boundary rows carry the source only.
Vector manufactured_weak_load(const P1Space& space, const Vector& k, const ManufacturedSolution& sol);

/// Frequencies (a, b) ~ U[0, 2]^2 drawn up front from a seeded 64-bit Mersenne twister.
std::vector<ManufacturedSolution> draw_frequencies(int count, std::uint64_t seed);

struct DatasetOptions {
  /// Solve on a once-refined mesh and interpolate traces back (avoids the
  /// inverse crime). Unit square: n -> 2n. Disk: ring count doubled.
  bool refined = false;
};

CauchyDataset generate_dataset(const Mesh& mesh, const CoefficientField& k_true, const ObservationSpec& spec,
                               int count, std::uint64_t seed, DatasetOptions options = {});

/// Zero source, full circle observed.
CauchyDataset generate_phantom_dataset(const Mesh& mesh, const CoefficientField& k_true, int count,
                                       std::uint64_t seed, DatasetOptions options = {});

/// Directory layout: manifest.json, sample_NNNNN.csv ("vertex_id,g,h,m,observed"),
/// load_NNNNN.csv ("vertex_id,load").
void save_dataset(const std::filesystem::path& dir, const CauchyDataset& data, const Mesh& mesh);
CauchyDataset load_dataset(const std::filesystem::path& dir, const Mesh& mesh);

} // namespace dtninv
