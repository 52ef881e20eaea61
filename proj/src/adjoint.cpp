#include "dtninv/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dtninv/error.hpp"

namespace dtninv {

AdjointEvaluator::AdjointEvaluator(const Mesh& mesh)
    : space_(mesh), solver_(space_),
      unit_stiffness_(space_.assemble(Vector::Ones(static_cast<Eigen::Index>(mesh.num_vertices())))) {}

LossGradient AdjointEvaluator::loss_grad(const Vector& k, const CauchySample& sample,
                                         const std::optional<Vector>& loss_weights) {
  return evaluate(k, sample, loss_weights ? &*loss_weights : nullptr, true);
}

double AdjointEvaluator::loss(const Vector& k, const CauchySample& sample) {
  return evaluate(k, sample, nullptr, false).loss;
}

LossGradient AdjointEvaluator::evaluate(const Vector& k, const CauchySample& sample, const Vector* loss_weights,
                                        bool with_grad) {
  const Mesh& mesh = space_.mesh();
  const auto nb = static_cast<Eigen::Index>(mesh.boundary_vertices().size());
  require(sample.g.size() == nb && sample.h.values.size() == nb, "sample does not match the mesh boundary");
  require(!loss_weights || loss_weights->size() == nb, "loss weights must have one entry per boundary vertex");

  const SparseMatrix a = space_.assemble(k);
  solver_.factorize(space_.assemble_interior(k));
  const Vector p = solver_.solve_dirichlet(a, sample.load, sample.g);
  const BoundaryTrace pred = boundary_flux(mesh, a, p, sample.load);

  LossGradient out;
  Vector s = Vector::Zero(nb);  // d loss / d residual on boundary vertices
  for (Eigen::Index i = 0; i < nb; ++i) {
    if (!sample.h.observed[static_cast<std::size_t>(i)]) continue;
    const double w = loss_weights ? (*loss_weights)[i] : pred.weights[i];
    const double diff = sample.h.values[i] - pred.values[i];
    out.loss += w * diff * diff;
    s[i] = -2.0 * w * diff / pred.weights[i];
  }
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite Neumann loss");
  if (!with_grad) return out;

  // Adjoint state: A-harmonic extension of s (boundary values s, zero source).
  const Vector q = solver_.solve_dirichlet(a, Vector::Zero(p.size()), s);
  out.grad_k = space_.stiffness_derivative(q, p);
  if (!out.grad_k.allFinite()) throw NumericalError("non-finite coefficient gradient");
  return out;
}

LossGradient AdjointEvaluator::regularization(const Vector& k, double lambda) const {
  require(lambda >= 0.0, "regularization weight must be non-negative");
  const Vector ak = unit_stiffness_ * k;
  return {lambda * k.dot(ak), 2.0 * lambda * ak};
}

LossGradient sample_loss_grad(const Mesh& mesh, const NodalField& k, const CauchySample& sample) {
  AdjointEvaluator ev(mesh);
  return ev.loss_grad(k.values(), sample);
}

LossGradient regularization_grad(const Mesh& mesh, const NodalField& k, double lambda) {
  const P1Space space(mesh);
  require(lambda >= 0.0, "regularization weight must be non-negative");
  const Vector ak = space.assemble(Vector::Ones(static_cast<Eigen::Index>(mesh.num_vertices()))) * k.values();
  return {lambda * k.values().dot(ak), 2.0 * lambda * ak};
}

double dataset_loss(const Mesh& mesh, const NodalField& k, const CauchyDataset& dataset) {
  if (dataset.samples.empty()) return 0.0;
  AdjointEvaluator ev(mesh);
  std::vector<double> losses;
  losses.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) losses.push_back(ev.loss(k.values(), s));
  // Summing in sorted order makes the total independent of sample order.
  std::sort(losses.begin(), losses.end());
  double total = 0.0;
  for (double l : losses) total += l;
  return total;
}

} // namespace dtninv
