#pragma once

#include <optional>

#include "dtninv/dtn.hpp"
#include "dtninv/fem.hpp"

namespace dtninv {

struct LossGradient {
  double loss = 0.0;
  Vector grad_k;  // d loss / d k at every vertex
};

/// Neumann-mismatch loss and its discrete-adjoint gradient for one mesh.
///
/// The loss is sum_{i observed} w_i (h_i - h~_i)^2 with h~ the residual flux
/// of the forward solve under k, and w_i the lumped boundary mass unless
/// overridden. Gradients cost one forward and one adjoint interior solve with
/// a shared Cholesky factorization.
class AdjointEvaluator {
public:
  explicit AdjointEvaluator(const Mesh& mesh);

  const Mesh& mesh() const { return space_.mesh(); }
  const P1Space& space() const { return space_; }

  LossGradient loss_grad(const Vector& k, const CauchySample& sample,
                         const std::optional<Vector>& loss_weights = std::nullopt);
  double loss(const Vector& k, const CauchySample& sample);

  /// lambda * k^T A_1 k and its gradient 2 lambda A_1 k (A_1: unit-coefficient stiffness).
  LossGradient regularization(const Vector& k, double lambda) const;

private:
  LossGradient evaluate(const Vector& k, const CauchySample& sample, const Vector* loss_weights, bool with_grad);

  P1Space space_;
  DirichletSolver solver_;
  SparseMatrix unit_stiffness_;
};

LossGradient sample_loss_grad(const Mesh& mesh, const NodalField& k, const CauchySample& sample);
LossGradient regularization_grad(const Mesh& mesh, const NodalField& k, double lambda);
double dataset_loss(const Mesh& mesh, const NodalField& k, const CauchyDataset& dataset);

} // namespace dtninv
