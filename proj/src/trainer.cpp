#include "dtninv/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dtninv/error.hpp"
#include "dtninv/metrics.hpp"

namespace dtninv {

Vector reconstruct_field(const SineMlpParams& params, const Mesh& mesh, const std::optional<OutputRange>& clamp_range) {
  Vector k = forward(params, mesh.vertices());
  if (clamp_range) k = k.cwiseMax(clamp_range->lo).cwiseMin(clamp_range->hi);
  return k;
}

void apply_clamp_gradient(ClampGradient mode, const std::vector<bool>& clamped, Vector& grad_k) {
  for (Eigen::Index v = 0; v < grad_k.size(); ++v) {
    if (!clamped[static_cast<std::size_t>(v)]) continue;
    if (mode == ClampGradient::zero || (mode == ClampGradient::projected && grad_k[v] > 0.0)) grad_k[v] = 0.0;
  }
}

TrainResult train(const Mesh& mesh, const CauchyDataset& data, const Vector& k_true, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  require(config.epochs >= 1, "epochs must be at least 1");
  require(!data.samples.empty(), "training needs at least one sample");
  require(config.lambda >= 0.0, "lambda must be non-negative");
  require(config.floor > 0.0, "positivity floor must be positive");
  require(static_cast<std::size_t>(k_true.size()) == mesh.num_vertices(), "truth field does not match the mesh");

  const std::optional<OutputRange> net_range =
      config.range_mode == RangeMode::during ? config.range : std::optional<OutputRange>{};
  const std::optional<OutputRange> clamp_range =
      config.range_mode == RangeMode::after ? config.range : std::optional<OutputRange>{};

  TrainResult result;
  result.params = init_sine_mlp(config.init_seed, config.omega0, config.layers, net_range);
  if (config.normalize_inputs) {
    const auto [lo, hi] = mesh.bounding_box();
    result.params.input_shift = {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    result.params.input_scale = 2.0 / std::max(hi.x - lo.x, hi.y - lo.y);
  }
  Eigen::VectorXd theta = result.params.flatten();
  AdamState adam = AdamState::fresh(static_cast<std::size_t>(theta.size()));
  AdjointEvaluator evaluator(mesh);
  const NodalField truth(mesh, k_true);

  std::mt19937_64 rng(config.shuffle_seed);
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ForwardCache cache;
  std::vector<bool> clamped;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    // Fisher-Yates with our own index draws, so the order does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = config.fixed_lr ? *config.fixed_lr : lr_schedule(config.lr_preset, epoch);
    double loss_sum = 0.0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const CauchySample& sample = data.samples[order[step]];
      const Vector raw = forward(result.params, mesh.vertices(), &cache);
      Vector k = raw;
      clamped.assign(static_cast<std::size_t>(k.size()), false);
      for (Eigen::Index v = 0; v < k.size(); ++v) {
        if (!(k[v] >= config.floor)) {
          if (!std::isfinite(k[v])) {
            throw NumericalError("non-finite network output at epoch " + std::to_string(epoch) + ", sample " +
                                 std::to_string(sample.id));
          }
          k[v] = config.floor;
          clamped[static_cast<std::size_t>(v)] = true;
          ++rec.clamps;
        }
      }
      LossGradient lg;
      try {
        lg = evaluator.loss_grad(k, sample);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(sample.id));
      }
      loss_sum += lg.loss;
      if (config.lambda > 0.0) lg.grad_k += evaluator.regularization(k, config.lambda).grad_k;

      apply_clamp_gradient(config.clamp_gradient, clamped, lg.grad_k);
      const Eigen::VectorXd grad = backward(result.params, cache, lg.grad_k);
      if (!grad.allFinite()) {
        throw NumericalError("non-finite parameter gradient at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(sample.id));
      }
      adam_step(adam, theta, grad, rec.lr);
      result.params.unflatten(theta);
    }
    rec.mean_loss = loss_sum / static_cast<double>(order.size());
    const Vector k_now = reconstruct_field(result.params, mesh, clamp_range);
    rec.rel_error = relative_l2(mesh, truth, NodalField(mesh, k_now));
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, result.params);
  }
  result.k_recon = reconstruct_field(result.params, mesh, clamp_range);
  return result;
}

} // namespace dtninv
