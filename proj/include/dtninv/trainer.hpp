#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dtninv/adjoint.hpp"
#include "dtninv/dtn.hpp"
#include "dtninv/neural.hpp"

namespace dtninv {

enum class RangeMode { during, after };

/// Gradient at clamped vertices: identity, zero, or kept only when descent
/// would raise k back above the floor (projected gradient for k >= floor).
enum class ClampGradient { straight_through, zero, projected };

struct TrainConfig {
  int epochs = 40;
  LrPreset lr_preset = LrPreset::square;
  std::optional<double> fixed_lr;  // overrides the schedule when set
  double lambda = 0.0;
  std::optional<OutputRange> range;
  RangeMode range_mode = RangeMode::during;
  double omega0 = 30.0;
  /// Map the mesh bounding box onto [-1, 1]^2 before the first layer.
  bool normalize_inputs = false;
  std::vector<int> layers = default_layers();
  std::uint64_t init_seed = 1;
  std::uint64_t shuffle_seed = 2;
  double floor = 1e-6;
  ClampGradient clamp_gradient = ClampGradient::zero;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double rel_error = 0.0;
  double lr = 0.0;
  long clamps = 0;
  double seconds = 0.0;
};

struct TrainResult {
  SineMlpParams params;
  Vector k_recon;
  std::vector<EpochRecord> history;
};

/// Called after every epoch with the current parameters.
using EpochCallback = std::function<void(const EpochRecord&, const SineMlpParams&)>;

/// Applies the clamp rule to d loss / d k in place.
void apply_clamp_gradient(ClampGradient mode, const std::vector<bool>& clamped, Vector& grad_k);

/// Self-supervised training with batch size 1: for every sample (shuffled
/// each epoch) the network is evaluated at all vertices, clamped at the
/// floor, pushed through the adjoint loss gradient and the chain rule, then
/// updated with Adam. Clamped vertices receive zero gradient by default.
/// `k_true` is used only to log the relative error.
TrainResult train(const Mesh& mesh, const CauchyDataset& data, const Vector& k_true, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Network values at every vertex. In `after` mode the configured range is
/// applied as a clamp to [lo, hi] instead of the tanh transform.
Vector reconstruct_field(const SineMlpParams& params, const Mesh& mesh,
                         const std::optional<OutputRange>& clamp_range = std::nullopt);

} // namespace dtninv
