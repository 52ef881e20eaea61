#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtninv/mesh.hpp"

namespace dtninv {

/// Output bounds applied as lo + (hi - lo) * (tanh(z) + 1) / 2.
struct OutputRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Sine-activation MLP: the first hidden layer computes sin(omega0 (W x + b)),
/// later hidden layers sin(W z + b), and the output layer is affine.
struct SineMlpParams {
  std::vector<int> layers;
  std::vector<Eigen::MatrixXd> weights;  // layer l: layers[l+1] x layers[l]
  std::vector<Eigen::VectorXd> biases;
  double omega0 = 30.0;
  std::optional<OutputRange> range;
  // Inputs enter as (p - input_shift) * input_scale; identity by default.
  Point input_shift{0.0, 0.0};
  double input_scale = 1.0;

  std::size_t num_parameters() const;
  /// Layer by layer: W (column-major) then b.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& theta);
};

inline const std::vector<int>& default_layers() {
  static const std::vector<int> sizes{2, 50, 50, 50, 1};
  return sizes;
}

/// First-layer weights ~ U[-1/fan_in, 1/fan_in], deeper weights
/// ~ U[-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0], biases zero.
SineMlpParams init_sine_mlp(std::uint64_t seed, double omega0, const std::vector<int>& layers = default_layers(),
                            std::optional<OutputRange> range = std::nullopt);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;  // hidden pre-activations (after the omega0 scale on layer 1)
  std::vector<Eigen::MatrixXd> act;  // act[0] = inputs, act[l] = sin(pre[l-1])
  Eigen::VectorXd out_pre;           // final affine output z
};

/// Network output at each point. Every point is evaluated independently, so
/// results do not depend on batch composition or order.
Eigen::VectorXd forward(const SineMlpParams& params, std::span<const Point> points, ForwardCache* cache = nullptr);

/// Gradient of sum_p upstream[p] * k~(point p) with respect to the flattened parameters.
Eigen::VectorXd backward(const SineMlpParams& params, const ForwardCache& cache, const Eigen::VectorXd& upstream);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(std::size_t n);
};

/// One bias-corrected Adam update of `theta` in place.
void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr);

enum class LrPreset { square, phantom };

LrPreset lr_preset_from_string(const std::string& s);
std::string to_string(LrPreset p);
/// square: 1e-3 * 0.25^floor(epoch / 20); phantom: 1e-3 before epoch 50, then 1e-4.
double lr_schedule(LrPreset preset, int epoch);

/// First line "# {json header}", then "index,value" rows.
void write_checkpoint(const std::filesystem::path& path, const SineMlpParams& params, std::uint64_t seed);
SineMlpParams read_checkpoint(const std::filesystem::path& path);

} // namespace dtninv
