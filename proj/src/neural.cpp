#include "dtninv/neural.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dtninv/error.hpp"

namespace dtninv {

std::size_t SineMlpParams::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

Eigen::VectorXd SineMlpParams::flatten() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    theta.segment(off, weights[l].size()) = weights[l].reshaped();
    off += weights[l].size();
    theta.segment(off, biases[l].size()) = biases[l];
    off += biases[l].size();
  }
  return theta;
}

void SineMlpParams::unflatten(const Eigen::VectorXd& theta) {
  require(static_cast<std::size_t>(theta.size()) == num_parameters(), "parameter vector size mismatch");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = theta.segment(off, weights[l].size());
    off += weights[l].size();
    biases[l] = theta.segment(off, biases[l].size());
    off += biases[l].size();
  }
}

SineMlpParams init_sine_mlp(std::uint64_t seed, double omega0, const std::vector<int>& layers,
                            std::optional<OutputRange> range) {
  require(layers.size() >= 2 && layers.front() == 2 && layers.back() == 1,
          "network must map 2 inputs to 1 output");
  require(omega0 > 0.0, "omega0 must be positive");
  if (range) require(range->lo > 0.0 && range->lo < range->hi, "output range needs 0 < lo < hi");

  SineMlpParams p;
  p.layers = layers;
  p.omega0 = omega0;
  p.range = range;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double bound) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return bound * (2.0 * u - 1.0);
  };
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const int fan_in = layers[l];
    const double bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / omega0;
    Eigen::MatrixXd w(layers[l + 1], fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = uniform(bound);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(layers[l + 1]));
  }
  return p;
}

namespace {

// pre.col(c) = scale * (W * in.col(c) + b), accumulated column by column in a
// fixed order so each point's result is independent of the batch.
void affine(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, const Eigen::MatrixXd& in, double scale,
            Eigen::MatrixXd& pre) {
  pre.resize(w.rows(), in.cols());
  Eigen::VectorXd acc(w.rows());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    acc = b;
    for (Eigen::Index j = 0; j < w.cols(); ++j) acc.noalias() += w.col(j) * in(j, c);
    pre.col(c) = scale * acc;
  }
}

} // namespace

Eigen::VectorXd forward(const SineMlpParams& params, std::span<const Point> points, ForwardCache* cache) {
  const auto np = static_cast<Eigen::Index>(points.size());
  const std::size_t nl = params.weights.size();
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.pre.assign(nl - 1, {});
  c.act.assign(nl, {});
  c.act[0].resize(2, np);
  for (Eigen::Index i = 0; i < np; ++i) {
    const Point p = points[static_cast<std::size_t>(i)];
    c.act[0](0, i) = (p.x - params.input_shift.x) * params.input_scale;
    c.act[0](1, i) = (p.y - params.input_shift.y) * params.input_scale;
  }
  for (std::size_t l = 0; l + 1 < nl; ++l) {
    affine(params.weights[l], params.biases[l], c.act[l], l == 0 ? params.omega0 : 1.0, c.pre[l]);
    c.act[l + 1] = c.pre[l].array().sin();
  }
  Eigen::MatrixXd out;
  affine(params.weights[nl - 1], params.biases[nl - 1], c.act[nl - 1], 1.0, out);
  c.out_pre = out.row(0).transpose();
  if (!params.range) return c.out_pre;
  const double lo = params.range->lo;
  const double hi = params.range->hi;
  return c.out_pre.unaryExpr([lo, hi](double z) { return lo + (hi - lo) * 0.5 * (std::tanh(z) + 1.0); });
}

Eigen::VectorXd backward(const SineMlpParams& params, const ForwardCache& cache, const Eigen::VectorXd& upstream) {
  const std::size_t nl = params.weights.size();
  require(cache.act.size() == nl && upstream.size() == cache.out_pre.size(), "backward needs the matching forward cache");

  Eigen::RowVectorXd dout = upstream.transpose();
  if (params.range) {
    const double half = 0.5 * (params.range->hi - params.range->lo);
    for (Eigen::Index i = 0; i < dout.size(); ++i) {
      const double t = std::tanh(cache.out_pre[i]);
      dout[i] *= half * (1.0 - t * t);
    }
  }

  std::vector<Eigen::MatrixXd> dw(nl);
  std::vector<Eigen::VectorXd> db(nl);
  Eigen::MatrixXd delta = dout;  // d/d(pre-activation) of the current layer
  for (std::size_t l = nl; l-- > 0;) {
    const double scale = l == 0 ? params.omega0 : 1.0;
    dw[l].noalias() = scale * delta * cache.act[l].transpose();
    db[l] = scale * delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd dact;
    dact.noalias() = params.weights[l].transpose() * delta;
    delta = dact.array() * cache.pre[l - 1].array().cos();
  }

  Eigen::VectorXd grad(static_cast<Eigen::Index>(params.num_parameters()));
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < nl; ++l) {
    grad.segment(off, dw[l].size()) = dw[l].reshaped();
    off += dw[l].size();
    grad.segment(off, db[l].size()) = db[l];
    off += db[l].size();
  }
  return grad;
}

AdamState AdamState::fresh(std::size_t n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return s;
}

void adam_step(AdamState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
  require(theta.size() == grad.size() && state.m.size() == grad.size() && state.v.size() == grad.size(),
          "adam_step: shape mismatch");
  if (!grad.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  theta.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

LrPreset lr_preset_from_string(const std::string& s) {
  if (s == "square") return LrPreset::square;
  if (s == "phantom") return LrPreset::phantom;
  throw InvalidArgument("unknown learning-rate preset '" + s + "'");
}

std::string to_string(LrPreset p) { return p == LrPreset::square ? "square" : "phantom"; }

double lr_schedule(LrPreset preset, int epoch) {
  require(epoch >= 0, "epoch must be non-negative");
  if (preset == LrPreset::square) return 1e-3 * std::pow(0.25, epoch / 20);
  return epoch < 50 ? 1e-3 : 1e-4;
}

void write_checkpoint(const std::filesystem::path& path, const SineMlpParams& params, std::uint64_t seed) {
  nlohmann::ordered_json header;
  header["layers"] = params.layers;
  header["omega0"] = params.omega0;
  if (params.range) {
    header["range"] = {params.range->lo, params.range->hi};
  } else {
    header["range"] = nullptr;
  }
  header["input_shift"] = {params.input_shift.x, params.input_shift.y};
  header["input_scale"] = params.input_scale;
  header["seed"] = seed;
  std::ofstream os(path);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os << "# " << header.dump() << "\nindex,value\n" << std::setprecision(17);
  const auto theta = params.flatten();
  for (Eigen::Index i = 0; i < theta.size(); ++i) os << i << ',' << theta[i] << '\n';
}

SineMlpParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read checkpoint " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("# ", 0) != 0) throw IoError("checkpoint is missing its JSON header");
  const auto header = nlohmann::json::parse(line.substr(2));
  std::optional<OutputRange> range;
  if (!header.at("range").is_null()) range = OutputRange{header["range"][0], header["range"][1]};
  auto params = init_sine_mlp(0, header.at("omega0").get<double>(), header.at("layers").get<std::vector<int>>(), range);
  if (header.contains("input_shift")) {
    params.input_shift = {header["input_shift"][0].get<double>(), header["input_shift"][1].get<double>()};
    params.input_scale = header.at("input_scale").get<double>();
  }
  std::getline(is, line);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(params.num_parameters()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!std::getline(is, line)) throw IoError("checkpoint is truncated");
    const auto comma = line.find(',');
    if (comma == std::string::npos || std::stol(line.substr(0, comma)) != i) throw IoError("malformed checkpoint row");
    theta[i] = std::stod(line.substr(comma + 1));
  }
  params.unflatten(theta);
  return params;
}

} // namespace dtninv
