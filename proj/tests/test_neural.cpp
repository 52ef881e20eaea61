#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "dtninv/error.hpp"
#include "dtninv/neural.hpp"

using namespace dtninv;

namespace {

// Scalar-loop evaluation of the network at one point.
double reference_forward(const SineMlpParams& p, Point x) {
  std::vector<double> z{(x.x - p.input_shift.x) * p.input_scale, (x.y - p.input_shift.y) * p.input_scale};
  const std::size_t nl = p.weights.size();
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& w = p.weights[l];
    const auto& b = p.biases[l];
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double s = b[r];
      for (Eigen::Index c = 0; c < w.cols(); ++c) s += w(r, c) * z[static_cast<std::size_t>(c)];
      if (l + 1 == nl) {
        next[static_cast<std::size_t>(r)] = s;
      } else {
        next[static_cast<std::size_t>(r)] = std::sin(l == 0 ? p.omega0 * s : s);
      }
    }
    z = std::move(next);
  }
  if (p.range) return p.range->lo + (p.range->hi - p.range->lo) * (std::tanh(z[0]) + 1.0) / 2.0;
  return z[0];
}

std::vector<Point> random_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

double weighted_output(const SineMlpParams& p, const std::vector<Point>& pts, const Eigen::VectorXd& w) {
  return forward(p, pts).dot(w);
}

double max_backward_error(SineMlpParams params) {
  const auto pts = random_points(7, 3);
  Eigen::VectorXd up(7);
  for (int i = 0; i < 7; ++i) up[i] = std::cos(1.0 + i);
  ForwardCache cache;
  (void)forward(params, pts, &cache);
  const Eigen::VectorXd g = backward(params, cache, up);
  const Eigen::VectorXd theta = params.flatten();
  double worst = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); i += 7) {
    Eigen::VectorXd t = theta;
    t[i] += h;
    params.unflatten(t);
    const double fp = weighted_output(params, pts, up);
    t[i] -= 2 * h;
    params.unflatten(t);
    const double fm = weighted_output(params, pts, up);
    const double fd = (fp - fm) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(fd)));
  }
  params.unflatten(theta);
  return worst;
}

} // namespace

TEST_SUITE("neural") {
  TEST_CASE("parameter count and layout") {
    const auto p = init_sine_mlp(1, 30.0);
    CHECK(p.num_parameters() == 2 * 50 + 50 + 2 * (50 * 50 + 50) + 50 + 1);
    CHECK(p.flatten().size() == static_cast<Eigen::Index>(p.num_parameters()));
    auto q = p;
    Eigen::VectorXd t = p.flatten();
    t[0] = 123.0;
    q.unflatten(t);
    CHECK(q.weights[0](0, 0) == 123.0);
    CHECK_THROWS_AS(q.unflatten(Eigen::VectorXd::Zero(3)), InvalidArgument);
  }

  TEST_CASE("initialization bounds and seeding") {
    const auto p = init_sine_mlp(5, 30.0);
    CHECK(p.weights[0].cwiseAbs().maxCoeff() <= 0.5);
    for (std::size_t l = 1; l < p.weights.size(); ++l) {
      const double bound = std::sqrt(6.0 / static_cast<double>(p.weights[l].cols())) / 30.0;
      CHECK(p.weights[l].cwiseAbs().maxCoeff() <= bound);
      CHECK(p.weights[l].cwiseAbs().maxCoeff() > 0.5 * bound);
    }
    for (const auto& b : p.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
    CHECK(init_sine_mlp(5, 30.0).flatten() == p.flatten());
    CHECK(init_sine_mlp(6, 30.0).flatten() != p.flatten());
    CHECK_THROWS_AS(init_sine_mlp(1, 30.0, {3, 10, 1}), InvalidArgument);
    CHECK_THROWS_AS(init_sine_mlp(1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(init_sine_mlp(1, 30.0, default_layers(), OutputRange{1.0, 0.5}), InvalidArgument);
  }

  TEST_CASE("forward matches the scalar reference") {
    for (const auto& range : {std::optional<OutputRange>{}, std::optional<OutputRange>{OutputRange{0.4, 1.0}}}) {
      auto p = init_sine_mlp(2, 30.0, {2, 8, 6, 1}, range);
      Eigen::VectorXd t = p.flatten();
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] += 0.01 * std::sin(3.0 * static_cast<double>(i));
      p.unflatten(t);
      p.input_shift = {0.5, 0.5};
      p.input_scale = 2.0;
      const auto pts = random_points(20, 1);
      const Eigen::VectorXd out = forward(p, pts);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(out[static_cast<Eigen::Index>(i)] == doctest::Approx(reference_forward(p, pts[i])).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("bounded output stays inside the range") {
    auto p = init_sine_mlp(3, 30.0, default_layers(), OutputRange{0.2, 1.0});
    Eigen::VectorXd t = p.flatten() * 50.0;
    p.unflatten(t);
    const Eigen::VectorXd out = forward(p, random_points(200, 4));
    CHECK(out.minCoeff() >= 0.2);
    CHECK(out.maxCoeff() <= 1.0);
  }

  TEST_CASE("backward matches finite differences") {
    auto p = init_sine_mlp(4, 30.0, {2, 12, 12, 1});
    CHECK(max_backward_error(p) <= 1e-6);
    auto q = init_sine_mlp(4, 30.0, {2, 12, 12, 1}, OutputRange{0.4, 1.0});
    CHECK(max_backward_error(q) <= 1e-6);
    auto r = init_sine_mlp(4, 10.0, {2, 12, 12, 1});
    r.input_shift = {0.5, 0.5};
    r.input_scale = 2.0;
    CHECK(max_backward_error(r) <= 1e-6);
  }

  TEST_CASE("outputs do not depend on the batch") {
    const auto p = init_sine_mlp(7, 30.0);
    const auto pts = random_points(33, 2);
    const Eigen::VectorXd all = forward(p, pts);
    std::vector<Point> rev(pts.rbegin(), pts.rend());
    const Eigen::VectorXd back = forward(p, rev);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(all[static_cast<Eigen::Index>(i)] == back[static_cast<Eigen::Index>(pts.size() - 1 - i)]);
      const std::vector<Point> one{pts[i]};
      CHECK(all[static_cast<Eigen::Index>(i)] == forward(p, one)[0]);
    }
  }

  TEST_CASE("first Adam step moves every coordinate by about lr") {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
    const Eigen::VectorXd g = (Eigen::VectorXd(4) << 3.0, -0.02, 1e-3, -7.0).finished();
    auto st = AdamState::fresh(4);
    adam_step(st, theta, g, 1e-3);
    CHECK(st.t == 1);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double expect = -1e-3 * g[i] / (std::abs(g[i]) + 1e-8);
      CHECK(theta[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(st.m[0] == doctest::Approx(0.3));
    CHECK(st.v[0] == doctest::Approx(0.009));
  }

  TEST_CASE("Adam matches a hand-rolled second step") {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
    auto st = AdamState::fresh(1);
    adam_step(st, theta, Eigen::VectorXd::Constant(1, 2.0), 0.1);
    adam_step(st, theta, Eigen::VectorXd::Constant(1, -1.0), 0.1);
    double m = 0.0, v = 0.0, x = 1.0;
    int t = 0;
    for (double gr : {2.0, -1.0}) {
      ++t;
      m = 0.9 * m + 0.1 * gr;
      v = 0.999 * v + 0.001 * gr * gr;
      const double mh = m / (1 - std::pow(0.9, t));
      const double vh = v / (1 - std::pow(0.999, t));
      x -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
    CHECK(theta[0] == doctest::Approx(x).epsilon(1e-14));
    CHECK_THROWS_AS(adam_step(st, theta, Eigen::VectorXd::Constant(1, std::nan("")), 0.1), NumericalError);
  }

  TEST_CASE("learning-rate schedules") {
    CHECK(lr_schedule(LrPreset::square, 0) == 1e-3);
    CHECK(lr_schedule(LrPreset::square, 19) == 1e-3);
    CHECK(lr_schedule(LrPreset::square, 20) == doctest::Approx(2.5e-4));
    CHECK(lr_schedule(LrPreset::square, 45) == doctest::Approx(6.25e-5));
    CHECK(lr_schedule(LrPreset::phantom, 49) == 1e-3);
    CHECK(lr_schedule(LrPreset::phantom, 50) == 1e-4);
    CHECK(lr_schedule(LrPreset::phantom, 99) == 1e-4);
    CHECK(lr_preset_from_string("phantom") == LrPreset::phantom);
    CHECK(to_string(LrPreset::square) == "square");
    CHECK_THROWS_AS(lr_preset_from_string("cosine"), InvalidArgument);
  }

  TEST_CASE("checkpoint round trip") {
    auto p = init_sine_mlp(9, 25.0, {2, 10, 1}, OutputRange{0.4, 1.0});
    p.input_shift = {0.25, 0.5};
    p.input_scale = 3.0;
    const auto path = std::filesystem::temp_directory_path() / "dtninv_ckpt.csv";
    write_checkpoint(path, p, 9);
    const auto q = read_checkpoint(path);
    CHECK(q.layers == p.layers);
    CHECK(q.omega0 == p.omega0);
    CHECK(q.flatten() == p.flatten());
    REQUIRE(q.range.has_value());
    CHECK(q.range->lo == 0.4);
    CHECK(q.range->hi == 1.0);
    CHECK(q.input_shift.x == 0.25);
    CHECK(q.input_scale == 3.0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_checkpoint(path), IoError);
  }
}
