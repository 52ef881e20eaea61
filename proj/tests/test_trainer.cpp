#include <doctest.h>

#include <cmath>

#include "dtninv/coeff.hpp"
#include "dtninv/dtn.hpp"
#include "dtninv/error.hpp"
#include "dtninv/trainer.hpp"

using namespace dtninv;

namespace {

struct Small {
  Mesh mesh = unit_square_mesh(6);
  CauchyDataset data = generate_dataset(mesh, CoefficientField::sinusoid(), ObservationSpec::full(), 4, 1);
  Vector k_true = truth(mesh);

  static Vector truth(const Mesh& m) {
    const auto kv = CoefficientField::sinusoid().interpolate(m);
    return Eigen::Map<const Vector>(kv.data(), static_cast<Eigen::Index>(kv.size()));
  }
};

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 3;
  c.layers = {2, 16, 16, 1};
  c.omega0 = 10.0;
  return c;
}

} // namespace

TEST_SUITE("trainer") {
  TEST_CASE("zero learning rate leaves the network unchanged") {
    Small s;
    auto cfg = small_config();
    cfg.fixed_lr = 0.0;
    const auto res = train(s.mesh, s.data, s.k_true, cfg);
    const auto init = init_sine_mlp(cfg.init_seed, cfg.omega0, cfg.layers);
    CHECK(res.params.flatten() == init.flatten());
    REQUIRE(res.history.size() == 3);
    CHECK(res.history[0].mean_loss == res.history[2].mean_loss);
    CHECK(res.history[0].lr == 0.0);
  }

  TEST_CASE("training is deterministic") {
    Small s;
    const auto cfg = small_config();
    const auto a = train(s.mesh, s.data, s.k_true, cfg);
    const auto b = train(s.mesh, s.data, s.k_true, cfg);
    CHECK(a.params.flatten() == b.params.flatten());
    CHECK(a.k_recon == b.k_recon);
    for (std::size_t e = 0; e < a.history.size(); ++e) {
      CHECK(a.history[e].mean_loss == b.history[e].mean_loss);
      CHECK(a.history[e].rel_error == b.history[e].rel_error);
    }
    auto other = cfg;
    other.shuffle_seed = 99;
    CHECK(train(s.mesh, s.data, s.k_true, other).params.flatten() != a.params.flatten());
  }

  TEST_CASE("callback sees every epoch in order") {
    Small s;
    auto cfg = small_config();
    int calls = 0;
    train(s.mesh, s.data, s.k_true, cfg, [&](const EpochRecord& r, const SineMlpParams&) {
      CHECK(r.epoch == calls);
      CHECK(std::isfinite(r.mean_loss));
      CHECK(r.rel_error > 0.0);
      CHECK(r.lr == lr_schedule(LrPreset::square, r.epoch));
      ++calls;
    });
    CHECK(calls == 3);
  }

  TEST_CASE("loss decreases on a small problem") {
    Small s;
    auto cfg = small_config();
    cfg.epochs = 30;
    cfg.fixed_lr = 1e-3;
    const auto res = train(s.mesh, s.data, s.k_true, cfg);
    CHECK(res.history.back().mean_loss < 0.5 * res.history.front().mean_loss);
    CHECK(res.history.back().rel_error < res.history.front().rel_error);
  }

  TEST_CASE("bounded output during training stays in range") {
    Small s;
    auto cfg = small_config();
    cfg.range = OutputRange{0.4, 1.0};
    const auto res = train(s.mesh, s.data, s.k_true, cfg);
    CHECK(res.k_recon.minCoeff() >= 0.4);
    CHECK(res.k_recon.maxCoeff() <= 1.0);
    CHECK(res.history.back().clamps == 0);
  }

  TEST_CASE("range applied after training clamps the reconstruction") {
    Small s;
    auto cfg = small_config();
    cfg.range = OutputRange{0.5, 0.6};
    cfg.range_mode = RangeMode::after;
    const auto res = train(s.mesh, s.data, s.k_true, cfg);
    CHECK(res.k_recon.minCoeff() >= 0.5);
    CHECK(res.k_recon.maxCoeff() <= 0.6);
    const Vector raw = reconstruct_field(res.params, s.mesh);
    CHECK(reconstruct_field(res.params, s.mesh, OutputRange{0.5, 0.6}) == raw.cwiseMax(0.5).cwiseMin(0.6));
  }

  TEST_CASE("non-finite data aborts with a numerical error") {
    Small s;
    s.data.samples[2].h.values[0] = std::nan("");
    CHECK_THROWS_AS(train(s.mesh, s.data, s.k_true, small_config()), NumericalError);
  }

  TEST_CASE("clamp gradient rules") {
    const std::vector<bool> clamped{true, true, false, false};
    const Vector g = (Vector(4) << 2.0, -3.0, 5.0, -7.0).finished();
    Vector a = g, b = g, c = g;
    apply_clamp_gradient(ClampGradient::straight_through, clamped, a);
    apply_clamp_gradient(ClampGradient::zero, clamped, b);
    apply_clamp_gradient(ClampGradient::projected, clamped, c);
    CHECK(a == g);
    CHECK(b == (Vector(4) << 0.0, 0.0, 5.0, -7.0).finished());
    // Descent moves against the gradient, so only negative entries raise k.
    CHECK(c == (Vector(4) << 0.0, -3.0, 5.0, -7.0).finished());
  }

  TEST_CASE("bad configurations are rejected") {
    Small s;
    auto cfg = small_config();
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(s.mesh, s.data, s.k_true, cfg), InvalidArgument);
    cfg = small_config();
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(train(s.mesh, s.data, s.k_true, cfg), InvalidArgument);
  }
}
