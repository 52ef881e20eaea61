#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dtninv/adjoint.hpp"
#include "dtninv/coeff.hpp"
#include "dtninv/dtn.hpp"
#include "dtninv/error.hpp"

using namespace dtninv;

namespace {

Vector perturbed(const Mesh& m, const CoefficientField& k, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  const auto kv = k.interpolate(m);
  Vector out(static_cast<Eigen::Index>(kv.size()));
  for (std::size_t i = 0; i < kv.size(); ++i) out[static_cast<Eigen::Index>(i)] = kv[i] * (1.0 + u(rng));
  return out;
}

// Directional derivative check with central differences.
double fd_relative_error(AdjointEvaluator& ev, const Vector& k, const CauchySample& s, const Vector& dir) {
  const auto lg = ev.loss_grad(k, s);
  const double eps = 1e-6;
  const double fd = (ev.loss(k + eps * dir, s) - ev.loss(k - eps * dir, s)) / (2 * eps);
  const double an = lg.grad_k.dot(dir);
  return std::abs(fd - an) / std::max(std::abs(fd), 1e-14);
}

Vector random_direction(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector d(n);
  for (auto& v : d) v = g(rng);
  return d / d.norm();
}

} // namespace

TEST_SUITE("adjoint") {
  TEST_CASE("gradient matches finite differences, full and partial observation") {
    const Mesh m = unit_square_mesh(10);
    for (const auto& spec : {ObservationSpec::full(), ObservationSpec::paper_partial()}) {
      const auto data = generate_dataset(m, CoefficientField::sinusoid(), spec, 2, 1);
      AdjointEvaluator ev(m);
      const Vector k = perturbed(m, CoefficientField::constant(0.6), 0.2, 3);
      for (int trial = 0; trial < 3; ++trial) {
        const Vector dir = random_direction(k.size(), 10 + static_cast<std::uint64_t>(trial));
        CHECK(fd_relative_error(ev, k, data.samples[0], dir) <= 1e-4);
      }
    }
  }

  TEST_CASE("gradient on the disk with a zero source") {
    const Mesh m = disk_mesh({0.5, 0.5}, 0.5, 0.1);
    const auto data = generate_phantom_dataset(m, phantom2(2.0, 64), 1, 2);
    AdjointEvaluator ev(m);
    const Vector k = perturbed(m, CoefficientField::constant(2.0), 0.3, 4);
    CHECK(fd_relative_error(ev, k, data.samples[0], random_direction(k.size(), 5)) <= 1e-4);
  }

  TEST_CASE("loss and gradient vanish at the truth") {
    const Mesh m = unit_square_mesh(8);
    const auto k = CoefficientField::sinusoid();
    const auto data = generate_dataset(m, k, ObservationSpec::full(), 3, 7);
    AdjointEvaluator ev(m);
    const auto kv = k.interpolate(m);
    const Vector kt = Eigen::Map<const Vector>(kv.data(), static_cast<Eigen::Index>(kv.size()));
    for (const auto& s : data.samples) {
      const auto lg = ev.loss_grad(kt, s);
      CHECK(lg.loss <= 1e-20);
      CHECK(lg.grad_k.cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("loss is positive away from the truth") {
    const Mesh m = unit_square_mesh(8);
    const auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::full(), 1, 7);
    AdjointEvaluator ev(m);
    CHECK(ev.loss(Vector::Constant(static_cast<Eigen::Index>(m.num_vertices()), 0.5), data.samples[0]) > 1e-6);
  }

  TEST_CASE("doubling the weights doubles loss and gradient") {
    const Mesh m = unit_square_mesh(8);
    const auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::full(), 1, 7);
    AdjointEvaluator ev(m);
    const Vector k = perturbed(m, CoefficientField::constant(0.7), 0.1, 1);
    const auto& s = data.samples[0];
    const auto base = ev.loss_grad(k, s, s.h.weights);
    const auto twice = ev.loss_grad(k, s, Vector(2.0 * s.h.weights));
    CHECK(twice.loss == doctest::Approx(2.0 * base.loss).epsilon(1e-13));
    CHECK((twice.grad_k - 2.0 * base.grad_k).norm() <= 1e-12 * base.grad_k.norm());
    const auto dflt = ev.loss_grad(k, s);
    CHECK(dflt.loss == base.loss);
  }

  TEST_CASE("unobserved vertices do not affect the loss") {
    const Mesh m = unit_square_mesh(10);
    const auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::paper_partial(), 1, 3);
    AdjointEvaluator ev(m);
    const Vector k = Vector::Constant(static_cast<Eigen::Index>(m.num_vertices()), 0.6);
    CauchySample s = data.samples[0];
    const double before = ev.loss(k, s);
    for (Eigen::Index i = 0; i < s.h.values.size(); ++i) {
      if (!s.h.observed[static_cast<std::size_t>(i)]) s.h.values[i] = 1e6;
    }
    CHECK(ev.loss(k, s) == before);
  }

  TEST_CASE("one forward and one adjoint solve per gradient") {
    const Mesh m = unit_square_mesh(6);
    const auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::full(), 1, 3);
    AdjointEvaluator ev(m);
    const Vector k = Vector::Constant(static_cast<Eigen::Index>(m.num_vertices()), 0.6);
    const auto before = interior_solve_count();
    (void)ev.loss_grad(k, data.samples[0]);
    CHECK(interior_solve_count() - before == 2);
  }

  TEST_CASE("regularizer value and gradient") {
    const Mesh m = unit_square_mesh(9);
    AdjointEvaluator ev(m);
    Vector kx(static_cast<Eigen::Index>(m.num_vertices()));
    for (Index v = 0; v < static_cast<Index>(m.num_vertices()); ++v) kx[v] = m.vertex(v).x;
    // int |grad x|^2 over the unit square.
    CHECK(ev.regularization(kx, 1.0).loss == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.regularization(kx, 0.25).loss == doctest::Approx(0.25).epsilon(1e-12));
    const Vector c = Vector::Constant(kx.size(), 3.0);
    CHECK(std::abs(ev.regularization(c, 1.0).loss) <= 1e-12);
    CHECK(ev.regularization(c, 1.0).grad_k.cwiseAbs().maxCoeff() <= 1e-12);

    const Vector k = perturbed(m, CoefficientField::constant(1.0), 0.5, 2);
    const Vector dir = random_direction(k.size(), 3);
    const double eps = 1e-5;
    const double fd = (ev.regularization(k + eps * dir, 2.0).loss - ev.regularization(k - eps * dir, 2.0).loss) /
                      (2 * eps);
    CHECK(ev.regularization(k, 2.0).grad_k.dot(dir) == doctest::Approx(fd).epsilon(1e-7));
    const auto free_fn = regularization_grad(m, NodalField(m, k), 2.0);
    CHECK(free_fn.loss == doctest::Approx(ev.regularization(k, 2.0).loss).epsilon(1e-14));
    CHECK_THROWS_AS(ev.regularization(k, -1.0), InvalidArgument);
  }

  TEST_CASE("dataset loss ignores sample order") {
    const Mesh m = unit_square_mesh(6);
    auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::full(), 5, 3);
    const NodalField k(m, 0.7);
    const double a = dataset_loss(m, k, data);
    std::reverse(data.samples.begin(), data.samples.end());
    CHECK(dataset_loss(m, k, data) == a);
    double sum = 0.0;
    for (const auto& s : data.samples) sum += sample_loss_grad(m, k, s).loss;
    CHECK(a == doctest::Approx(sum).epsilon(1e-13));
  }

  TEST_CASE("mismatched samples are rejected") {
    const Mesh m = unit_square_mesh(6);
    const auto data = generate_dataset(m, CoefficientField::sinusoid(), ObservationSpec::full(), 1, 3);
    const Mesh other = unit_square_mesh(5);
    AdjointEvaluator ev(other);
    CHECK_THROWS_AS(ev.loss(Vector::Ones(static_cast<Eigen::Index>(other.num_vertices())), data.samples[0]),
                    InvalidArgument);
  }
}
