#include <doctest.h>

#include "oracles.hpp"
#include "rulx/metrics.hpp"
#include "rulx/mlp.hpp"

#include <random>

using namespace rulx;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = g(rng);
  return x;
}

double max_relative_error(const Vector& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric[i]), 1e-8});
    worst = std::max(worst, std::abs(analytic(i) - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("backprop gradient matches central differences") {
  const std::vector<std::vector<std::size_t>> shapes{{4}, {6, 3}, {5}};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto& hidden = shapes[seed % shapes.size()];
    const Matrix x = gaussian(5, 3, seed);
    const Vector t = gaussian(5, 1, seed + 50).col(0);
    Mlp net = Mlp::initialize(3, hidden, seed);
    // Shift biases off zero so no ReLU sits on its kink.
    Vector p = net.parameters();
    p.array() += 0.05;
    net.set_parameters(p);

    const Vector analytic = net.loss_gradient(x, t);
    auto f = [&](const std::vector<double>& flat) {
      Mlp probe = net;
      probe.set_parameters(Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size())));
      return probe.loss(x, t);
    };
    const auto numeric = oracle::numeric_gradient(f, {p.data(), p.data() + p.size()}, 1e-5);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("loss is half the mean squared error of the raw output") {
  const Matrix x = gaussian(7, 2, 3);
  const Vector t = gaussian(7, 1, 4).col(0);
  const Mlp net = Mlp::initialize(2, {3}, 9);
  const Vector out = net.network_output(x);
  CHECK(net.loss(x, t) == doctest::Approx(0.5 * mse(out, t)).epsilon(1e-14));
}

TEST_CASE("parameters round-trip through the flat layout") {
  Mlp net = Mlp::initialize(4, {3, 2}, 1);
  CHECK(net.parameter_count() == 4 * 3 + 3 + 3 * 2 + 2 + 2 * 1 + 1);
  const Vector p = Vector::LinSpaced(static_cast<Eigen::Index>(net.parameter_count()), -1, 1);
  net.set_parameters(p);
  CHECK(net.parameters().cwiseEqual(p).all());
  CHECK(net.layers()[0].weights(1, 0) == p(1));  // column-major weights first
  CHECK_THROWS_AS(net.set_parameters(Vector::Zero(3)), Error);
}

TEST_CASE("initialization respects the uniform bound and the seed") {
  const Mlp a = Mlp::initialize(24, {50}, 7);
  const Mlp b = Mlp::initialize(24, {50}, 7);
  CHECK(a.parameters().cwiseEqual(b.parameters()).all());
  CHECK_FALSE(Mlp::initialize(24, {50}, 8).parameters().cwiseEqual(a.parameters()).all());
  const auto& layers = a.layers();
  REQUIRE(layers.size() == 2);
  CHECK(layers[0].weights.rows() == 50);
  CHECK(layers[0].weights.cols() == 24);
  const double bound0 = std::sqrt(6.0 / (24 + 50));
  CHECK(layers[0].weights.cwiseAbs().maxCoeff() <= bound0);
  const double bound1 = std::sqrt(6.0 / (50 + 1));
  CHECK(layers[1].weights.cwiseAbs().maxCoeff() <= bound1);
}

TEST_CASE("zero epochs returns the initialized network") {
  const Matrix x = gaussian(30, 3, 5);
  const Vector y = x.col(0) * 10 + Vector::Constant(30, 50);
  MlpParams p;
  p.max_iter = 0;
  p.seed = 12;
  p.hidden_layers = {8};
  const Mlp a = fit_mlp(x, y, p);
  const Mlp b = fit_mlp(x, y, p);
  CHECK(a.predict_batch(x).cwiseEqual(b.predict_batch(x)).all());
  const Vector raw = a.network_output(x);
  const Vector mapped = raw.array() * a.target_scale() + a.target_mean();
  CHECK((a.predict_batch(x) - mapped).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fits y = x on scaled points") {
  Matrix x(50, 1);
  for (int i = 0; i < 50; ++i) x(i, 0) = -1.7 + 3.4 * i / 49.0;
  const Vector y = x.col(0);
  MlpParams p;
  p.hidden_layers = {50};
  p.max_iter = 1000;
  p.standardize_target = false;
  p.seed = 1;
  const Mlp net = fit_mlp(x, y, p);
  CHECK(mse(y, net.predict_batch(x)) < 0.05);
  CHECK(net.epoch_loss.back() < net.epoch_loss.front());
}

TEST_CASE("training is deterministic for a seed") {
  const Matrix x = gaussian(120, 4, 2);
  const Vector y = (x.col(0).array() * x.col(1).array()).matrix() + x.col(2);
  MlpParams p;
  p.max_iter = 30;
  p.hidden_layers = {10};
  p.seed = 5;
  CHECK(fit_mlp(x, y, p).predict_batch(x).cwiseEqual(fit_mlp(x, y, p).predict_batch(x)).all());
}

TEST_CASE("adaptive step shrinks when progress stalls") {
  const Matrix x = gaussian(60, 2, 6);
  const Vector y = gaussian(60, 1, 7).col(0);  // pure noise: loss plateaus
  MlpParams p;
  p.max_iter = 400;
  p.hidden_layers = {3};
  p.seed = 2;
  const Mlp net = fit_mlp(x, y, p);
  CHECK(net.final_learning_rate < p.learning_rate);
}

TEST_CASE("divergence names the epoch") {
  const Matrix x = gaussian(40, 3, 8) * 1e3;
  const Vector y = gaussian(40, 1, 9).col(0) * 1e6;
  MlpParams p;
  p.learning_rate = 1e3;
  p.standardize_target = false;
  p.max_iter = 50;
  try {
    fit_mlp(x, y, p);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::training);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("mlp parameter validation") {
  MlpParams p;
  p.batch_size = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.learning_rate = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.hidden_layers = {5, 0};
  CHECK_THROWS_AS(p.validate(), Error);
}
