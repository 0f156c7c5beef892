#include <doctest.h>

#include "rulx/explain.hpp"
#include "rulx/linear.hpp"

#include <random>
#include <set>

using namespace rulx;

namespace {

Matrix uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0, double hi = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = u(rng);
  return x;
}

}  // namespace

TEST_CASE("quartile edges use midpoint interpolation") {
  Matrix bg(8, 2);
  bg << 8, 1, 7, 1, 6, 1, 5, 1, 4, 1, 3, 1, 2, 1, 1, 2;
  const auto edges = quartile_edges(bg);
  CHECK(edges[0] == std::vector<double>{2.5, 4.5, 6.5});
  CHECK(edges[1] == std::vector<double>{1.0});  // duplicates collapse
  CHECK_THROWS_AS(quartile_edges(Matrix(0, 2)), Error);
}

TEST_CASE("bin conditions in original units") {
  Matrix bg(8, 1);
  bg << 1, 2, 3, 4, 5, 6, 7, 8;
  const LinearModel model(Vector::Constant(1, 1.0), 0.0);
  LimeOptions o;
  o.k_features = 1;
  o.n_samples = 200;
  o.feature_names = {"sensor-1"};
  const std::vector<std::pair<double, std::string>> cases{
      {1.0, "sensor-1 <= 2.5"}, {2.5, "sensor-1 <= 2.5"}, {3.0, "2.5 < sensor-1 <= 4.5"},
      {6.5, "4.5 < sensor-1 <= 6.5"}, {9.0, "sensor-1 > 6.5"}};
  for (const auto& [value, condition] : cases) {
    const Explanation e = lime_explain(model, Vector::Constant(1, value), bg, o);
    CHECK(e.contributions[0].condition == condition);
    CHECK(e.contributions[0].feature_value == value);
  }
}

TEST_CASE("monotone linear model: weight signs follow the coefficients") {
  const std::size_t m = 6;
  Vector w(m);
  w << 3.0, -2.0, 1.5, -4.0, 0.8, -1.0;
  const LinearModel model(w, 10.0);
  const Matrix bg = uniform(400, m, 1);
  // Put each feature in the top quartile so that dropping it lowers x_j:
  // the surrogate weight then carries the sign of w_j.
  Vector x = Vector::Constant(m, 9.5);
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    LimeOptions o;
    o.seed = seed;
    o.k_features = 4;
    o.n_samples = 1000;
    const Explanation e = lime_explain(model, x, bg, o);
    CHECK(e.contributions.size() == 4);
    for (const auto& c : e.contributions) {
      ++total;
      agree += (c.value > 0) == (w(c.index) > 0);
    }
    CHECK(e.r2_defined);
    CHECK(e.r2 > 0.5);
  }
  CHECK(agree == total);
}

TEST_CASE("top-k picks the largest effects") {
  Vector w(5);
  w << 0.01, 5.0, -0.02, -6.0, 0.03;
  const LinearModel model(w, 0.0);
  const Matrix bg = uniform(300, 5, 2);
  LimeOptions o;
  o.k_features = 2;
  o.seed = 4;
  const Explanation e = lime_explain(model, Vector::Constant(5, 9.0), bg, o);
  std::set<std::size_t> chosen;
  for (const auto& c : e.contributions) chosen.insert(c.index);
  CHECK(chosen == std::set<std::size_t>{1, 3});
  CHECK(std::abs(e.contributions[0].value) >= std::abs(e.contributions[1].value));
}

TEST_CASE("lime is seeded and reports base and prediction") {
  const FunctionPredictor model(3, [](const Eigen::Ref<const Vector>& x) { return x(0) * x(1) - x(2); });
  const Matrix bg = uniform(100, 3, 3);
  const Vector x = uniform(1, 3, 4).row(0).transpose();
  LimeOptions o;
  o.seed = 8;
  o.k_features = 3;
  const Explanation a = lime_explain(model, x, bg, o);
  const Explanation b = lime_explain(model, x, bg, o);
  for (std::size_t i = 0; i < a.contributions.size(); ++i) CHECK(a.contributions[i].value == b.contributions[i].value);
  CHECK(a.predicted_value == model.predict(x));
  CHECK(a.base_value == doctest::Approx(model.predict_batch(bg).mean()).epsilon(1e-12));
  o.seed = 9;
  CHECK(lime_explain(model, x, bg, o).contributions[0].value != a.contributions[0].value);
}

TEST_CASE("constant model leaves R^2 undefined") {
  const FunctionPredictor model(2, [](const Eigen::Ref<const Vector>&) { return 42.0; });
  const Matrix bg = uniform(50, 2, 5);
  LimeOptions o;
  o.k_features = 2;
  const Explanation e = lime_explain(model, Vector::Constant(2, 5.0), bg, o);
  CHECK_FALSE(e.r2_defined);
  for (const auto& c : e.contributions) CHECK(std::abs(c.value) < 1e-9);
}

TEST_CASE("lime input validation") {
  const LinearModel model(Vector::Ones(3), 0.0);
  const Matrix bg = uniform(20, 3, 6);
  LimeOptions o;
  o.k_features = 3;
  o.n_samples = 99;
  CHECK_THROWS_AS(lime_explain(model, Vector::Zero(3), bg, o), Error);
  o.n_samples = 500;
  o.k_features = 4;
  CHECK_THROWS_AS(lime_explain(model, Vector::Zero(3), bg, o), Error);
  o.k_features = 0;
  CHECK_THROWS_AS(lime_explain(model, Vector::Zero(3), bg, o), Error);
  o.k_features = 2;
  CHECK_THROWS_AS(lime_explain(model, Vector::Zero(3), Matrix::Constant(10, 3, 1.0), o), Error);
  CHECK_THROWS_AS(lime_explain(model, Vector::Zero(3), Matrix(0, 3), o), Error);
}
