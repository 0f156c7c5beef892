#include "rulx/explain.hpp"
#include "rulx/parallel.hpp"
#include "rulx/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace rulx {
namespace {

using CoalitionMask = std::uint64_t;

constexpr std::size_t kMaxKernelFeatures = 62;
constexpr std::size_t kMasksPerTask = 32;

std::vector<std::string> resolve_names(const std::vector<std::string>& names, std::size_t m) {
  if (names.empty()) {
    std::vector<std::string> out(m);
    for (std::size_t j = 0; j < m; ++j) out[j] = "x" + std::to_string(j);
    return out;
  }
  require(names.size() == m, "feature name count does not match the instance");
  return names;
}

void check_inputs(const Predictor& model, const Vector& instance, const Matrix& background) {
  if (background.rows() == 0) fail(ErrorKind::invalid_argument, "background data is empty");
  require(static_cast<std::size_t>(instance.size()) == model.arity(), "instance arity does not match the model");
  require(static_cast<std::size_t>(background.cols()) == model.arity(), "background arity does not match the model");
}

/// Interventional coalition value: the mean prediction over background rows
/// with the coalition's players set to the instance's values. Features that are
/// not players keep the instance's values throughout.
class CoalitionValues {
 public:
  CoalitionValues(const Predictor& model, const Vector& instance, const Matrix& background,
                  std::vector<std::size_t> players)
      : model_(model), instance_(instance), background_(background), players_(std::move(players)) {
    is_player_.assign(static_cast<std::size_t>(instance.size()), false);
    for (std::size_t p : players_) is_player_[p] = true;
  }

  std::vector<double> evaluate(const std::vector<CoalitionMask>& masks) const {
    std::vector<double> values(masks.size());
    const std::size_t tasks = (masks.size() + kMasksPerTask - 1) / kMasksPerTask;
    parallel_for(tasks, [&](std::size_t t) {
      Matrix rows(background_.rows(), background_.cols());
      const std::size_t end = std::min(masks.size(), (t + 1) * kMasksPerTask);
      for (std::size_t k = t * kMasksPerTask; k < end; ++k) values[k] = value(masks[k], rows);
    });
    return values;
  }

  std::size_t evaluations(std::size_t masks) const { return masks * static_cast<std::size_t>(background_.rows()); }

 private:
  double value(CoalitionMask mask, Matrix& rows) const {
    rows = background_;
    for (Eigen::Index j = 0; j < instance_.size(); ++j)
      if (!is_player_[j]) rows.col(j).setConstant(instance_(j));
    for (std::size_t k = 0; k < players_.size(); ++k)
      if (mask >> k & 1U) rows.col(static_cast<Eigen::Index>(players_[k])).setConstant(instance_(players_[k]));
    return model_.predict_batch(rows).mean();
  }

  const Predictor& model_;
  const Vector& instance_;
  const Matrix& background_;
  std::vector<std::size_t> players_;
  std::vector<bool> is_player_;
};

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// Shapley kernel weight of one coalition of the given size.
double kernel_weight(std::size_t m, std::size_t size) {
  return static_cast<double>(m - 1) /
         (binomial(m, size) * static_cast<double>(size) * static_cast<double>(m - size));
}

void sort_contributions(std::vector<Contribution>& c) {
  std::stable_sort(c.begin(), c.end(), [](const Contribution& a, const Contribution& b) {
    const double fa = std::abs(a.value), fb = std::abs(b.value);
    if (fa != fb) return fa > fb;
    return a.index < b.index;
  });
}

Explanation shapley_explanation(ExplainMethod method, const Vector& instance, const std::vector<std::size_t>& players,
                                const Vector& phi, const std::vector<std::string>& names, double base, double fx) {
  Explanation e;
  e.method = method;
  e.base_value = base;
  e.predicted_value = fx;
  for (std::size_t k = 0; k < players.size(); ++k) {
    const std::size_t j = players[k];
    e.contributions.push_back({names[j], names[j] + " = " + format_value(instance(j)), phi(k), instance(j), j});
  }
  sort_contributions(e.contributions);
  e.local_accuracy_residual = std::abs(base + phi.sum() - fx);
  return e;
}

struct WeightedCoalitions {
  std::vector<CoalitionMask> masks;
  std::vector<double> weights;
  bool sampled = false;
};

void for_each_subset(std::size_t m, std::size_t size, const std::function<void(CoalitionMask)>& visit) {
  // Gosper's hack over m-bit words with `size` bits set.
  if (size == 0 || size > m) return;
  CoalitionMask s = (CoalitionMask{1} << size) - 1;
  const CoalitionMask limit = CoalitionMask{1} << m;
  while (s < limit) {
    visit(s);
    const CoalitionMask c = s & (~s + 1);
    const CoalitionMask r = s + c;
    s = (((r ^ s) >> 2) / c) | r;
  }
}

WeightedCoalitions enumerate_coalitions(std::size_t m) {
  WeightedCoalitions out;
  for (std::size_t size = 1; size < m; ++size) {
    const double w = kernel_weight(m, size);
    for_each_subset(m, size, [&](CoalitionMask s) {
      out.masks.push_back(s);
      out.weights.push_back(w);
    });
  }
  return out;
}

/// Fills whole coalition sizes (smallest and their complements first) while the
/// budget allows, then samples the remaining sizes in complementary pairs.
WeightedCoalitions sample_coalitions(std::size_t m, std::size_t budget, std::uint64_t seed) {
  WeightedCoalitions out;
  out.sampled = true;
  const CoalitionMask full = (CoalitionMask{1} << m) - 1;
  const std::size_t n_sizes = m / 2;  // sizes 1..n_sizes paired with m - size
  std::vector<double> size_weight(n_sizes + 1, 0.0);
  for (std::size_t s = 1; s <= n_sizes; ++s) {
    size_weight[s] = static_cast<double>(m - 1) / (static_cast<double>(s) * static_cast<double>(m - s));
    if (s != m - s) size_weight[s] *= 2.0;
  }
  const double total = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  for (auto& w : size_weight) w /= total;

  double remaining_weight = 1.0;
  std::size_t s = 1;
  for (; s <= n_sizes; ++s) {
    const bool paired = s != m - s;
    const double count = binomial(m, s) * (paired ? 2.0 : 1.0);
    if (static_cast<double>(budget) * size_weight[s] / remaining_weight < count - 1e-9) break;
    const double w = size_weight[s] / count;
    for_each_subset(m, s, [&](CoalitionMask c) {
      out.masks.push_back(c);
      out.weights.push_back(w);
      if (paired) {
        out.masks.push_back(full ^ c);
        out.weights.push_back(w);
      }
    });
    budget -= static_cast<std::size_t>(count);
    remaining_weight -= size_weight[s];
  }
  if (s > n_sizes || budget == 0) return out;

  std::vector<double> rest(size_weight.begin() + static_cast<std::ptrdiff_t>(s), size_weight.end());
  std::discrete_distribution<std::size_t> pick_size(rest.begin(), rest.end());
  Rng rng(derive_seed(seed, "kernel-shap"));
  std::map<CoalitionMask, double> drawn;
  std::vector<std::size_t> order(m);
  double draws = 0.0;
  while (budget > 0) {
    const std::size_t size = s + pick_size(rng);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CoalitionMask c = 0;
    for (std::size_t i = 0; i < size; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, m - i)]);
      c |= CoalitionMask{1} << order[i];
    }
    drawn[c] += 1.0;
    draws += 1.0;
    --budget;
    if (budget > 0) {
      drawn[full ^ c] += 1.0;
      draws += 1.0;
      --budget;
    }
  }
  for (const auto& [c, hits] : drawn) {
    out.masks.push_back(c);
    out.weights.push_back(remaining_weight * hits / draws);
  }
  return out;
}

}  // namespace

Explanation kernel_shap(const Predictor& model, const Vector& instance, const Matrix& background,
                        const KernelShapOptions& options) {
  check_inputs(model, instance, background);
  const std::size_t m = model.arity();
  if (m > kMaxKernelFeatures) fail(ErrorKind::invalid_argument, "kernel SHAP supports at most 62 features");
  const auto names = resolve_names(options.feature_names, m);
  const bool enumerate = m <= options.max_enumerated_features;
  if (!enumerate && options.n_coalitions < m + 2)
    fail(ErrorKind::invalid_argument, "n_coalitions must be at least the feature count plus 2");

  std::vector<std::size_t> players(m);
  std::iota(players.begin(), players.end(), std::size_t{0});
  CoalitionValues values(model, instance, background, players);

  const double fx = model.predict(instance);
  const double base = model.predict_batch(background).mean();
  const double delta = fx - base;

  Vector phi(static_cast<Eigen::Index>(m));
  WeightedCoalitions coalitions;
  if (m == 1) {
    phi(0) = delta;
  } else {
    coalitions = enumerate ? enumerate_coalitions(m) : sample_coalitions(m, options.n_coalitions, options.seed);
    const auto v = values.evaluate(coalitions.masks);

    // Efficiency is imposed by substituting phi_last = delta - sum(others).
    const auto rows = static_cast<Eigen::Index>(coalitions.masks.size());
    const auto free = static_cast<Eigen::Index>(m - 1);
    Matrix design(rows, free);
    Vector target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const CoalitionMask c = coalitions.masks[r];
      const double last = static_cast<double>(c >> (m - 1) & 1U);
      const double sw = std::sqrt(coalitions.weights[r]);
      for (Eigen::Index j = 0; j < free; ++j) design(r, j) = sw * (static_cast<double>(c >> j & 1U) - last);
      target(r) = sw * (v[r] - base - last * delta);
    }
    const Vector head = design.colPivHouseholderQr().solve(target);
    phi.head(free) = head;
    phi(free) = delta - head.sum();
  }

  Explanation e = shapley_explanation(ExplainMethod::kernel_shap, instance, players, phi, names, base, fx);
  e.sampled = coalitions.sampled;
  e.n_evaluations = values.evaluations(coalitions.masks.size()) + static_cast<std::size_t>(background.rows()) + 1;
  return e;
}

Explanation exact_shapley(const Predictor& model, const Vector& instance, const Matrix& background,
                          const std::vector<std::size_t>& features, const std::vector<std::string>& feature_names) {
  check_inputs(model, instance, background);
  std::vector<std::size_t> players = features;
  if (players.empty()) {
    players.resize(model.arity());
    std::iota(players.begin(), players.end(), std::size_t{0});
  }
  if (players.size() > kMaxExactShapleyFeatures)
    fail(ErrorKind::invalid_argument, "exact Shapley enumeration is limited to 12 features, got " +
                                          std::to_string(players.size()));
  std::vector<std::size_t> sorted = players;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "feature subset contains duplicates");
  for (std::size_t p : players) require(p < model.arity(), "feature subset index out of range");
  const auto names = resolve_names(feature_names, model.arity());

  const std::size_t m = players.size();
  const CoalitionMask full = (CoalitionMask{1} << m) - 1;
  std::vector<CoalitionMask> all(full);  // every coalition except the full one
  std::iota(all.begin(), all.end(), CoalitionMask{0});
  CoalitionValues values(model, instance, background, players);
  std::vector<double> v = values.evaluate(all);
  const double fx = model.predict(instance);
  v.push_back(fx);

  std::vector<double> factorial(m + 1, 1.0);
  for (std::size_t k = 1; k <= m; ++k) factorial[k] = factorial[k - 1] * static_cast<double>(k);

  Vector phi = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const CoalitionMask bit = CoalitionMask{1} << i;
    for (CoalitionMask s = 0; s <= full; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      const double weight = factorial[size] * factorial[m - size - 1] / factorial[m];
      phi(static_cast<Eigen::Index>(i)) += weight * (v[s | bit] - v[s]);
    }
  }

  Explanation e = shapley_explanation(ExplainMethod::exact_shapley, instance, players, phi, names, v[0], fx);
  e.n_evaluations = values.evaluations(all.size()) + 1;
  return e;
}

}  // namespace rulx
