#pragma once

// Slow, independent reference computations used to check the library.
// Nothing here calls into rulx solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Row = std::vector<double>;
using Table = std::vector<Row>;

inline double sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Tries every midpoint between distinct values of every feature and keeps the
// largest SSE reduction (first found wins ties: lowest feature, lowest threshold).
inline Split best_split(const Table& x, const std::vector<double>& y, std::size_t min_leaf) {
  Split best;
  const double parent = sse(y);
  const std::size_t m = x.empty() ? 0 : x[0].size();
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> vals;
    for (const auto& r : x) vals.push_back(r[j]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double t = 0.5 * (vals[k] + vals[k + 1]);
      std::vector<double> l, r;
      for (std::size_t i = 0; i < x.size(); ++i) (x[i][j] <= t ? l : r).push_back(y[i]);
      if (l.size() < min_leaf || r.size() < min_leaf) continue;
      const double gain = parent - sse(l) - sse(r);
      if (gain > best.gain + 1e-9 * std::max(1.0, parent)) best = {static_cast<int>(j), t, gain};
    }
  }
  return best;
}

// Solves A z = b by Gauss-Jordan elimination with partial pivoting.
inline std::vector<double> solve(Table a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return b;
}

// Ordinary least squares with an intercept via the normal equations.
// Returns the weights followed by the intercept.
inline std::vector<double> least_squares(const Table& x, const std::vector<double>& y) {
  const std::size_t m = x[0].size() + 1;
  Table ata(m, Row(m, 0.0));
  std::vector<double> aty(m, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Row a = x[i];
    a.push_back(1.0);
    for (std::size_t p = 0; p < m; ++p) {
      aty[p] += a[p] * y[i];
      for (std::size_t q = 0; q < m; ++q) ata[p][q] += a[p] * a[q];
    }
  }
  return solve(ata, aty);
}

inline double mean_squared(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double mean_absolute(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Central differences of f at p.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> p, double h = 1e-6) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Shapley values by averaging marginal contributions over every ordering of
// the players. value(in) gets a flag per player.
inline std::vector<double> shapley_by_permutations(std::size_t players,
                                                   const std::function<double(const std::vector<bool>&)>& value) {
  std::vector<std::size_t> order(players);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(players, 0.0);
  double count = 0.0;
  do {
    std::vector<bool> in(players, false);
    double prev = value(in);
    for (std::size_t p : order) {
      in[p] = true;
      const double next = value(in);
      phi[p] += next - prev;
      prev = next;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= count;
  return phi;
}

// Interventional coalition value: players in the coalition take the instance's
// value, the others are averaged over background rows.
inline double coalition_value(const std::function<double(const Row&)>& f, const Row& instance, const Table& background,
                              const std::vector<std::size_t>& players, const std::vector<bool>& in) {
  double total = 0.0;
  for (const auto& b : background) {
    Row z = instance;
    for (std::size_t p = 0; p < players.size(); ++p)
      if (!in[p]) z[players[p]] = b[players[p]];
    total += f(z);
  }
  return total / static_cast<double>(background.size());
}

}  // namespace oracle
