#include "rulx/data.hpp"
#include "rulx/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rulx {
namespace {

struct ChannelModel {
  double base;
  double drift;  // signed change from healthy to failure
  double noise;  // standard deviation at noise_scale = 1
  int decimals;
};

// Index 0..2 are the operational settings, 3..23 the sensors. Levels follow FD001.
const std::array<ChannelModel, kFeatures>& channel_models() {
  static const std::array<ChannelModel, kFeatures> models{{
      {0.0, 0.0, 0.0022, 4},
      {0.0, 0.0, 0.0003, 4},
      {100.0, 0.0, 0.0, 1},
      {518.67, 2.0, 0.0, 2},
      {642.15, 0.9, 0.35, 2},
      {1580.0, 25.0, 5.0, 2},
      {1398.0, 32.0, 6.5, 2},
      {14.62, 0.2, 0.0, 2},
      {21.61, 0.02, 0.0014, 2},
      {554.6, -3.0, 0.65, 2},
      {2388.02, 0.25, 0.05, 2},
      {9040.0, 50.0, 15.0, 2},
      {1.3, 0.05, 0.0, 2},
      {47.25, 1.2, 0.18, 2},
      {522.2, -2.8, 0.5, 2},
      {2388.03, 0.25, 0.05, 2},
      {8130.0, 40.0, 12.0, 2},
      {8.41, 0.12, 0.025, 4},
      {0.03, 0.005, 0.0, 2},
      {391.0, 6.0, 1.3, 2},
      {2388.0, 5.0, 0.0, 0},
      {100.0, 2.0, 0.0, 2},
      {38.95, -0.6, 0.13, 2},
      {23.37, -0.35, 0.08, 4},
  }};
  return models;
}

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

}  // namespace

const std::vector<std::size_t>& constant_sensors() {
  static const std::vector<std::size_t> sensors{1, 5, 10, 16, 18, 19};
  return sensors;
}

Dataset simulate_degradation(const SimulationOptions& options) {
  require(options.n_units >= 1, "simulation needs at least one unit");
  require(options.noise_scale >= 0.0 && std::isfinite(options.noise_scale), "noise scale must be non-negative");
  require(options.min_life >= 2 && options.min_life <= options.max_life, "invalid lifetime range");
  for (std::size_t s : options.drift_sensors) require(s >= 1 && s <= kSensors, "drift sensor out of range");

  const auto& models = channel_models();
  std::array<bool, kFeatures> drifting{};
  for (std::size_t s : options.drift_sensors) drifting[sensor_column(s)] = true;

  // Every per-cycle drift increment must survive rounding for zero-noise runs to stay strictly monotone.
  std::array<int, kFeatures> decimals{};
  for (std::size_t j = 0; j < kFeatures; ++j) {
    decimals[j] = models[j].decimals;
    if (drifting[j]) {
      const double min_step = 0.3 * std::abs(models[j].drift) / static_cast<double>(options.max_life);
      decimals[j] = std::max(decimals[j], static_cast<int>(std::ceil(-std::log10(min_step))) + 1);
    }
  }

  Dataset ds;
  std::ostringstream prov;
  prov << "synthetic(units=" << options.n_units << ",seed=" << options.seed << ",noise=" << options.noise_scale << ")";
  ds.provenance = prov.str();

  Rng rng(derive_seed(options.seed, "simulate"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit_interval(0.0, 1.0);

  for (std::size_t u = 0; u < options.n_units; ++u) {
    const std::size_t life = options.min_life + uniform_index(rng, options.max_life - options.min_life + 1);
    const double curvature = 2.5 + 2.0 * unit_interval(rng);
    std::array<double, kFeatures> offset{};
    for (std::size_t j = 0; j < kFeatures; ++j) offset[j] = options.noise_scale * models[j].noise * gauss(rng);

    for (std::size_t t = 1; t <= life; ++t) {
      const double frac = static_cast<double>(t) / static_cast<double>(life);
      const double wear = 0.3 * frac + 0.7 * std::expm1(curvature * frac) / std::expm1(curvature);
      CycleRecord r;
      r.unit_id = static_cast<std::int64_t>(u + 1);
      r.cycle = static_cast<std::int64_t>(t);
      for (std::size_t j = 0; j < kFeatures; ++j) {
        const auto& m = models[j];
        const bool constant = !drifting[j] && m.noise == 0.0;
        double v = m.base;
        if (!constant) {
          v += offset[j] + options.noise_scale * m.noise * gauss(rng);
          if (drifting[j]) v += m.drift * wear;
        }
        r.feature(j) = round_to(v, decimals[j]);
      }
      r.rul = static_cast<double>(life - t);
      ds.records.push_back(r);
    }
  }
  return ds;
}

Dataset simulate_degradation(std::size_t n_units, std::uint64_t seed, double noise_scale) {
  SimulationOptions options;
  options.n_units = n_units;
  options.seed = seed;
  options.noise_scale = noise_scale;
  return simulate_degradation(options);
}

}  // namespace rulx
