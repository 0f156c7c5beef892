#pragma once

#include "rulx/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rulx {

inline constexpr std::size_t kOpSettings = 3;
inline constexpr std::size_t kSensors = 21;
inline constexpr std::size_t kFeatures = kOpSettings + kSensors;

/// op-setting-1..3 followed by sensor-1..21.
const std::array<std::string, kFeatures>& feature_names();

/// Column index of sensor-k (1-based sensor number).
constexpr std::size_t sensor_column(std::size_t sensor) { return kOpSettings + sensor - 1; }

/// One engine-unit observation per cycle.
struct CycleRecord {
  std::int64_t unit_id = 1;
  std::int64_t cycle = 1;
  std::array<double, kOpSettings> op_settings{};
  std::array<double, kSensors> sensors{};
  std::optional<double> rul;

  double feature(std::size_t j) const { return j < kOpSettings ? op_settings[j] : sensors[j - kOpSettings]; }
  double& feature(std::size_t j) { return j < kOpSettings ? op_settings[j] : sensors[j - kOpSettings]; }

  friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

struct Dataset {
  std::vector<CycleRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool labeled() const;

  /// N x 24 feature matrix in canonical column order.
  Matrix features() const;
  /// N x 24 feature matrix restricted to the kept columns.
  Matrix features(const Mask& keep) const;
  /// RUL labels; throws when any record is unlabeled.
  Vector targets() const;
  /// Row indices grouped by unit id, units in first-appearance order.
  std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> units() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Parses whitespace-separated C-MAPSS text: unit, cycle, 3 op settings, 21 sensors.
Dataset parse_cmapss(std::istream& in, std::string provenance = "stream");
Dataset read_cmapss(const std::string& path);

/// Writes the 26-column text form using shortest round-trip decimal formatting.
void write_cmapss(std::ostream& out, const Dataset& ds);
/// CSV with a header of unit_id, cycle, the feature names and rul.
void write_csv(std::ostream& out, const Dataset& ds);

/// rul = max_cycle(unit) - cycle, optionally clamped at cap.
Dataset label_rul(Dataset ds, std::optional<double> cap = std::nullopt);

struct Split {
  Dataset train;
  Dataset test;
};

/// Seeded row-level shuffle; |test| = floor(test_fraction * N). Both halves keep file order.
Split split_rows(const Dataset& ds, double test_fraction, std::uint64_t seed);
/// Unit-level variant: floor(test_fraction * units) whole units go to the test half.
Split split_units(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Per-feature z-score statistics with population standard deviation.
struct Scaler {
  Vector mean;
  Vector std;
  Mask zero_variance;

  std::size_t arity() const { return static_cast<std::size_t>(mean.size()); }

  /// Row-wise z-score of a matrix whose columns are the features in `columns`.
  Matrix transform(const Matrix& x, const std::vector<std::size_t>& columns) const;
  Matrix transform(const Matrix& x) const;
  Matrix inverse(const Matrix& z) const;
};

Scaler fit_scaler(const Dataset& train);
Scaler fit_scaler(const Matrix& x);
Dataset apply_scaler(const Scaler& s, const Dataset& ds);

struct SimulationOptions {
  std::size_t n_units = 100;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;
  /// Sensor numbers (1-based) that drift toward failure.
  std::vector<std::size_t> drift_sensors{2, 3, 4, 7, 8, 9, 11, 12, 13, 14, 15, 17, 20, 21};
  std::size_t min_life = 120;
  std::size_t max_life = 360;
};

/// Synthetic run-to-failure telemetry in the C-MAPSS schema, labeled.
Dataset simulate_degradation(const SimulationOptions& options);
Dataset simulate_degradation(std::size_t n_units, std::uint64_t seed, double noise_scale);

/// Sensors that stay constant in the synthetic generator (and in FD001).
const std::vector<std::size_t>& constant_sensors();

}  // namespace rulx
