#include "rulx/data.hpp"

#include "rulx/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace rulx {
namespace {

constexpr std::size_t kColumns = 2 + kFeatures;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no, std::size_t column) {
  double v = 0.0;
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": field " + std::to_string(column + 1) +
                               " is not a number: '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t parse_positive_int(std::string_view field, std::size_t line_no, std::size_t column) {
  double v = parse_number(field, line_no, column);
  if (v < 1.0 || v != std::floor(v) || v > 9.0e15) {
    fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": field " + std::to_string(column + 1) +
                               " must be a positive integer, got '" + std::string(field) + "'");
  }
  return static_cast<std::int64_t>(v);
}

std::size_t test_count(std::size_t n, double fraction) {
  // The epsilon keeps products like 0.29 * 100 from flooring one short.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  return idx;
}

Split partition(const Dataset& ds, std::vector<std::size_t> test_rows) {
  std::sort(test_rows.begin(), test_rows.end());
  std::vector<std::size_t> train_rows;
  train_rows.reserve(ds.size() - test_rows.size());
  std::size_t t = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (t < test_rows.size() && test_rows[t] == i) {
      ++t;
    } else {
      train_rows.push_back(i);
    }
  }
  if (train_rows.empty() || test_rows.empty()) fail(ErrorKind::invalid_argument, "split leaves an empty partition");
  return {ds.subset(train_rows), ds.subset(test_rows)};
}

}  // namespace

const std::array<std::string, kFeatures>& feature_names() {
  static const std::array<std::string, kFeatures> names = [] {
    std::array<std::string, kFeatures> n;
    for (std::size_t i = 0; i < kOpSettings; ++i) n[i] = "op-setting-" + std::to_string(i + 1);
    for (std::size_t i = 0; i < kSensors; ++i) n[kOpSettings + i] = "sensor-" + std::to_string(i + 1);
    return n;
  }();
  return names;
}

bool Dataset::labeled() const {
  return !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.rul.has_value(); });
}

Matrix Dataset::features() const { return features(Mask(kFeatures, true)); }

Matrix Dataset::features(const Mask& keep) const {
  require(keep.size() == kFeatures, "feature mask must have 24 entries");
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < kFeatures; ++j)
    if (keep[j]) cols.push_back(j);
  Matrix x(records.size(), cols.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t c = 0; c < cols.size(); ++c) x(i, c) = records[i].feature(cols[c]);
  return x;
}

Vector Dataset::targets() const {
  Vector y(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].rul) fail(ErrorKind::data, "record " + std::to_string(i) + " has no RUL label");
    y(i) = *records[i].rul;
  }
  return y;
}

std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> Dataset::units() const {
  std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> groups;
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(records[i].unit_id, groups.size());
    if (inserted) groups.emplace_back(records[i].unit_id, std::vector<std::size_t>{});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.provenance = provenance;
  out.records.reserve(rows.size());
  for (std::size_t r : rows) {
    require(r < records.size(), "row index out of range");
    out.records.push_back(records[r]);
  }
  return out;
}

Dataset parse_cmapss(std::istream& in, std::string provenance) {
  Dataset ds;
  ds.provenance = std::move(provenance);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != kColumns) {
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected 26 fields, found " +
                                 std::to_string(fields.size()));
    }
    CycleRecord r;
    r.unit_id = parse_positive_int(fields[0], line_no, 0);
    r.cycle = parse_positive_int(fields[1], line_no, 1);
    for (std::size_t j = 0; j < kFeatures; ++j) r.feature(j) = parse_number(fields[2 + j], line_no, 2 + j);
    ds.records.push_back(r);
  }
  if (ds.records.empty()) fail(ErrorKind::data, "dataset '" + ds.provenance + "' contains no records");
  return ds;
}

Dataset read_cmapss(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open dataset '" + path + "'");
  return parse_cmapss(in, path);
}

void write_cmapss(std::ostream& out, const Dataset& ds) {
  for (const auto& r : ds.records) {
    out << r.unit_id << ' ' << r.cycle;
    for (std::size_t j = 0; j < kFeatures; ++j) out << ' ' << format_double(r.feature(j));
    out << '\n';
  }
}

void write_csv(std::ostream& out, const Dataset& ds) {
  out << "unit_id,cycle";
  for (const auto& name : feature_names()) out << ',' << name;
  out << ",rul\n";
  for (const auto& r : ds.records) {
    out << r.unit_id << ',' << r.cycle;
    for (std::size_t j = 0; j < kFeatures; ++j) out << ',' << format_double(r.feature(j));
    out << ',';
    if (r.rul) out << format_double(*r.rul);
    out << '\n';
  }
}

Dataset label_rul(Dataset ds, std::optional<double> cap) {
  if (ds.empty()) fail(ErrorKind::data, "cannot label an empty dataset");
  if (cap) require(*cap > 0.0, "RUL cap must be positive");
  std::unordered_map<std::int64_t, std::int64_t> max_cycle;
  for (const auto& r : ds.records) {
    auto& m = max_cycle[r.unit_id];
    m = std::max(m, r.cycle);
  }
  for (auto& r : ds.records) {
    double rul = static_cast<double>(max_cycle[r.unit_id] - r.cycle);
    r.rul = cap ? std::min(*cap, rul) : rul;
  }
  return ds;
}

Split split_rows(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "test fraction must lie in (0, 1)");
  auto idx = shuffled_indices(ds.size(), seed);
  idx.resize(test_count(ds.size(), test_fraction));
  return partition(ds, std::move(idx));
}

Split split_units(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "test fraction must lie in (0, 1)");
  auto groups = ds.units();
  auto order = shuffled_indices(groups.size(), seed);
  std::vector<std::size_t> test_rows;
  for (std::size_t k = 0; k < test_count(groups.size(), test_fraction); ++k) {
    const auto& rows = groups[order[k]].second;
    test_rows.insert(test_rows.end(), rows.begin(), rows.end());
  }
  return partition(ds, std::move(test_rows));
}

Matrix Scaler::transform(const Matrix& x, const std::vector<std::size_t>& columns) const {
  if (static_cast<std::size_t>(x.cols()) != columns.size())
    fail(ErrorKind::invalid_argument, "scaler input has " + std::to_string(x.cols()) + " columns, expected " +
                                          std::to_string(columns.size()));
  Matrix z(x.rows(), x.cols());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::size_t j = columns[c];
    require(j < arity(), "scaler column out of range");
    if (zero_variance[j]) {
      z.col(c).setZero();
    } else {
      z.col(c) = (x.col(c).array() - mean(j)) / std(j);
    }
  }
  return z;
}

Matrix Scaler::transform(const Matrix& x) const {
  std::vector<std::size_t> cols(arity());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return transform(x, cols);
}

Matrix Scaler::inverse(const Matrix& z) const {
  if (static_cast<std::size_t>(z.cols()) != arity())
    fail(ErrorKind::invalid_argument, "scaler inverse arity mismatch");
  Matrix x(z.rows(), z.cols());
  for (std::size_t j = 0; j < arity(); ++j) x.col(j) = z.col(j).array() * std(j) + mean(j);
  return x;
}

Scaler fit_scaler(const Matrix& x) {
  if (x.rows() < 2) fail(ErrorKind::data, "scaler needs at least 2 records");
  Scaler s;
  s.mean = x.colwise().mean().transpose();
  s.std.resize(x.cols());
  s.zero_variance.assign(x.cols(), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) {
      s.std(j) = 0.0;
      s.zero_variance[j] = true;
    } else {
      s.std(j) = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
    }
  }
  return s;
}

Scaler fit_scaler(const Dataset& train) { return fit_scaler(train.features()); }

Dataset apply_scaler(const Scaler& s, const Dataset& ds) {
  if (s.arity() != kFeatures) fail(ErrorKind::invalid_argument, "scaler arity does not match the 24-feature schema");
  Matrix z = s.transform(ds.features());
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < kFeatures; ++j) out.records[i].feature(j) = z(i, j);
  return out;
}

}  // namespace rulx
