#include <doctest.h>

#include "rulx/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace rulx;

namespace {

// Splits on whitespace without going through the library parser.
std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

const std::string kLine =
    "1 1 -0.0007 -0.0004 100.0 518.67 641.82 1589.70 1400.60 14.62 21.61 554.36 2388.06 9046.19 1.30 47.47 521.66 "
    "2388.02 8138.62 8.4195 0.03 392 2388 100.00 39.06 23.4190";

Dataset tiny_units() {
  std::string text;
  for (int u = 1; u <= 2; ++u)
    for (int c = 1; c <= (u == 1 ? 10 : 4); ++c) {
      text += std::to_string(u) + " " + std::to_string(c);
      for (int j = 0; j < 24; ++j) text += " " + std::to_string(u * 100 + c + j);
      text += "\n";
    }
  std::istringstream in(text);
  return parse_cmapss(in, "tiny");
}

}  // namespace

TEST_CASE("parse_cmapss reads a 26-field line in field order") {
  std::istringstream in(kLine + "   \n\n");
  const Dataset ds = parse_cmapss(in);
  REQUIRE(ds.size() == 1);
  const auto expected = fields(kLine);
  REQUIRE(expected.size() == 26);
  const CycleRecord& r = ds.records[0];
  CHECK(r.unit_id == 1);
  CHECK(r.cycle == 1);
  for (std::size_t j = 0; j < kFeatures; ++j) CHECK(r.feature(j) == std::stod(expected[j + 2]));
  CHECK_FALSE(r.rul.has_value());
  CHECK_FALSE(ds.labeled());
}

TEST_CASE("parse_cmapss rejects malformed input") {
  SUBCASE("25 fields names the line") {
    std::istringstream in(kLine + "\n" + kLine.substr(0, kLine.rfind(' ')) + "\n");
    try {
      parse_cmapss(in);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric field") {
    std::string bad = kLine;
    bad.replace(bad.find("518.67"), 6, "518.x7");
    std::istringstream in(bad);
    CHECK_THROWS_AS(parse_cmapss(in), Error);
  }
  SUBCASE("empty stream") {
    std::istringstream in("\n  \n");
    try {
      parse_cmapss(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::data);
    }
  }
}

TEST_CASE("interleaved units keep file order and group by unit") {
  std::string a = kLine, b = kLine;
  b[0] = '2';
  std::istringstream in(a + "\n" + b + "\n" + a + "\n");
  const Dataset ds = parse_cmapss(in);
  REQUIRE(ds.size() == 3);
  CHECK(ds.records[0].unit_id == 1);
  CHECK(ds.records[1].unit_id == 2);
  CHECK(ds.records[2].unit_id == 1);
  const auto units = ds.units();
  REQUIRE(units.size() == 2);
  CHECK(units[0].first == 1);
  CHECK(units[0].second == std::vector<std::size_t>{0, 2});
}

TEST_CASE("write_cmapss round-trips field-identically") {
  const Dataset sim = simulate_degradation(100, 11, 1.0);
  std::ostringstream out;
  write_cmapss(out, sim);
  std::istringstream in(out.str());
  const Dataset back = parse_cmapss(in);
  REQUIRE(back.size() == sim.size());
  for (std::size_t i = 0; i < sim.size(); ++i) {
    CycleRecord expected = sim.records[i];
    expected.rul.reset();
    REQUIRE(back.records[i] == expected);
  }
}

TEST_CASE("label_rul follows max_cycle minus cycle") {
  const Dataset ds = label_rul(tiny_units());
  CHECK(ds.records[0].rul == 9.0);   // unit 1, cycle 1, max 10
  CHECK(ds.records[9].rul == 0.0);   // unit 1, cycle 10
  CHECK(ds.records[10].rul == 3.0);  // unit 2, cycle 1, max 4
  const Dataset capped = label_rul(tiny_units(), 5.0);
  CHECK(capped.records[0].rul == 5.0);
  CHECK(capped.records[7].rul == 2.0);
  CHECK(label_rul(ds).records == ds.records);  // idempotent
  for (std::size_t i = 1; i < 10; ++i) CHECK(*ds.records[i].rul < *ds.records[i - 1].rul);
  CHECK_THROWS_AS(label_rul(Dataset{}), Error);
}

TEST_CASE("split_rows uses the floor rule and partitions exactly") {
  Dataset big;
  for (std::size_t i = 0; i < 20631; ++i) {
    CycleRecord r;
    r.cycle = static_cast<std::int64_t>(i + 1);
    r.rul = 0.0;
    big.records.push_back(r);
  }
  const Split s = split_rows(big, 0.2, 7);
  CHECK(s.test.size() == 4126);
  CHECK(s.train.size() == 16505);

  std::set<std::int64_t> seen;
  for (const auto* part : {&s.train, &s.test}) {
    for (std::size_t i = 1; i < part->size(); ++i) CHECK(part->records[i - 1].cycle < part->records[i].cycle);
    for (const auto& r : part->records) CHECK(seen.insert(r.cycle).second);
  }
  CHECK(seen.size() == big.size());

  const Split again = split_rows(big, 0.2, 7);
  CHECK(again.test.records == s.test.records);
  CHECK(split_rows(big, 0.2, 8).test.records != s.test.records);

  Dataset ten;
  ten.records.assign(10, CycleRecord{});
  CHECK(split_rows(ten, 0.2, 1).test.size() == 2);
  CHECK(split_rows(ten, 0.2, 1).train.size() == 8);
  CHECK_THROWS_AS(split_rows(ten, 0.0, 1), Error);
  CHECK_THROWS_AS(split_rows(ten, 1.0, 1), Error);
}

TEST_CASE("split_units keeps each unit on one side") {
  const Dataset ds = simulate_degradation(10, 4, 1.0);
  const Split s = split_units(ds, 0.2, 3);
  std::set<std::int64_t> train_units, test_units;
  for (const auto& r : s.train.records) train_units.insert(r.unit_id);
  for (const auto& r : s.test.records) test_units.insert(r.unit_id);
  CHECK(test_units.size() == 2);
  for (auto u : test_units) CHECK(train_units.count(u) == 0);
  CHECK(s.train.size() + s.test.size() == ds.size());
}

TEST_CASE("scaler uses the population convention") {
  Matrix x(2, 2);
  x << 1, 5, 3, 5;
  const Scaler s = fit_scaler(x);
  CHECK(s.mean(0) == 2.0);
  CHECK(s.std(0) == 1.0);
  CHECK(s.zero_variance[1]);
  CHECK_FALSE(s.zero_variance[0]);
  Matrix probe(2, 2);
  probe << 2, 5, 3, 7;
  const Matrix z = s.transform(probe);
  CHECK(z(0, 0) == 0.0);
  CHECK(z(1, 0) == 1.0);
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 1) == 0.0);
  CHECK_THROWS_AS(fit_scaler(Matrix(1, 2)), Error);
}

TEST_CASE("scaled training set has zero mean and unit std") {
  const Dataset ds = simulate_degradation(5, 2, 1.0);
  const Scaler s = fit_scaler(ds);
  const Dataset scaled = apply_scaler(s, ds);
  const Matrix z = scaled.features();
  const Matrix x = ds.features();
  for (std::size_t j = 0; j < kFeatures; ++j) {
    // independent column statistics
    double mean = 0.0, var = 0.0;
    const auto n = static_cast<double>(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) mean += z(i, j);
    mean /= n;
    for (Eigen::Index i = 0; i < z.rows(); ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    const double sd = std::sqrt(var / n);
    CHECK(std::abs(mean) < 1e-9);
    if (s.zero_variance[j]) {
      CHECK(z.col(j).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(std::abs(sd - 1.0) < 1e-9);
      const Matrix back = s.inverse(z);
      CHECK((back.col(j) - x.col(j)).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, x.col(j).cwiseAbs().maxCoeff()));
    }
  }
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(scaled.records[i].rul == ds.records[i].rul);
}

TEST_CASE("simulator output shape and labels") {
  const Dataset ds = simulate_degradation(100, 5, 1.0);
  std::map<std::int64_t, std::int64_t> life;
  for (const auto& r : ds.records) life[r.unit_id] = std::max(life[r.unit_id], r.cycle);
  CHECK(life.size() == 100);
  std::size_t total = 0;
  for (auto [u, l] : life) {
    CHECK(l >= 120);
    CHECK(l <= 360);
    total += static_cast<std::size_t>(l);
  }
  CHECK(ds.size() == total);
  for (const auto& r : ds.records) CHECK(*r.rul == static_cast<double>(life[r.unit_id] - r.cycle));

  std::ostringstream text;
  write_cmapss(text, ds);
  std::istringstream lines(text.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    REQUIRE(fields(line).size() == 26);
  }
  CHECK(count == total);
}

TEST_CASE("simulator flags FD001-style constant sensors") {
  const Dataset ds = simulate_degradation(20, 9, 1.0);
  const Scaler s = fit_scaler(ds);
  for (std::size_t sensor : constant_sensors()) CHECK(s.zero_variance[sensor_column(sensor)]);
  CHECK(s.zero_variance[sensor_column(1)]);
  CHECK(ds.records[0].sensors[0] == 518.67);
  CHECK_FALSE(s.zero_variance[sensor_column(11)]);
}

TEST_CASE("simulator is seeded") {
  CHECK(simulate_degradation(3, 21, 1.0).records == simulate_degradation(3, 21, 1.0).records);
  CHECK(simulate_degradation(3, 21, 1.0).records != simulate_degradation(3, 22, 1.0).records);
}

TEST_CASE("noise-free drift sensors are strictly monotone") {
  SimulationOptions o;
  o.n_units = 1;
  o.seed = 3;
  o.noise_scale = 0.0;
  const Dataset ds = simulate_degradation(o);
  for (std::size_t sensor : o.drift_sensors) {
    const std::size_t col = sensor_column(sensor);
    const double first = ds.records[1].feature(col) - ds.records[0].feature(col);
    REQUIRE(first != 0.0);
    for (std::size_t i = 1; i < ds.size(); ++i) {
      const double step = ds.records[i].feature(col) - ds.records[i - 1].feature(col);
      CHECK(step * first > 0.0);
    }
  }
}

TEST_CASE("csv output has a header and one line per record") {
  const Dataset ds = label_rul(tiny_units());
  std::ostringstream out;
  write_csv(out, ds);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("unit_id,cycle,op-setting-1", 0) == 0);
  CHECK(header.substr(header.size() - 4) == ",rul");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == ds.size());
}
