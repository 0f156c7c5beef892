#include <doctest.h>

#include "rulx/explain.hpp"

#include <regex>

using namespace rulx;

namespace {

Explanation sample() {
  Explanation e;
  e.method = ExplainMethod::kernel_shap;
  e.base_value = 100.0;
  e.contributions = {
      {"sensor-11", "sensor-11 = 47.47", -30.0, 47.47, 14},
      {"sensor-4", "sensor-4 = 1400.6", 12.5, 1400.6, 6},
      {"sensor-9", "sensor-9 = 9046.19", 0.0, 9046.19, 11},
      {"sensor-7", "sensor-7 = 554.36", 5.0, 554.36, 9},
  };
  e.predicted_value = e.base_value + e.total_contribution();
  return e;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("force layout stacks increases then decreases from the base") {
  const Explanation e = sample();
  const ForceLayout layout = layout_force(e, 800.0);
  REQUIRE(layout.arrows.size() == 3);  // the zero contribution has no arrow
  CHECK(layout.arrows[0].increases);
  CHECK(layout.arrows[1].increases);
  CHECK_FALSE(layout.arrows[2].increases);
  CHECK(layout.arrows[0].from == e.base_value);
  for (std::size_t i = 1; i < layout.arrows.size(); ++i) CHECK(layout.arrows[i].from == layout.arrows[i - 1].to);
  CHECK(layout.arrows.back().to == doctest::Approx(e.predicted_value));
  for (const auto& a : layout.arrows) {
    const double v = e.contributions[a.contribution].value;
    CHECK(a.length_px == doctest::Approx(std::abs(v) * layout.px_per_unit));
  }
  CHECK(layout.axis_min <= std::min(e.base_value, e.predicted_value));
  CHECK(layout.axis_max >= e.base_value + 17.5);
  CHECK((layout.axis_max - layout.axis_min) * layout.px_per_unit == doctest::Approx(800.0));
}

TEST_CASE("force plot SVG") {
  const std::string svg = render_explanation(sample(), RenderStyle::force);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count(svg, "class=\"arrow increase\"") == 2);
  CHECK(count(svg, "class=\"arrow decrease\"") == 1);
  CHECK(svg.find("f(x) = 87.5") != std::string::npos);
  CHECK(svg.find("base value 100") != std::string::npos);
}

TEST_CASE("bar chart colours follow the sign") {
  const std::string svg = render_explanation(sample(), RenderStyle::bar);
  CHECK(count(svg, "<rect class=\"increase\"") == 3);  // zero counts as non-negative
  CHECK(count(svg, "<rect class=\"decrease\"") == 1);
  const std::regex red("class=\"increase\"[^>]*fill=\"#d62728\"");
  const std::regex blue("class=\"decrease\"[^>]*fill=\"#1f77b4\"");
  CHECK(std::regex_search(svg, red));
  CHECK(std::regex_search(svg, blue));
  CHECK(svg.find("sensor-4 = 1400.6") != std::string::npos);
}

TEST_CASE("bar widths are proportional to the contributions") {
  const std::string svg = render_explanation(sample(), RenderStyle::bar);
  const std::regex width("<rect class=\"[a-z]+\" x=\"[0-9.]+\" y=\"[0-9.]+\" width=\"([0-9.]+)\"");
  std::vector<double> widths;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), width); it != std::sregex_iterator(); ++it)
    widths.push_back(std::stod((*it)[1]));
  REQUIRE(widths.size() == 4);
  CHECK(widths[1] / widths[0] == doctest::Approx(12.5 / 30.0).epsilon(1e-3));
  CHECK(widths[2] == 0.0);
}

TEST_CASE("LIME conditions are escaped in SVG and kept raw in text") {
  Explanation e;
  e.method = ExplainMethod::lime;
  e.contributions = {{"sensor-1", "sensor-1 <= 518.67", 1.0, 518.67, 3}, {"x", "1 < x <= 2 & more", -1.0, 1.5, 4}};
  e.r2 = 0.875;
  e.r2_defined = true;
  const std::string svg = render_explanation(e, RenderStyle::bar);
  CHECK(svg.find("sensor-1 &lt;= 518.67") != std::string::npos);
  CHECK(svg.find("1 &lt; x &lt;= 2 &amp; more") != std::string::npos);
  CHECK(svg.find("<= 518") == std::string::npos);
  const std::string text = render_explanation(e, RenderStyle::text);
  CHECK(text.find("+1.0000  sensor-1 <= 518.67") != std::string::npos);
  CHECK(text.find("surrogate weighted R^2: 0.875") != std::string::npos);
}

TEST_CASE("text rendering keeps the contribution order") {
  const std::string text = render_explanation(sample(), RenderStyle::text);
  const auto a = text.find("sensor-11"), b = text.find("sensor-4"), c = text.find("sensor-7");
  CHECK(a < b);
  CHECK(b < c);
  CHECK(text.find("predicted value: 87.5") != std::string::npos);
  CHECK(text.find("-30.0000") != std::string::npos);
}

TEST_CASE("style names") {
  CHECK(parse_style("bar") == RenderStyle::bar);
  CHECK(parse_style("force") == RenderStyle::force);
  CHECK(parse_style("text") == RenderStyle::text);
  CHECK_THROWS_AS(parse_style("pie"), Error);
}

TEST_CASE("all-zero explanation still renders") {
  Explanation e;
  e.base_value = e.predicted_value = 5.0;
  e.contributions = {{"a", "a = 1", 0.0, 1.0, 0}};
  CHECK(layout_force(e, 100).arrows.empty());
  CHECK_NOTHROW(render_explanation(e, RenderStyle::force));
  CHECK_NOTHROW(render_explanation(e, RenderStyle::bar));
}
