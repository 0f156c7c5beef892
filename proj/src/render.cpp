#include "rulx/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rulx {
namespace {

constexpr const char* kIncrease = "#d62728";
constexpr const char* kDecrease = "#1f77b4";

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string signed_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.4f", v);
  return buf;
}

std::string heading(const Explanation& e) {
  return method_tag(e.method) + " | predicted " + format_value(e.predicted_value) + " | base value " +
         format_value(e.base_value);
}

std::string render_bar(const Explanation& e) {
  const double label_w = 300.0, plot_w = 440.0, value_w = 90.0, row_h = 28.0, top = 48.0;
  const double width = label_w + plot_w + value_w;
  const double height = top + row_h * static_cast<double>(e.contributions.size()) + 20.0;
  const double axis = label_w + plot_w / 2.0;
  double largest = 0.0;
  for (const auto& c : e.contributions) largest = std::max(largest, std::abs(c.value));
  const double scale = largest > 0.0 ? (plot_w / 2.0 - 10.0) / largest : 0.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"20\" font-size=\"14\">" << xml_escape(heading(e)) << "</text>\n";
  svg << "<line x1=\"" << px(axis) << "\" y1=\"" << px(top - 8) << "\" x2=\"" << px(axis) << "\" y2=\""
      << px(height - 12) << "\" stroke=\"#444\"/>\n";
  double y = top;
  for (const auto& c : e.contributions) {
    const double len = std::abs(c.value) * scale;
    const bool up = c.value >= 0.0;
    const double x0 = up ? axis : axis - len;
    svg << "<text x=\"" << px(label_w - 8) << "\" y=\"" << px(y + 14) << "\" text-anchor=\"end\">"
        << xml_escape(c.condition) << "</text>\n";
    svg << "<rect class=\"" << (up ? "increase" : "decrease") << "\" x=\"" << px(x0) << "\" y=\"" << px(y + 3)
        << "\" width=\"" << px(len) << "\" height=\"" << px(row_h - 8) << "\" fill=\"" << (up ? kIncrease : kDecrease)
        << "\"/>\n";
    svg << "<text x=\"" << px(label_w + plot_w + 6) << "\" y=\"" << px(y + 14) << "\">" << signed_value(c.value)
        << "</text>\n";
    y += row_h;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_force(const Explanation& e) {
  const double width = 900.0, margin = 40.0, axis_y = 90.0;
  const ForceLayout layout = layout_force(e, width - 2 * margin);
  const auto to_px = [&](double v) { return margin + (v - layout.axis_min) * layout.px_per_unit; };
  const double height = axis_y + 50.0 + 22.0 * static_cast<double>(layout.arrows.size());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"20\" font-size=\"14\">" << xml_escape(heading(e)) << "</text>\n";
  svg << "<line x1=\"" << px(margin) << "\" y1=\"" << px(axis_y) << "\" x2=\"" << px(width - margin) << "\" y2=\""
      << px(axis_y) << "\" stroke=\"#888\"/>\n";

  const double base_x = to_px(e.base_value);
  svg << "<line class=\"base\" x1=\"" << px(base_x) << "\" y1=\"" << px(axis_y - 30) << "\" x2=\"" << px(base_x)
      << "\" y2=\"" << px(axis_y + 8) << "\" stroke=\"#444\" stroke-dasharray=\"4 2\"/>\n";
  svg << "<text x=\"" << px(base_x) << "\" y=\"" << px(axis_y + 22) << "\" text-anchor=\"middle\">base value "
      << format_value(e.base_value) << "</text>\n";

  double row = axis_y + 44;
  for (const auto& a : layout.arrows) {
    const auto& c = e.contributions[a.contribution];
    const double x0 = to_px(a.from), x1 = to_px(a.to);
    const double head = std::min(6.0, std::abs(x1 - x0));
    const double dir = a.increases ? 1.0 : -1.0;
    const char* color = a.increases ? kIncrease : kDecrease;
    svg << "<g class=\"arrow " << (a.increases ? "increase" : "decrease") << "\" data-length=\"" << px(a.length_px)
        << "\">";
    svg << "<polygon points=\"" << px(x0) << "," << px(row - 5) << " " << px(x1 - dir * head) << "," << px(row - 5)
        << " " << px(x1) << "," << px(row) << " " << px(x1 - dir * head) << "," << px(row + 5) << " " << px(x0) << ","
        << px(row + 5) << "\" fill=\"" << color << "\"/>";
    svg << "<text x=\"" << px(std::max(x0, x1) + 4) << "\" y=\"" << px(row + 4) << "\" fill=\"" << color << "\">"
        << xml_escape(c.condition) << "</text></g>\n";
    row += 22.0;
  }

  const double end_x = to_px(e.predicted_value);
  svg << "<line class=\"prediction\" x1=\"" << px(end_x) << "\" y1=\"" << px(axis_y - 40) << "\" x2=\"" << px(end_x)
      << "\" y2=\"" << px(height - 8) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  svg << "<text class=\"prediction-label\" x=\"" << px(end_x) << "\" y=\"" << px(axis_y - 46)
      << "\" text-anchor=\"middle\" font-weight=\"bold\">f(x) = " << format_value(e.predicted_value) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string render_text(const Explanation& e) {
  std::ostringstream out;
  out << "method: " << method_tag(e.method) << '\n';
  out << "predicted value: " << format_value(e.predicted_value) << '\n';
  out << "base value: " << format_value(e.base_value) << '\n';
  if (e.method == ExplainMethod::lime)
    out << "surrogate weighted R^2: " << (e.r2_defined ? format_value(e.r2) : std::string("undefined")) << '\n';
  out << "contributions:\n";
  for (const auto& c : e.contributions) out << "  " << signed_value(c.value) << "  " << c.condition << '\n';
  return out.str();
}

}  // namespace

RenderStyle parse_style(std::string_view name) {
  if (name == "bar") return RenderStyle::bar;
  if (name == "force") return RenderStyle::force;
  if (name == "text") return RenderStyle::text;
  fail(ErrorKind::invalid_argument, "unknown render style '" + std::string(name) + "' (expected bar, force, text)");
}

ForceLayout layout_force(const Explanation& e, double width_px) {
  ForceLayout layout;
  std::vector<std::size_t> ups, downs;
  for (std::size_t i = 0; i < e.contributions.size(); ++i) {
    if (e.contributions[i].value > 0.0) ups.push_back(i);
    if (e.contributions[i].value < 0.0) downs.push_back(i);
  }
  double cursor = e.base_value;
  double lo = std::min(e.base_value, e.predicted_value);
  double hi = std::max(e.base_value, e.predicted_value);
  for (const auto* group : {&ups, &downs}) {
    for (std::size_t i : *group) {
      const double v = e.contributions[i].value;
      layout.arrows.push_back({i, cursor, cursor + v, 0.0, v > 0.0});
      cursor += v;
      lo = std::min(lo, cursor);
      hi = std::max(hi, cursor);
    }
  }
  double span = hi - lo;
  if (!(span > 0.0)) span = std::max(1.0, std::abs(e.base_value));
  layout.axis_min = lo - 0.05 * span;
  layout.axis_max = hi + 0.05 * span;
  layout.px_per_unit = width_px / (layout.axis_max - layout.axis_min);
  for (auto& a : layout.arrows) a.length_px = std::abs(a.to - a.from) * layout.px_per_unit;
  return layout;
}

std::string render_explanation(const Explanation& e, RenderStyle style) {
  switch (style) {
    case RenderStyle::bar: return render_bar(e);
    case RenderStyle::force: return render_force(e);
    case RenderStyle::text: return render_text(e);
  }
  return {};
}

}  // namespace rulx
