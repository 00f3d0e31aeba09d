#include "report_svg.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

namespace vsum::cli {

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  if (!(span > 0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / span;
  return out;
}

namespace {

constexpr double kWidth = 960;
constexpr double kPanelHeight = 160;
constexpr double kMargin = 30;

void append(std::string& s, const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  s += buf;
}

std::string escape(const std::string& in) {
  std::string out;
  for (char c : in) {
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

void render_panel(std::string& svg, const TraceInput& in, const TracePanel& panel, double top, bool highlight) {
  const std::size_t n = panel.values.size();
  const auto norm = min_max_normalize(panel.values);
  const double plot_w = kWidth - 2 * kMargin;
  const double bar_w = n ? plot_w / static_cast<double>(n) : 0.0;
  const double base = top + kPanelHeight;
  append(svg, "<text x=\"%g\" y=\"%g\" font-size=\"12\" font-family=\"sans-serif\">%s</text>\n", kMargin, top - 6,
         escape(panel.title).c_str());
  // Shot bands: alternate shading per shot index.
  for (std::size_t t = 0; t < n && t < in.shots.size();) {
    std::size_t end = t + 1;
    while (end < n && end < in.shots.size() && in.shots[end] == in.shots[t]) ++end;
    if (in.shots[t] >= 0 && in.shots[t] % 2 == 1) {
      append(svg, "<rect x=\"%.3f\" y=\"%g\" width=\"%.3f\" height=\"%g\" fill=\"#eeeeee\"/>\n",
             kMargin + bar_w * static_cast<double>(t), top, bar_w * static_cast<double>(end - t), kPanelHeight);
    }
    t = end;
  }
  for (std::size_t t = 0; t < n; ++t) {
    const bool sel = highlight && t < in.selected.size() && in.selected[t];
    const double h = norm[t] * kPanelHeight;
    append(svg, "<rect class=\"bar%s\" x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n",
           sel ? " selected" : "", kMargin + bar_w * static_cast<double>(t), base - h, bar_w, h,
           sel ? "#d9480f" : "#4c6ef5");
  }
  append(svg, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#333\"/>\n", kMargin, base, kWidth - kMargin, base);
}

}  // namespace

std::string render_trace_svg(const TraceInput& in) {
  const int panels = in.reference ? 2 : 1;
  const double height = panels * (kPanelHeight + 2 * kMargin) + kMargin;
  std::string svg;
  append(svg, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", kWidth,
         height, kWidth, height);
  append(svg, "<title>%s</title>\n", escape(in.video_id).c_str());
  append(svg, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", kWidth, height);
  render_panel(svg, in, in.scores, 2 * kMargin, true);
  if (in.reference) render_panel(svg, in, *in.reference, 2 * kMargin + kPanelHeight + 2 * kMargin, false);
  svg += "</svg>\n";
  return svg;
}

std::string render_trace_csv(const TraceInput& in) {
  const auto scores = min_max_normalize(in.scores.values);
  std::vector<double> ref;
  if (in.reference) ref = min_max_normalize(in.reference->values);
  std::string out = in.reference ? "frame_index,score_normalized,shot_index,selected,reference_normalized\n"
                                 : "frame_index,score_normalized,shot_index,selected\n";
  for (std::size_t t = 0; t < scores.size(); ++t) {
    const long long shot = t < in.shots.size() ? static_cast<long long>(in.shots[t]) : -1;
    const int sel = t < in.selected.size() ? in.selected[t] : 0;
    append(out, "%zu,%.17g,%lld,%d", t, scores[t], shot, sel);
    if (in.reference) append(out, ",%.17g", t < ref.size() ? ref[t] : 0.0);
    out += "\n";
  }
  return out;
}

}  // namespace vsum::cli
