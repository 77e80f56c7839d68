#ifndef DPCOOP_SVG_HPP
#define DPCOOP_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace dpcoop::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

namespace detail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}
}  // namespace detail

// Static line chart with a legend. Non-finite points break a line.
inline std::string render(const LineChart& chart) {
  using detail::num;
  const double W = 720, H = 480, left = 70, right = 190, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  const double xr = chart.x_max > chart.x_min ? chart.x_max - chart.x_min : 1.0;
  const double yr = chart.y_max > chart.y_min ? chart.y_max - chart.y_min : 1.0;
  auto sx = [&](double x) { return left + (x - chart.x_min) / xr * pw; };
  auto sy = [&](double y) { return top + ph - (y - chart.y_min) / yr * ph; };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left) + "\" y=\"24\" font-size=\"15\">" + detail::escape(chart.title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = chart.x_min + xr * i / 5, fy = chart.y_min + yr * i / 5;
    s += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" + num(fx) +
         "</text>\n";
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(sy(fy) + 4) + "\" text-anchor=\"end\">" + num(fy) +
         "</text>\n";
  }
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 16) + "\" text-anchor=\"middle\">" +
       detail::escape(chart.x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       detail::escape(chart.y_label) + "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& ser = chart.series[k];
    const std::string color = palette[k % 10];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) {
        pen = false;
        continue;
      }
      path += (pen ? " L " : " M ") + num(sx(ser.x[i])) + " " + num(sy(ser.y[i]));
      pen = true;
    }
    s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\"" +
         (ser.dashed ? " stroke-dasharray=\"5,4\"" : "") + "/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    s += "<line x1=\"" + num(left + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 32) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(left + pw + 38) + "\" y=\"" + num(ly + 4) + "\">" + detail::escape(ser.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace dpcoop::svg

#endif  // DPCOOP_SVG_HPP
