#include "gpwave/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "gpwave/errors.hpp"

namespace gpwave {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 78, kRight = 24, kTop = 36, kBottom = 52;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(const std::vector<double>& v, bool log) {
  Axis a;
  a.log = log;
  double lo = a.map(v.front()), hi = lo;
  for (double x : v) {
    lo = std::min(lo, a.map(x));
    hi = std::max(hi, a.map(x));
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = log ? 0.5 : std::max(1.0, std::abs(hi) * 0.1);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

// Tick positions in mapped coordinates with labels.
std::vector<std::pair<double, std::string>> ticks(const Axis& a) {
  std::vector<std::pair<double, std::string>> t;
  if (a.log) {
    for (double k = std::ceil(a.lo); k <= std::floor(a.hi); k += 1.0)
      t.push_back({k, "1e" + fmt("%.0f", k)});
    if (t.size() >= 2) return t;
    t.clear();
    for (int i = 0; i <= 4; ++i) {
      const double m = a.lo + (a.hi - a.lo) * i / 4;
      t.push_back({m, fmt("%.3g", std::pow(10.0, m))});
    }
    return t;
  }
  for (int i = 0; i <= 4; ++i) {
    const double m = a.lo + (a.hi - a.lo) * i / 4;
    t.push_back({m, fmt("%.4g", std::abs(m) < 1e-12 * (a.hi - a.lo) ? 0.0 : m)});
  }
  return t;
}

}  // namespace

PlotKind choose_plot_kind(const Series& s) {
  bool any = false;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
    if (s.x[i] <= 0 || s.y[i] <= 0) return PlotKind::Linear;
    any = true;
  }
  return any ? PlotKind::LogLog : PlotKind::Linear;
}

std::string render_svg(const Series& s, PlotKind kind, const PowerFit* fit) {
  if (s.x.empty()) throw Error(ErrorCode::InvalidArgument, "cannot plot empty series '" + s.name + "'");
  const bool log = kind == PlotKind::LogLog;
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log || (x > 0 && y > 0));
  };

  // group by param in order of first appearance
  std::vector<double> params;
  std::vector<std::vector<std::pair<double, double>>> groups;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!usable(s.x[i], s.y[i])) continue;
    auto it = std::find(params.begin(), params.end(), s.param[i]);
    std::size_t g = it - params.begin();
    if (it == params.end()) {
      params.push_back(s.param[i]);
      groups.emplace_back();
    }
    groups[g].push_back({s.x[i], s.y[i]});
    xs.push_back(s.x[i]);
    ys.push_back(s.y[i]);
  }
  if (xs.empty())
    throw Error(ErrorCode::InvalidArgument, "series '" + s.name + "' has no plottable points");
  if (fit) {
    xs.push_back(fit->x_lo);
    xs.push_back(fit->x_hi);
  }
  const Axis ax = make_axis(xs, log), ay = make_axis(ys, log);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * ax.frac(x); };
  auto py = [&](double y) { return kTop + ph * (1.0 - ay.frac(y)); };

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"white\"/>\n";
  o += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       escape(s.name) + (log ? " (log-log)" : "") + "</text>\n";
  o += "<rect x=\"" + fmt("%.3f", kLeft) + "\" y=\"" + fmt("%.3f", kTop) + "\" width=\"" +
       fmt("%.3f", pw) + "\" height=\"" + fmt("%.3f", ph) +
       "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (const auto& [m, label] : ticks(ax)) {
    const double x = kLeft + pw * (m - ax.lo) / (ax.hi - ax.lo);
    o += "<line x1=\"" + fmt("%.3f", x) + "\" y1=\"" + fmt("%.3f", kTop + ph) + "\" x2=\"" +
         fmt("%.3f", x) + "\" y2=\"" + fmt("%.3f", kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt("%.3f", x) + "\" y=\"" + fmt("%.3f", kTop + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) +
         "</text>\n";
  }
  for (const auto& [m, label] : ticks(ay)) {
    const double y = kTop + ph * (1.0 - (m - ay.lo) / (ay.hi - ay.lo));
    o += "<line x1=\"" + fmt("%.3f", kLeft - 5) + "\" y1=\"" + fmt("%.3f", y) + "\" x2=\"" +
         fmt("%.3f", kLeft) + "\" y2=\"" + fmt("%.3f", y) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt("%.3f", kLeft - 8) + "\" y=\"" + fmt("%.3f", y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) +
         "</text>\n";
  }
  o += "<text x=\"320\" y=\"412\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x</text>\n";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const char* color = kPalette[g % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : groups[g]) {
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.3f", px(x)) + "," + fmt("%.3f", py(y));
    }
    if (groups[g].size() > 1)
      o += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (const auto& [x, y] : groups[g])
      o += "<circle cx=\"" + fmt("%.3f", px(x)) + "\" cy=\"" + fmt("%.3f", py(y)) +
           "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    o += "<text x=\"" + fmt("%.3f", kWidth - kRight - 6) + "\" y=\"" + fmt("%.3f", kTop + 16 + 14.0 * g) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color +
         "\">param = " + fmt("%.4g", params[g]) + "</text>\n";
  }

  if (fit) {
    auto model = [&](double x) { return std::exp(fit->intercept) * std::pow(x, fit->exponent); };
    const double y0 = model(fit->x_lo), y1 = model(fit->x_hi);
    if (usable(fit->x_lo, y0) && usable(fit->x_hi, y1)) {
      std::string pts;
      constexpr int kSegments = 32;
      for (int i = 0; i <= kSegments; ++i) {
        const double f = double(i) / kSegments;
        const double x = log ? std::pow(10.0, std::log10(fit->x_lo) * (1 - f) + std::log10(fit->x_hi) * f)
                             : fit->x_lo * (1 - f) + fit->x_hi * f;
        if (!pts.empty()) pts += ' ';
        pts += fmt("%.3f", px(x)) + "," + fmt("%.3f", py(model(x)));
      }
      o += "<polyline points=\"" + pts +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
    }
    o += "<text x=\"" + fmt("%.3f", kLeft + 8) + "\" y=\"" + fmt("%.3f", kTop + 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\">slope " + fmt("%.2f", fit->exponent) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

void emit_plot(const Series& series, PlotKind kind, const std::string& path,
               const PowerFit* fit) {
  const std::string svg = render_svg(series, kind, fit);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write plot " + path);
  out << svg;
  if (!out) throw Error(ErrorCode::Io, "failed writing plot " + path);
}

}  // namespace gpwave
