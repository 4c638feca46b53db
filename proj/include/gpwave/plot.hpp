#pragma once

#include <string>

#include "gpwave/experiments.hpp"

namespace gpwave {

enum class PlotKind { Linear, LogLog };

// LogLog when every finite point is positive, Linear otherwise.
PlotKind choose_plot_kind(const Series& series);

// Self-contained SVG: one polyline per param value, axes with ticks, and a
// dashed overlay of y = exp(intercept) x^exponent labelled with the slope
// when `fit` is given. Non-finite points (and non-positive ones on log axes)
// are skipped. Output depends only on the arguments.
std::string render_svg(const Series& series, PlotKind kind,
                       const PowerFit* fit = nullptr);

void emit_plot(const Series& series, PlotKind kind, const std::string& path,
               const PowerFit* fit = nullptr);

}  // namespace gpwave
