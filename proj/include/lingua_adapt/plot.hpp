#pragma once

#include <string>
#include <vector>

namespace lingua_adapt {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 400;
};

/// Standalone SVG line chart with axes, tick labels and a legend.
std::string line_chart_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

} // namespace lingua_adapt
