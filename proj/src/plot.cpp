#include "lingua_adapt/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lingua_adapt/format.hpp"

namespace lingua_adapt {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    return format_number(std::round(v * 1000.0) / 1000.0);
}

} // namespace

std::string line_chart_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0; x_max = 1.0; y_min = 0.0; y_max = 1.0;
    }
    if (x_max == x_min) { x_min -= 0.5; x_max += 0.5; }
    if (y_max == y_min) { y_min -= 0.5; y_max += 0.5; }

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double w = options.width, h = options.height;
    const double pw = w - left - right, ph = h - top - bottom;
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
    auto sy = [&](double y) { return top + ph - (y - y_min) / (y_max - y_min) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
       << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(options.title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";

    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double xv = x_min + (x_max - x_min) * i / kTicks;
        const double yv = y_min + (y_max - y_min) * i / kTicks;
        os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(top + ph + 16)
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">"
           << num(yv) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(h - 10) << "\" text-anchor=\"middle\">"
       << escape(options.x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << num(top + ph / 2) << ")\">" << escape(options.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
        }
        os << "\"/>\n";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"3\" fill=\""
               << color << "\"/>\n";
        }
        const double ly = top + 14.0 * static_cast<double>(k);
        os << "<rect x=\"" << num(left + pw - 130) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
           << color << "\"/>\n";
        os << "<text x=\"" << num(left + pw - 115) << "\" y=\"" << num(ly + 9) << "\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace lingua_adapt
