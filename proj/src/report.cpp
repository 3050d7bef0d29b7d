#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lingua_adapt/error.hpp"
#include "lingua_adapt/format.hpp"
#include "lingua_adapt/metrics.hpp"

namespace lingua_adapt {

std::string format_number(double value) {
    // Round away binary noise from decimal inputs (e.g. 62.18 - 73.19).
    const double rounded = std::round(value * 1e10) / 1e10;
    const double v = (rounded == 0.0) ? 0.0 : rounded;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double tidy(double value) {
    const double rounded = std::round(value * 1e10) / 1e10;
    return rounded == 0.0 ? 0.0 : rounded;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : report.metrics) {
        if (!std::isfinite(value)) {
            fail(ErrorCode::NonFiniteValue, "metric '" + name + "' is not finite");
        }
        j["metrics"][name] = value;
    }
    j["meta"] = report.meta;
    return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    try {
        for (const auto& [name, value] : j.at("metrics").items()) {
            r.metrics[name] = value.get<double>();
        }
        if (j.contains("meta")) r.meta = j.at("meta");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("metrics report: ") + e.what());
    }
    return r;
}

MetricsReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "report not found: " + path.string());
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::MalformedFile, path.string() + ": " + e.what());
    }
}

void save_report(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << to_json(report).dump(2) << '\n';
}

std::string report_csv(const MetricsReport& report) {
    std::ostringstream os;
    os << "metric,value\n";
    for (const auto& [name, value] : report.metrics) os << name << ',' << format_number(value) << '\n';
    return os.str();
}

ForgettingDelta forgetting_delta(const MetricsReport& base, const MetricsReport& adapted) {
    ForgettingDelta out;
    double sum = 0.0;
    for (const auto& [name, value] : base.metrics) {
        auto it = adapted.metrics.find(name);
        if (it == adapted.metrics.end()) continue;
        out.deltas[name] = it->second - value;
        sum += it->second - value;
    }
    if (out.deltas.empty()) {
        fail(ErrorCode::NoSharedMetrics, "reports share no metric names");
    }
    out.mean_delta = sum / static_cast<double>(out.deltas.size());
    return out;
}

} // namespace lingua_adapt
