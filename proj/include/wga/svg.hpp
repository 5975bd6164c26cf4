// Standalone SVG line charts (no external assets)

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace wga {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<std::optional<double>> y;  // missing values break the line
};

struct ChartOptions {
    std::string title;
    std::string x_label{"tau = beta z"};
    std::string y_label;
    bool log_y{false};  // non-positive values are dropped on a log axis
    int width{720};
    int height{480};
};

// Throws InvalidParameter when no series has a drawable point.
std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& opts);

}  // namespace wga
