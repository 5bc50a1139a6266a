#pragma once

#include <string>
#include <vector>

namespace hesrpt {

/// A self-contained bar chart: no external fonts, scripts, or stylesheets.
struct BarChartSpec {
    std::string title;
    std::string y_label;
    std::vector<std::string> labels;  // one per bar
    std::vector<double> values;
    std::vector<double> errors;  // one-sigma whiskers; empty for none
    bool log_scale = false;      // log10 y-axis, for values spanning decades
};

std::string render_bar_chart(const BarChartSpec& spec);
void write_bar_chart(const std::string& path, const BarChartSpec& spec);

}  // namespace hesrpt
