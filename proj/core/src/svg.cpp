#include "hesrpt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hesrpt {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

}  // namespace

std::string render_bar_chart(const BarChartSpec& spec) {
    const std::size_t n = spec.values.size();
    if (n == 0 || spec.labels.size() != n)
        throw std::invalid_argument("bar chart needs matching labels and values");
    if (!spec.errors.empty() && spec.errors.size() != n)
        throw std::invalid_argument("error whiskers must match the value count");

    const double width = 640, height = 400;
    const double left = 70, right = 20, top = 50, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double vmax = 0.0, vmin_pos = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        double hi = spec.values[i] + (spec.errors.empty() ? 0.0 : spec.errors[i]);
        vmax = std::max(vmax, hi);
        if (spec.values[i] > 0.0) vmin_pos = std::min(vmin_pos, spec.values[i]);
    }
    if (vmax <= 0.0) vmax = 1.0;

    double lo_exp = 0.0, hi_exp = 0.0;
    if (spec.log_scale) {
        if (vmin_pos >= 1e300) vmin_pos = 0.1;
        lo_exp = std::floor(std::log10(vmin_pos));
        hi_exp = std::ceil(std::log10(vmax * 1.05));
        if (hi_exp <= lo_exp) hi_exp = lo_exp + 1;
    } else {
        vmax *= 1.08;
    }

    auto y_of = [&](double v) {
        if (spec.log_scale) {
            double e = std::log10(std::max(v, std::pow(10.0, lo_exp)));
            return top + plot_h * (1.0 - (e - lo_exp) / (hi_exp - lo_exp));
        }
        return top + plot_h * (1.0 - v / vmax);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << spec.title << "</text>\n";
    out << "<text x=\"16\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 "
        << top + plot_h / 2 << ")\">" << spec.y_label << "</text>\n";

    // gridlines and tick labels
    if (spec.log_scale) {
        for (double e = lo_exp; e <= hi_exp + 1e-9; e += 1.0) {
            double y = y_of(std::pow(10.0, e));
            out << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + plot_w
                << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
            out << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
                << num(e) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            double v = vmax * i / 4;
            double y = y_of(v);
            out << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + plot_w
                << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
            out << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
                << "</text>\n";
        }
    }

    const double slot = plot_w / n;
    const double bar_w = slot * 0.6;
    for (std::size_t i = 0; i < n; ++i) {
        double x = left + slot * i + (slot - bar_w) / 2;
        double y = y_of(spec.values[i]);
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w)
            << "\" height=\"" << num(std::max(0.0, top + plot_h - y)) << "\" fill=\""
            << kPalette[i % 8] << "\"/>\n";
        if (!spec.errors.empty() && spec.errors[i] > 0.0) {
            double cx = x + bar_w / 2;
            double y1 = y_of(spec.values[i] + spec.errors[i]);
            double y2 = y_of(std::max(spec.values[i] - spec.errors[i],
                                      spec.log_scale ? spec.values[i] * 1e-3 : 0.0));
            out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(cx)
                << "\" y2=\"" << num(y2) << "\" stroke=\"black\"/>\n";
            out << "<line x1=\"" << num(cx - 5) << "\" y1=\"" << num(y1) << "\" x2=\""
                << num(cx + 5) << "\" y2=\"" << num(y1) << "\" stroke=\"black\"/>\n";
            out << "<line x1=\"" << num(cx - 5) << "\" y1=\"" << num(y2) << "\" x2=\""
                << num(cx + 5) << "\" y2=\"" << num(y2) << "\" stroke=\"black\"/>\n";
        }
        out << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(top + plot_h + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << spec.labels[i] << "</text>\n";
        out << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(y - 4)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << num(spec.values[i]) << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
    return out.str();
}

void write_bar_chart(const std::string& path, const BarChartSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << render_bar_chart(spec);
}

}  // namespace hesrpt
