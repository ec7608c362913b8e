#pragma once

// Minimal SVG line-chart renderer: axes, ticks, legend, and the four line
// styles used by the figure outputs (solid, dashed, dot-dashed, dotted).
// Pure presentation over already-sampled series; rendering the same data
// yields byte-identical output.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fmflow/errors.hpp"

namespace fmflow::svg {

enum class LineStyle { Solid, Dashed, DotDashed, Dotted };

inline const char* dash_array(LineStyle s) {
    switch (s) {
        case LineStyle::Solid: return "";
        case LineStyle::Dashed: return "9 5";
        case LineStyle::DotDashed: return "11 4 2 4";
        default: return "2 4";
    }
}

struct SeriesSpec {
    std::string name;
    const std::vector<double>* values;
    LineStyle style;
};

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::vector<double>& x,
                                     const std::vector<SeriesSpec>& series) {
    if (x.size() < 2) throw ConfigError("svg: need at least two x samples");
    for (const auto& s : series)
        if (s.values->size() != x.size())
            throw ConfigError("svg: series '" + s.name + "' length mismatch");

    constexpr double width = 960, height = 600;
    constexpr double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& s : series)
        for (double v : *s.values) {
            if (first) {
                ymin = ymax = v;
                first = false;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (ymin == ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double xmin = x.front(), xmax = x.back();
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed(width, 0) +
           "\" height=\"" + detail::fixed(height, 0) + "\" viewBox=\"0 0 " +
           detail::fixed(width, 0) + " " + detail::fixed(height, 0) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail::fixed(width / 2, 1) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + title + "</text>\n";

    // axes box
    out += "<rect x=\"" + detail::fixed(ml, 1) + "\" y=\"" + detail::fixed(mt, 1) +
           "\" width=\"" + detail::fixed(pw, 1) + "\" height=\"" + detail::fixed(ph, 1) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks
    constexpr int n_ticks = 6;
    for (int i = 0; i < n_ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / (n_ticks - 1);
        const double gx = px(fx);
        out += "<line x1=\"" + detail::fixed(gx, 2) + "\" y1=\"" + detail::fixed(mt + ph, 2) +
               "\" x2=\"" + detail::fixed(gx, 2) + "\" y2=\"" +
               detail::fixed(mt + ph + 5, 2) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fixed(gx, 2) + "\" y=\"" +
               detail::fixed(mt + ph + 20, 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::tick_label(fx) + "</text>\n";

        const double fy = ymin + (ymax - ymin) * i / (n_ticks - 1);
        const double gy = py(fy);
        out += "<line x1=\"" + detail::fixed(ml - 5, 2) + "\" y1=\"" + detail::fixed(gy, 2) +
               "\" x2=\"" + detail::fixed(ml, 2) + "\" y2=\"" + detail::fixed(gy, 2) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fixed(ml - 9, 2) + "\" y=\"" +
               detail::fixed(gy + 4, 2) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::tick_label(fy) + "</text>\n";
    }
    out += "<text x=\"" + detail::fixed(ml + pw / 2, 1) + "\" y=\"" +
           detail::fixed(height - 12, 1) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           x_label + "</text>\n";

    // zero line when visible
    if (ymin < 0.0 && ymax > 0.0)
        out += "<line x1=\"" + detail::fixed(ml, 1) + "\" y1=\"" + detail::fixed(py(0), 2) +
               "\" x2=\"" + detail::fixed(ml + pw, 1) + "\" y2=\"" +
               detail::fixed(py(0), 2) + "\" stroke=\"#bbbbbb\" stroke-width=\"0.7\"/>\n";

    for (const auto& s : series) {
        out += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.2\"";
        const char* dash = dash_array(s.style);
        if (dash[0]) out += std::string(" stroke-dasharray=\"") + dash + "\"";
        out += " points=\"";
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ' ';
            out += detail::fixed(px(x[i]), 2) + "," + detail::fixed(py((*s.values)[i]), 2);
        }
        out += "\"/>\n";
    }

    // legend
    const double lx = ml + pw - 170, ly = mt + 14;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double yy = ly + 18.0 * static_cast<double>(i);
        out += "<line x1=\"" + detail::fixed(lx, 1) + "\" y1=\"" + detail::fixed(yy - 4, 1) +
               "\" x2=\"" + detail::fixed(lx + 34, 1) + "\" y2=\"" +
               detail::fixed(yy - 4, 1) + "\" stroke=\"black\" stroke-width=\"1.2\"";
        const char* dash = dash_array(series[i].style);
        if (dash[0]) out += std::string(" stroke-dasharray=\"") + dash + "\"";
        out += "/>\n";
        out += "<text x=\"" + detail::fixed(lx + 40, 1) + "\" y=\"" + detail::fixed(yy, 1) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + series[i].name +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_file(const std::string& content, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("svg: cannot open '" + path + "' for writing");
    f << content;
}

}  // namespace fmflow::svg
