#pragma once

// Minimal deterministic SVG line charts: fixed canvas, fixed palette, all
// coordinates printed through fixed-precision formatting so identical inputs
// produce byte-identical files.

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <stdexcept>

namespace paraosc {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    int width = 800;
    int height = 500;
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    bool unit_y = false;       // force y range [0, 1]
    bool band_first_two = false;  // shade between series 0 and 1
};

namespace svg_detail {

inline std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace svg_detail

inline std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
    if (series.empty())
        throw std::invalid_argument("render_svg: no series to plot");
    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg: series '" + s.name + "' size mismatch");
        if (s.x.empty())
            throw std::invalid_argument("render_svg: series '" + s.name + "' is empty");
    }

    static const char* palette[6] = {"#1f77b4", "#d9a21b", "#2ca02c",
                                     "#d62728", "#9467bd", "#8c564b"};
    const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 55.0;
    const double pw = opt.width - ml - mr;
    const double ph = opt.height - mt - mb;

    double x_lo = series[0].x.front(), x_hi = x_lo;
    double y_lo = series[0].y.front(), y_hi = y_lo;
    for (const PlotSeries& s : series) {
        for (double v : s.x) { x_lo = std::min(x_lo, v); x_hi = std::max(x_hi, v); }
        for (double v : s.y) { y_lo = std::min(y_lo, v); y_hi = std::max(y_hi, v); }
    }
    if (opt.unit_y) { y_lo = 0.0; y_hi = 1.0; }
    if (x_hi <= x_lo) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi <= y_lo) { y_lo -= 0.5; y_hi += 0.5; }
    if (!opt.unit_y) {
        const double pad = 0.05 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
    }

    const auto px = [&](double v) { return ml + pw * (v - x_lo) / (x_hi - x_lo); };
    const auto py = [&](double v) { return mt + ph * (1.0 - (v - y_lo) / (y_hi - y_lo)); };

    using svg_detail::escape;
    using svg_detail::fmt3;
    using svg_detail::fmt_tick;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
        << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width << ' '
        << opt.height << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" fill=\"#ffffff\"/>\n";

    if (!opt.title.empty())
        out << "<text x=\"" << fmt3(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
               "font-family=\"monospace\" font-size=\"16\">"
            << escape(opt.title) << "</text>\n";

    // gridless tick axes
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        const double gx = px(fx);
        out << "<line x1=\"" << fmt3(gx) << "\" y1=\"" << fmt3(mt + ph) << "\" x2=\""
            << fmt3(gx) << "\" y2=\"" << fmt3(mt + ph + 5) << "\" stroke=\"#000000\"/>\n";
        out << "<text x=\"" << fmt3(gx) << "\" y=\"" << fmt3(mt + ph + 20)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
            << fmt_tick(fx) << "</text>\n";
        const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        const double gy = py(fy);
        out << "<line x1=\"" << fmt3(ml - 5) << "\" y1=\"" << fmt3(gy) << "\" x2=\""
            << fmt3(ml) << "\" y2=\"" << fmt3(gy) << "\" stroke=\"#000000\"/>\n";
        out << "<text x=\"" << fmt3(ml - 8) << "\" y=\"" << fmt3(gy + 4)
            << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
            << fmt_tick(fy) << "</text>\n";
    }
    out << "<rect x=\"" << fmt3(ml) << "\" y=\"" << fmt3(mt) << "\" width=\"" << fmt3(pw)
        << "\" height=\"" << fmt3(ph) << "\" fill=\"none\" stroke=\"#000000\"/>\n";

    if (!opt.x_label.empty())
        out << "<text x=\"" << fmt3(ml + pw / 2) << "\" y=\"" << fmt3(mt + ph + 40)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">"
            << escape(opt.x_label) << "</text>\n";
    if (!opt.y_label.empty())
        out << "<text x=\"18\" y=\"" << fmt3(mt + ph / 2)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" "
               "transform=\"rotate(-90 18 "
            << fmt3(mt + ph / 2) << ")\">" << escape(opt.y_label) << "</text>\n";

    if (opt.band_first_two && series.size() >= 2 &&
        series[0].x.size() == series[1].x.size()) {
        out << "<polygon fill=\"" << palette[0] << "\" fill-opacity=\"0.25\" stroke=\"none\" "
               "points=\"";
        for (size_t i = 0; i < series[0].x.size(); ++i)
            out << fmt3(px(series[0].x[i])) << ',' << fmt3(py(series[0].y[i])) << ' ';
        for (size_t i = series[1].x.size(); i-- > 0;)
            out << fmt3(px(series[1].x[i])) << ',' << fmt3(py(series[1].y[i])) << ' ';
        out << "\"/>\n";
    }

    for (size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[s % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < series[s].x.size(); ++i)
            out << fmt3(px(series[s].x[i])) << ',' << fmt3(py(series[s].y[i])) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << fmt3(ml + pw - 6) << "\" y=\""
            << fmt3(mt + 16 + 16 * static_cast<double>(s))
            << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\""
            << palette[s % 6] << "\">" << escape(series[s].name) << "</text>\n";
    }

    out << "</svg>\n";
    return out.str();
}

}  // namespace paraosc
