// svgplot.hpp — minimal SVG line plots rendered from sampled series; a
// convenience layer over the CSV outputs, never load-bearing.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace qtherm::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline void write_svg(const std::filesystem::path& path, const std::vector<Series>& series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
    const double width = 720, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";

    // axes with 5 ticks per side
    svg << "<g stroke='black' fill='none'><path d='M" << ml << " " << mt << " V" << height - mb
        << " H" << width - mr << "'/></g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        svg << "<line x1='" << px(fx) << "' y1='" << height - mb << "' x2='" << px(fx) << "' y2='"
            << height - mb + 5 << "' stroke='black'/>\n";
        svg << "<text x='" << px(fx) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << std::setprecision(4) << fx
            << "</text>\n";
        svg << "<line x1='" << ml - 5 << "' y1='" << py(fy) << "' x2='" << ml << "' y2='" << py(fy)
            << "' stroke='black'/>\n";
        svg << "<text x='" << ml - 8 << "' y='" << py(fy) + 4
            << "' text-anchor='end' font-size='11'>" << std::setprecision(4) << fy << "</text>\n";
    }
    svg << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    svg << "<text x='16' y='" << (mt + height - mb) / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 "
        << (mt + height - mb) / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            svg << px(series[s].x[i]) << "," << py(series[s].y[i]) << " ";
        }
        svg << "'/>\n";
        svg << "<text x='" << width - mr - 8 << "' y='" << mt + 16 * (s + 1)
            << "' text-anchor='end' font-size='12' fill='" << color << "'>" << series[s].label
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    out << svg.str();
}

}  // namespace qtherm::plot
