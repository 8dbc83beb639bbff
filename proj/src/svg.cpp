#include "riskpanel/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 480;
constexpr int kMargin = 60;

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors[i % 8];
}

struct Scale {
    double lo, hi;
    double px_lo, px_hi;
    double map(double v) const {
        if (hi == lo) return (px_lo + px_hi) / 2.0;
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

}  // namespace

void svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write SVG: " + path);

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        for (double v : s.x) {
            x_lo = std::min(x_lo, v);
            x_hi = std::max(x_hi, v);
        }
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (!std::isfinite(x_lo) || !std::isfinite(y_lo)) {
        x_lo = y_lo = 0.0;
        x_hi = y_hi = 1.0;
    }
    const Scale sx{x_lo, x_hi, kMargin, kWidth - kMargin};
    const Scale sy{y_lo, y_hi, kHeight - kMargin, kMargin};

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << kMargin << "' y1='" << kHeight - kMargin << "' x2='" << kWidth - kMargin
        << "' y2='" << kHeight - kMargin << "' stroke='black'/>\n";
    out << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin << "' y2='"
        << kHeight - kMargin << "' stroke='black'/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double vy = y_lo + (y_hi - y_lo) * tick / 4.0;
        out << "<text x='" << kMargin - 6 << "' y='" << sy.map(vy) + 4
            << "' text-anchor='end' font-size='10'>" << format_double(vy) << "</text>\n";
        const double vx = x_lo + (x_hi - x_lo) * tick / 4.0;
        out << "<text x='" << sx.map(vx) << "' y='" << kHeight - kMargin + 16
            << "' text-anchor='middle' font-size='10'>" << format_double(vx) << "</text>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        out << "<polyline fill='none' stroke='" << palette(i) << "' stroke-width='1.5' points='";
        for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
            if (!std::isfinite(s.y[j])) continue;
            out << sx.map(s.x[j]) << ',' << sy.map(s.y[j]) << ' ';
        }
        out << "'/>\n";
        if (s.markers) {
            for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
                if (!std::isfinite(s.y[j])) continue;
                out << "<circle cx='" << sx.map(s.x[j]) << "' cy='" << sy.map(s.y[j])
                    << "' r='2' fill='" << palette(i) << "'/>\n";
            }
        }
        out << "<text x='" << kWidth - kMargin + 4 << "' y='" << kMargin + 16 * i
            << "' font-size='11' fill='" << palette(i) << "'>" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

void svg_heatmap(const Eigen::MatrixXd& values, const std::vector<std::string>& row_labels,
                 const std::vector<std::string>& col_labels, const std::string& title,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write SVG: " + path);
    const auto rows = values.rows(), cols = values.cols();
    const double cell_w = static_cast<double>(kWidth - 2 * kMargin) / std::max<Eigen::Index>(1, cols);
    const double cell_h = static_cast<double>(kHeight - 2 * kMargin) / std::max<Eigen::Index>(1, rows);
    double lo = values.size() ? values.minCoeff() : 0.0;
    double hi = values.size() ? values.maxCoeff() : 1.0;
    if (hi == lo) hi = lo + 1.0;

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
        << kHeight + 20 * (rows > 12 ? 0 : 1) << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double u = (values(r, c) - lo) / (hi - lo);
            const int shade = static_cast<int>(255.0 * (1.0 - u));
            out << "<rect x='" << kMargin + cell_w * static_cast<double>(c) << "' y='"
                << kMargin + cell_h * static_cast<double>(r) << "' width='" << cell_w << "' height='"
                << cell_h << "' fill='rgb(255," << shade << ',' << shade << ")'/>\n";
        }
        if (r < static_cast<Eigen::Index>(row_labels.size()))
            out << "<text x='" << kMargin - 4 << "' y='"
                << kMargin + cell_h * (static_cast<double>(r) + 0.7)
                << "' text-anchor='end' font-size='9'>" << row_labels[static_cast<std::size_t>(r)]
                << "</text>\n";
    }
    for (Eigen::Index c = 0; c < cols && c < static_cast<Eigen::Index>(col_labels.size()); ++c)
        out << "<text x='" << kMargin + cell_w * (static_cast<double>(c) + 0.5) << "' y='"
            << kMargin - 8 << "' text-anchor='middle' font-size='9'>"
            << col_labels[static_cast<std::size_t>(c)] << "</text>\n";
    out << "</svg>\n";
}

}  // namespace riskpanel
