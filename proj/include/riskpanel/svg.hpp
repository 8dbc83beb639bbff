#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace riskpanel {

// Minimal SVG emission for run outputs: multi-series line charts (optionally
// with point markers) and value heatmaps. Output is self-contained SVG 1.1.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

void svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                    const std::string& path);

void svg_heatmap(const Eigen::MatrixXd& values, const std::vector<std::string>& row_labels,
                 const std::vector<std::string>& col_labels, const std::string& title,
                 const std::string& path);

}  // namespace riskpanel
