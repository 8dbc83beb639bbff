#pragma once

#include <map>
#include <optional>

#include "riskpanel/models.hpp"
#include "riskpanel/treeshap.hpp"

namespace riskpanel {

// Per-observation Shapley attribution of a fitted tree-ensemble model.
// phi entries satisfy base + sum(phi) == model output on every row.
struct AttributionRow {
    std::string country;
    Date date;
    double fx = 0.0;
    double base = 0.0;
    Eigen::VectorXd phi;
    Eigen::MatrixXd interactions;  // empty unless requested
};

struct AttributionCube {
    std::vector<std::string> feature_names;  // ends with "country" for tree models
    std::vector<AttributionRow> rows;
    bool has_interactions = false;
};

struct AttributionOptions {
    bool interactions = false;
    int jobs = 1;
};

// Exact attribution for forest, boosting, and region-routed models. Forest
// cubes average per-tree values; boosting sums them with learning-rate
// scaling; multilayer models carry a per-group base value.
AttributionCube tree_shap(const FittedModel& m, const DesignMatrix& rows,
                          const AttributionOptions& opts = {});

// Mean |phi| per feature at country, region, and global level. The global
// figure is the unweighted mean of country means. The synthetic country
// routing feature is excluded from reports.
struct ImportanceSummary {
    std::vector<std::string> features;
    std::map<std::string, Eigen::VectorXd> by_country;
    std::map<Region, Eigen::VectorXd> by_region;
    Eigen::VectorXd global;
};

ImportanceSummary summarize_importance(const AttributionCube& cube, const Taxonomy& taxonomy);

// Country x feature matrix of mean |phi_{key, other}| interaction magnitudes,
// rows ordered by (region, code).
struct InteractionHeatmap {
    std::string key_feature;
    std::vector<std::string> countries;  // row order
    std::vector<std::string> features;   // column order (excludes key + country)
    Eigen::MatrixXd values;
};

InteractionHeatmap interaction_heatmap(const AttributionCube& cube, const std::string& key_feature,
                                       const Taxonomy& taxonomy);

// Locally weighted linear smoother (tricube weights, optional bisquare
// robustness passes). Inputs are clipped to the [5th, 95th] percentile band
// before fitting; the curve is defined on clipped x only.
struct LoessCurve {
    std::vector<double> grid;
    std::vector<double> fitted;
    double clip_lo = 0.0;
    double clip_hi = 0.0;
    double frac = 0.0;
    int robust_iters = 0;
};

LoessCurve loess(std::vector<double> xs, std::vector<double> ys, double frac = 0.4,
                 int robust_iters = 1, int grid_points = 50);

// Binned mean of phi_i + phi_j + 2 * phi_ij over a grid on the two raw
// feature axes; empty bins are NaN.
struct DependenceSurface {
    std::vector<double> x_edges;  // size nx + 1
    std::vector<double> y_edges;  // size ny + 1
    Eigen::MatrixXd values;       // nx x ny, NaN where empty
};

DependenceSurface dependence_surface(const AttributionCube& cube, const DesignMatrix& rows,
                                     int feature_i, int feature_j, int grid_n = 20);

// Columnar CSV per (country, date, feature): main effects, and when present
// a second file with pairwise terms.
void save_cube(const AttributionCube& cube, const std::string& path,
               const std::string& interactions_path = "");
AttributionCube load_cube(const std::string& path, const std::string& interactions_path = "");

}  // namespace riskpanel
