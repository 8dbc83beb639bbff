#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "riskpanel/attribution.hpp"
#include "riskpanel/series.hpp"

namespace riskpanel {

// Rolling-window construction parameters for cross-country connectedness in
// the attribution space.
struct WindowPlan {
    Date first_center{0};
    Date last_center{0};
    int step_days = 7;
    int probe_half_width = 180;
    double coverage_threshold = 0.70;
    int h_min = 60;
    int h_max = 180;
    int target_lag = 3;     // p in the T = 6 * k_eff * p sizing rule
    int n_max = 10;
    int interp_max_gap = 7; // short-gap interpolation limit inside windows
    int p_max = 4;          // VAR lag search bound
    int horizon = 10;       // GFEVD horizon H
    double density_tau = 0.40;
};

// Per-country attribution series for one feature.
using AttribSeriesMap = std::map<std::string, Series>;

// Extracts the per-country series of one feature's attribution values.
AttribSeriesMap attribution_series(const AttributionCube& cube, const std::string& feature);

struct WindowBlock {
    std::vector<std::string> countries;
    Eigen::MatrixXd values;   // T x k, complete days only, z-scored per country
    std::vector<Date> dates;  // size T
    int k_eff = 0;
    int h = 0;
};

// Adaptive-window assembly: probe coverage fixes the effective dimension and
// half-width, then in-window cleaning interpolates short gaps, drops
// low-coverage and near-constant countries, standardizes, and keeps at most
// n_max countries by (coverage, variance, code). Returns nullopt with a
// reason when fewer than two countries survive.
std::optional<WindowBlock> build_window(const AttribSeriesMap& series, Date center,
                                        const WindowPlan& plan, std::string* skip_reason = nullptr);

struct VarModel {
    int k = 0;
    int p = 0;
    std::vector<Eigen::MatrixXd> coef;  // A_1..A_p, each k x k
    Eigen::VectorXd intercept;
    Eigen::MatrixXd sigma_u;            // innovation covariance (MLE)
    double lambda_ridge = 0.0;          // 1e-8 * trace(sigma)/k stabilizer
    bool stable = true;                 // companion spectral radius < 1
    double aic = 0.0;
};

// Least-squares VAR with AIC lag choice over p in {1..p_max}; ties prefer the
// smaller order. Throws NumericError when the regressor cross-product is
// singular.
VarModel fit_var(const Eigen::MatrixXd& block, int p_max = 4);

// Generalized (order-invariant) H-step forecast-error variance decomposition
// with the ridge-stabilized innovation covariance; rows normalized to one.
Eigen::MatrixXd gfevd(const VarModel& m, int horizon);

// Total spillover: 100 * sum of off-diagonal shares / k.
double dy_index(const Eigen::MatrixXd& theta);

// Weighted network density over thresholded absolute Spearman correlations,
// scaled to [0, 100].
double density(const Eigen::MatrixXd& block, double tau = 0.40);

struct SpilloverPoint {
    std::string feature;
    Date center{0};
    int k_eff = 0;
    int h = 0;
    int p = 0;
    int horizon = 0;
    double s_dy = 0.0;
    double density = 0.0;
    std::vector<std::string> countries;
    std::string skip_reason;  // empty when computed
    bool computed = false;
    bool stable = true;
};

struct SpilloverSeries {
    std::vector<SpilloverPoint> points;  // ordered by (feature, center)
};

// Full rolling pipeline per (feature, center): build_window -> fit_var ->
// gfevd -> dy_index, plus density on the same block. Window failures carry
// reason codes and never abort the series.
SpilloverSeries rolling_connectedness(const AttributionCube& cube,
                                      const std::vector<std::string>& features,
                                      const WindowPlan& plan, int jobs = 1);

void save_spillovers(const SpilloverSeries& series, const std::string& path);

}  // namespace riskpanel
