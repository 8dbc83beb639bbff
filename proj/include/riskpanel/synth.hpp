#pragma once

#include <Eigen/Dense>
#include <map>

#include "riskpanel/panel.hpp"
#include "riskpanel/tree.hpp"

namespace riskpanel {

// Ground-truth data generator: global AR(1) push factors, per-country AR(1)
// news processes, and a CDS target assembled additively from recorded
// components (regional factor loadings, linear news channels, a threshold
// amplifier active only above a VIX quantile, and a FED x VIX product term).
struct DGPSpec {
    int n_countries = 42;
    Date start = Date(17167);  // 2017-01-01
    Date end = Date(18992);    // 2021-12-31
    std::uint64_t seed = 1;

    double factor_persistence = 0.98;
    double factor_vol = 0.15;
    double news_persistence = 0.95;
    double news_vol = 0.2;

    // Loadings on (FED, VIX) per region.
    std::map<Region, std::pair<double, double>> region_loadings = {
        {Region::AdvancedEconomies, {0.9, 0.6}}, {Region::EMAsia, {0.7, 0.9}},
        {Region::EMLatam, {0.8, 1.1}},           {Region::EMEurope, {0.6, 0.8}},
        {Region::EMMENA, {0.5, 0.7}},
    };

    double news_strength = 0.5;     // scales the linear news loadings
    double threshold_coef = 0.0;    // GPR channel active above the VIX quantile
    double vix_quantile = 0.8;
    double interaction_coef = 0.0;  // FED x VIX product channel
    double noise_sd = 0.1;

    // Unbalancedness controls.
    double missing_rate = 0.0;  // per-observation drop probability
    int max_start_lag = 0;      // uniform per-country start offset in days
};

struct TruthRow {
    std::string country;
    Date date;
    std::string component;
    double value;
};

struct SynthResult {
    Panel panel;
    std::vector<TruthRow> truth;
};

// Reproducible: identical spec -> bit-identical panel and truth records.
SynthResult generate(const DGPSpec& spec);

void save_truth(const std::vector<TruthRow>& truth, const std::string& path);

// ---- Independent oracles (no shared logic with production modules) ---------

// Exhaustive-subset Shapley values of a single tree under cover-weighted
// conditional expectations. Refuses more than 12 features.
Eigen::VectorXd brute_shapley(const Tree& tree, std::span<const double> x, int n_features);

// Coalition value v(S) used by the oracle; exposed for second-opinion checks.
double brute_coalition_value(const Tree& tree, std::span<const double> x, unsigned long subset_mask);

// Direct double-loop GFEVD for k <= 4, H <= 20.
Eigen::MatrixXd brute_gfevd(const std::vector<Eigen::MatrixXd>& coef, const Eigen::MatrixXd& sigma,
                            int horizon);

}  // namespace riskpanel
