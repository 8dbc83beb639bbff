#pragma once

#include <map>

#include "riskpanel/series.hpp"
#include "riskpanel/tree.hpp"

namespace riskpanel {

// Averaging ensembles (bagging, random forest, extra trees). Per-tree seeds
// derive deterministically from (seed, tree index), so fits are reproducible
// and parallelizable across members.
struct ForestSpec {
    int n_trees = 1000;
    bool bootstrap = true;      // n draws with replacement
    double subsample = 1.0;     // without-replacement row share when not bootstrapping
    bool per_tree_features = false;  // draw the candidate set once per tree
    TreeLimits limits;
    std::uint64_t seed = 0;
};

struct Forest {
    std::vector<Tree> trees;

    double predict(std::span<const double> x) const;
    double expected_value() const;  // mean of member expectations
};

Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestSpec& spec,
                  int jobs = 1);

// Stagewise squared-error boosting: F_0 is the training mean, each stage fits
// a tree to current residuals and adds it scaled by the learning rate.
struct BoostingSpec {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    double subsample = 1.0;        // without-replacement row share per stage
    double feature_fraction = 1.0; // candidate share per split
    int min_child_weight = 1;      // minimum rows per leaf
    std::uint64_t seed = 0;
};

struct BoostingModel {
    double base = 0.0;
    double learning_rate = 0.0;
    std::vector<Tree> trees;

    double predict(std::span<const double> x) const;
    double expected_value() const;
};

BoostingModel fit_gradient_boosting(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const BoostingSpec& spec);

// Region-routed forests: one member per group, prediction dispatches on the
// row's region. Routing is total and mutually exclusive by construction.
struct MultilayerModel {
    std::map<Region, Forest> groups;

    double predict(std::span<const double> x, Region r) const;  // throws on unmapped region
};

MultilayerModel fit_multilayer(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const std::vector<Region>& row_region,
                               const std::map<Region, ForestSpec>& specs, int jobs = 1);

}  // namespace riskpanel
