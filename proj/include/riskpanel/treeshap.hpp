#pragma once

#include <Eigen/Dense>
#include <span>

#include "riskpanel/tree.hpp"

namespace riskpanel {

// Exact Shapley attribution of a single regression tree under the
// path-dependent game: a feature in the coalition follows x's branch, a
// feature outside it is averaged over children weighted by training covers.
//
// Adds phi_j to `phi` (size >= n_features) for every feature and returns the
// base value v(empty) = cover-weighted expectation of the tree.
double tree_shap_values(const Tree& tree, std::span<const double> x, std::span<double> phi);

// Shapley values of the game conditioned on one feature being always-known
// (condition = +1) or never-known (condition = -1). The conditioned feature
// receives no attribution. Used to assemble pairwise interaction values.
void tree_shap_conditioned(const Tree& tree, std::span<const double> x, int condition_feature,
                           int condition, std::span<double> phi);

// Pairwise Shapley interaction matrix of one tree (n x n, symmetric, rows sum
// to the per-feature Shapley values; diagonal carries the own effects).
Eigen::MatrixXd tree_shap_interactions(const Tree& tree, std::span<const double> x,
                                       int n_features);

}  // namespace riskpanel
