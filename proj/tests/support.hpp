#pragma once

// Shared fixtures and independent oracles for the test suite. Everything here
// is deliberately brute-force and shares no algorithmic code with src/.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "riskpanel/design.hpp"
#include "riskpanel/panel.hpp"
#include "riskpanel/tree.hpp"

namespace testsupport {

using riskpanel::Date;
using riskpanel::DesignMatrix;
using riskpanel::Series;

inline Date day(int offset) { return Date::from_ymd(2020, 1, 1) + offset; }

inline Series make_series(const std::string& country, riskpanel::Variable var,
                          const std::vector<std::pair<int, double>>& points) {
    Series s;
    s.country = country;
    s.variable = var;
    for (const auto& [offset, value] : points) s.obs.push_back({day(offset), value});
    return s;
}

// Random panel-style design matrix with per-country offsets baked into y.
inline DesignMatrix random_design(int n_rows, int n_features, int n_countries,
                                  std::mt19937_64& rng, double noise_sd = 0.0) {
    DesignMatrix d;
    std::normal_distribution<double> normal(0.0, 1.0);
    d.x.resize(n_rows, n_features);
    d.y.resize(n_rows);
    for (int j = 0; j < n_features; ++j) d.feature_names.push_back("f" + std::to_string(j));
    for (int c = 0; c < n_countries; ++c) d.country_codes.push_back("C" + std::to_string(c));
    Eigen::VectorXd slopes(n_features);
    for (int j = 0; j < n_features; ++j) slopes(j) = normal(rng);
    std::vector<double> alpha(static_cast<std::size_t>(n_countries));
    for (auto& a : alpha) a = normal(rng);
    for (int r = 0; r < n_rows; ++r) {
        for (int j = 0; j < n_features; ++j) d.x(r, j) = normal(rng);
        const int c = r % n_countries;
        d.country.push_back(c);
        d.feature_date.push_back(day(r));
        d.y(r) = alpha[static_cast<std::size_t>(c)] + d.x.row(r).dot(slopes) +
                 noise_sd * normal(rng);
    }
    return d;
}

// Normal-equations oracle for fixed-effects least squares: solves the full
// dummy-variable system [X D] directly.
inline Eigen::VectorXd ols_fe_oracle(const DesignMatrix& d) {
    const Eigen::Index n = d.rows(), m = d.cols();
    const auto c = static_cast<Eigen::Index>(d.country_codes.size());
    Eigen::MatrixXd full(n, m + c);
    full.setZero();
    full.leftCols(m) = d.x;
    for (Eigen::Index r = 0; r < n; ++r) full(r, m + d.country[static_cast<std::size_t>(r)]) = 1.0;
    const Eigen::MatrixXd gram = full.transpose() * full;
    const Eigen::VectorXd beta = gram.ldlt().solve(full.transpose() * d.y);
    return beta.head(m);  // slopes
}

// Random regression tree over [0,1]^M feature space with leaf values and
// covers drawn at random (covers positive).
inline riskpanel::Tree random_tree(int n_features, int depth, std::mt19937_64& rng) {
    riskpanel::Tree tree;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> feature(0, n_features - 1);
    std::normal_distribution<double> value(0.0, 1.0);

    // Recursive construction; covers distributed multiplicatively.
    struct Builder {
        riskpanel::Tree& tree;
        std::mt19937_64& rng;
        std::uniform_real_distribution<double>& unit;
        std::uniform_int_distribution<int>& feature;
        std::normal_distribution<double>& value;

        int build(int depth, double cover) {
            const int index = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes[static_cast<std::size_t>(index)].cover = cover;
            const bool leaf = depth == 0 || unit(rng) < 0.2;
            if (leaf) {
                tree.nodes[static_cast<std::size_t>(index)].value = value(rng);
                return index;
            }
            const double share = 0.2 + 0.6 * unit(rng);
            tree.nodes[static_cast<std::size_t>(index)].feature = feature(rng);
            tree.nodes[static_cast<std::size_t>(index)].threshold = unit(rng);
            const int left = build(depth - 1, cover * share);
            tree.nodes[static_cast<std::size_t>(index)].left = left;
            const int right = build(depth - 1, cover * (1.0 - share));
            tree.nodes[static_cast<std::size_t>(index)].right = right;
            return index;
        }
    };
    Builder{tree, rng, unit, feature, value}.build(depth, 1024.0);
    return tree;
}

}  // namespace testsupport
