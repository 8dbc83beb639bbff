#include "riskpanel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

namespace riskpanel {

namespace {

std::vector<int> all_indices(Eigen::Index n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

std::vector<int> bootstrap_rows(Eigen::Index n, std::mt19937_64& rng) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
    for (auto& r : rows) r = pick(rng);
    return rows;
}

std::vector<int> subsample_rows(Eigen::Index n, double fraction, std::mt19937_64& rng) {
    auto rows = all_indices(n);
    const auto take = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(n),
                         std::max(1.0, std::ceil(fraction * static_cast<double>(n)))));
    if (take >= rows.size()) return rows;
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
        std::swap(rows[i], rows[pick(rng)]);
    }
    rows.resize(take);
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<int> per_tree_feature_subset(int m, double fraction, std::mt19937_64& rng) {
    auto features = all_indices(m);
    const auto take = static_cast<std::size_t>(
        std::min<double>(m, std::max(1.0, std::ceil(fraction * m))));
    if (take >= features.size()) return features;
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, features.size() - 1);
        std::swap(features[i], features[pick(rng)]);
    }
    features.resize(take);
    std::sort(features.begin(), features.end());
    return features;
}

}  // namespace

double Forest::predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

double Forest::expected_value() const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.expected_value();
    return sum / static_cast<double>(trees.size());
}

Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestSpec& spec,
                  int jobs) {
    if (spec.n_trees < 1) throw ValidationError("fit_forest: n_trees must be >= 1");
    if (x.rows() == 0) throw ValidationError("fit_forest: empty design");
    Forest forest;
    forest.trees.resize(static_cast<std::size_t>(spec.n_trees));
    parallel_for(static_cast<std::size_t>(spec.n_trees), jobs, [&](std::size_t b) {
        std::mt19937_64 rng(mix_seed(spec.seed, 2 * b));
        std::vector<int> rows;
        if (spec.bootstrap)
            rows = bootstrap_rows(x.rows(), rng);
        else if (spec.subsample < 1.0)
            rows = subsample_rows(x.rows(), spec.subsample, rng);
        else
            rows = all_indices(x.rows());

        std::vector<int> features;
        TreeLimits limits = spec.limits;
        if (spec.per_tree_features) {
            features = per_tree_feature_subset(static_cast<int>(x.cols()), limits.feature_fraction, rng);
            limits.feature_fraction = 1.0;
        } else {
            features = all_indices(x.cols());
        }
        limits.seed = mix_seed(spec.seed, 2 * b + 1);
        forest.trees[b] = fit_tree(x, y, std::move(rows), std::move(features), limits);
    });
    return forest;
}

double BoostingModel::predict(std::span<const double> x) const {
    double out = base;
    for (const auto& t : trees) out += learning_rate * t.predict(x);
    return out;
}

double BoostingModel::expected_value() const {
    double out = base;
    for (const auto& t : trees) out += learning_rate * t.expected_value();
    return out;
}

BoostingModel fit_gradient_boosting(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const BoostingSpec& spec) {
    if (spec.n_trees < 1) throw ValidationError("fit_gradient_boosting: n_trees must be >= 1");
    if (x.rows() == 0) throw ValidationError("fit_gradient_boosting: empty design");
    BoostingModel model;
    model.base = y.mean();
    model.learning_rate = spec.learning_rate;
    Eigen::VectorXd residual = y.array() - model.base;

    const auto features = all_indices(x.cols());
    for (int b = 0; b < spec.n_trees; ++b) {
        std::mt19937_64 rng(mix_seed(spec.seed, 2 * static_cast<std::uint64_t>(b)));
        std::vector<int> rows = spec.subsample < 1.0 ? subsample_rows(x.rows(), spec.subsample, rng)
                                                     : all_indices(x.rows());
        TreeLimits limits;
        limits.max_depth = spec.max_depth;
        limits.min_samples_leaf = spec.min_child_weight;
        limits.min_samples_split = std::max(2, 2 * spec.min_child_weight);
        limits.feature_fraction = spec.feature_fraction;
        limits.seed = mix_seed(spec.seed, 2 * static_cast<std::uint64_t>(b) + 1);
        Tree tree = fit_tree(x, residual, std::move(rows), features, limits);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const Eigen::RowVectorXd row = x.row(r);
            residual(r) -= spec.learning_rate *
                           tree.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double MultilayerModel::predict(std::span<const double> x, Region r) const {
    auto it = groups.find(r);
    if (it == groups.end())
        throw ValidationError("multilayer predict: no group model for region " + to_string(r));
    return it->second.predict(x);
}

MultilayerModel fit_multilayer(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const std::vector<Region>& row_region,
                               const std::map<Region, ForestSpec>& specs, int jobs) {
    if (static_cast<std::size_t>(x.rows()) != row_region.size())
        throw ValidationError("fit_multilayer: row/region size mismatch");
    std::map<Region, std::vector<int>> members;
    for (std::size_t r = 0; r < row_region.size(); ++r)
        members[row_region[r]].push_back(static_cast<int>(r));

    MultilayerModel model;
    for (const auto& [region, rows] : members) {
        auto it = specs.find(region);
        if (it == specs.end())
            throw ValidationError("fit_multilayer: no spec for region " + to_string(region));
        // Fit on the subgroup only; rebuild a compact matrix for locality.
        Eigen::MatrixXd xg(static_cast<Eigen::Index>(rows.size()), x.cols());
        Eigen::VectorXd yg(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            xg.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
            yg(static_cast<Eigen::Index>(i)) = y(rows[i]);
        }
        model.groups.emplace(region, fit_forest(xg, yg, it->second, jobs));
    }
    return model;
}

}  // namespace riskpanel
