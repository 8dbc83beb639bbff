#include <numeric>
#include <random>

#include "doctest.h"
#include "riskpanel/errors.hpp"
#include "riskpanel/forest.hpp"
#include "support.hpp"

using namespace riskpanel;

namespace {

void make_data(int n, int m, std::mt19937_64& rng, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    std::normal_distribution<double> normal;
    x.resize(n, m);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) x(i, j) = normal(rng);
        y(i) = std::sin(x(i, 0)) + 0.5 * x(i, 1) * (x(i, 2) > 0) + 0.2 * normal(rng);
    }
}

}  // namespace

TEST_CASE("single-tree forest without bootstrap equals fit_tree") {
    std::mt19937_64 rng(61);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(100, 3, rng, x, y);
    ForestSpec spec;
    spec.n_trees = 1;
    spec.bootstrap = false;
    spec.limits.max_depth = 5;
    spec.limits.feature_fraction = 1.0;
    spec.seed = 4;
    const Forest f = fit_forest(x, y, spec);

    TreeLimits limits = spec.limits;
    limits.seed = mix_seed(spec.seed, 1);  // per-tree stream for member 0
    std::vector<int> rows(100);
    std::iota(rows.begin(), rows.end(), 0);
    const Tree t = fit_tree(x, y, rows, {0, 1, 2}, limits);
    for (int i = 0; i < 20; ++i) {
        const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
        CHECK(f.predict(std::span<const double>(row, 3)) ==
              doctest::Approx(t.predict(std::span<const double>(row, 3))).epsilon(1e-15));
    }
}

TEST_CASE("forest prediction is the mean of member trees") {
    std::mt19937_64 rng(62);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(120, 3, rng, x, y);
    ForestSpec spec;
    spec.n_trees = 11;
    spec.limits.max_depth = 4;
    spec.seed = 9;
    const Forest f = fit_forest(x, y, spec);
    for (int i = 0; i < 10; ++i) {
        const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
        const std::span<const double> xs(row, 3);
        double sum = 0.0;
        for (const auto& t : f.trees) sum += t.predict(xs);
        CHECK(f.predict(xs) == doctest::Approx(sum / 11.0).epsilon(1e-12));
    }
}

TEST_CASE("forest prediction is invariant to tree order") {
    std::mt19937_64 rng(63);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(80, 3, rng, x, y);
    ForestSpec spec;
    spec.n_trees = 8;
    spec.limits.max_depth = 3;
    spec.seed = 11;
    Forest f = fit_forest(x, y, spec);
    Forest reversed = f;
    std::reverse(reversed.trees.begin(), reversed.trees.end());
    for (int i = 0; i < 10; ++i) {
        const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
        const std::span<const double> xs(row, 3);
        CHECK(f.predict(xs) == doctest::Approx(reversed.predict(xs)).epsilon(1e-12));
    }
}

TEST_CASE("forest fits are deterministic and job-count independent") {
    std::mt19937_64 rng(64);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(90, 4, rng, x, y);
    ForestSpec spec;
    spec.n_trees = 6;
    spec.limits.max_depth = 4;
    spec.limits.feature_fraction = 0.5;
    spec.seed = 17;
    const Forest a = fit_forest(x, y, spec, 1);
    const Forest b = fit_forest(x, y, spec, 4);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t i = 0; i < a.trees[t].nodes.size(); ++i) {
            CHECK(a.trees[t].nodes[i].threshold == b.trees[t].nodes[i].threshold);
            CHECK(a.trees[t].nodes[i].value == b.trees[t].nodes[i].value);
        }
    }
}

TEST_CASE("boosting with zero learning rate predicts the training mean") {
    std::mt19937_64 rng(65);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(70, 3, rng, x, y);
    BoostingSpec spec;
    spec.n_trees = 10;
    spec.learning_rate = 0.0;
    spec.max_depth = 3;
    const BoostingModel m = fit_gradient_boosting(x, y, spec);
    for (int i = 0; i < 10; ++i) {
        const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
        CHECK(m.predict(std::span<const double>(row, 3)) == doctest::Approx(y.mean()).epsilon(1e-12));
    }
}

TEST_CASE("one deep greedy stage at unit rate drives training residuals to zero") {
    std::mt19937_64 rng(66);
    Eigen::MatrixXd x(16, 2);
    Eigen::VectorXd y(16);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 16; ++i) {
        x(i, 0) = i;  // distinct values, fully separable
        x(i, 1) = normal(rng);
        y(i) = normal(rng);
    }
    BoostingSpec spec;
    spec.n_trees = 1;
    spec.learning_rate = 1.0;
    spec.max_depth = 30;
    const BoostingModel m = fit_gradient_boosting(x, y, spec);
    for (int i = 0; i < 16; ++i) {
        const double row[2] = {x(i, 0), x(i, 1)};
        CHECK(m.predict(std::span<const double>(row, 2)) == doctest::Approx(y(i)).epsilon(1e-10));
    }
}

TEST_CASE("boosting training loss is non-increasing without subsampling") {
    std::mt19937_64 rng(67);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(150, 3, rng, x, y);
    BoostingSpec spec;
    spec.n_trees = 40;
    spec.learning_rate = 0.2;
    spec.max_depth = 3;
    spec.subsample = 1.0;
    spec.feature_fraction = 1.0;
    const BoostingModel m = fit_gradient_boosting(x, y, spec);

    // Replay stage by stage.
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(150, m.base);
    double prev = (y - pred).squaredNorm();
    for (const auto& tree : m.trees) {
        for (int i = 0; i < 150; ++i) {
            const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
            pred(i) += m.learning_rate * tree.predict(std::span<const double>(row, 3));
        }
        const double loss = (y - pred).squaredNorm();
        CHECK(loss <= prev + 1e-9);
        prev = loss;
    }
}

TEST_CASE("multilayer: single-region panel equals a plain forest") {
    std::mt19937_64 rng(68);
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    make_data(100, 3, rng, x, y);
    std::vector<Region> regions(100, Region::EMAsia);
    ForestSpec spec;
    spec.n_trees = 5;
    spec.bootstrap = false;
    spec.limits.max_depth = 4;
    spec.seed = 21;
    const MultilayerModel ml = fit_multilayer(x, y, regions, {{Region::EMAsia, spec}});
    const Forest plain = fit_forest(x, y, spec);
    for (int i = 0; i < 10; ++i) {
        const double row[3] = {x(i, 0), x(i, 1), x(i, 2)};
        const std::span<const double> xs(row, 3);
        CHECK(ml.predict(xs, Region::EMAsia) == doctest::Approx(plain.predict(xs)).epsilon(1e-15));
    }
    CHECK_THROWS_AS(ml.predict({x.row(0).data(), 3}, Region::EMLatam), ValidationError);
}

TEST_CASE("multilayer per-group fit beats a pooled forest on heterogeneous groups") {
    std::mt19937_64 rng(69);
    std::normal_distribution<double> normal;
    const int n = 400;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    std::vector<Region> regions;
    for (int i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        const bool asia = i % 2 == 0;
        regions.push_back(asia ? Region::EMAsia : Region::EMLatam);
        // Opposite signs per group: a pooled model must compromise.
        y(i) = (asia ? 2.0 : -2.0) * x(i, 0) + 0.1 * normal(rng);
    }
    ForestSpec spec;
    spec.n_trees = 30;
    spec.bootstrap = false;
    spec.limits.max_depth = 6;
    spec.seed = 3;
    const MultilayerModel ml =
        fit_multilayer(x, y, regions, {{Region::EMAsia, spec}, {Region::EMLatam, spec}});
    const Forest pooled = fit_forest(x, y, spec);
    for (Region group : {Region::EMAsia, Region::EMLatam}) {
        double ml_sse = 0.0, pooled_sse = 0.0;
        for (int i = 0; i < n; ++i) {
            if (regions[static_cast<std::size_t>(i)] != group) continue;
            const double row[2] = {x(i, 0), x(i, 1)};
            const std::span<const double> xs(row, 2);
            ml_sse += std::pow(y(i) - ml.predict(xs, group), 2);
            pooled_sse += std::pow(y(i) - pooled.predict(xs), 2);
        }
        CHECK(ml_sse <= pooled_sse);
    }
}
