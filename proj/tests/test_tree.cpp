#include <numeric>
#include <random>

#include "doctest.h"
#include "riskpanel/tree.hpp"
#include "support.hpp"

using namespace riskpanel;

namespace {

std::vector<int> iota_rows(Eigen::Index n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Exhaustive best-split oracle: every feature, every midpoint between
// consecutive sorted distinct values, weighted child SSE.
struct OracleSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;
};

OracleSplit oracle_best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int min_leaf) {
    OracleSplit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int f = 0; f < x.cols(); ++f) {
        std::vector<double> values(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index r = 0; r < x.rows(); ++r) values[static_cast<std::size_t>(r)] = x(r, f);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = values[i] + (values[i + 1] - values[i]) / 2.0;
            std::vector<double> left, right;
            for (Eigen::Index r = 0; r < x.rows(); ++r)
                (x(r, f) < thr ? left : right).push_back(y(r));
            if (static_cast<int>(left.size()) < min_leaf || static_cast<int>(right.size()) < min_leaf)
                continue;
            auto sse = [](const std::vector<double>& v) {
                double s = 0, ss = 0;
                for (double q : v) {
                    s += q;
                    ss += q * q;
                }
                return ss - s * s / static_cast<double>(v.size());
            };
            const double total = sse(left) + sse(right);
            if (total < best.sse - 1e-12) {
                best = {true, f, thr, total};
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("pure target yields a single leaf") {
    Eigen::MatrixXd x(5, 2);
    x.setRandom();
    Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 3.25);
    const Tree t = fit_tree(x, y, iota_rows(5), {0, 1}, {});
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
    CHECK(t.nodes[0].value == doctest::Approx(3.25));
    CHECK(t.nodes[0].cover == 5.0);
}

TEST_CASE("xor interaction solved exactly at depth 2") {
    Eigen::MatrixXd x(8, 2);
    Eigen::VectorXd y(8);
    int r = 0;
    for (double a : {0.0, 1.0})
        for (double b : {0.0, 1.0})
            for (int rep = 0; rep < 2; ++rep) {
                x(r, 0) = a;
                x(r, 1) = b;
                y(r) = (a != b) ? 1.0 : 0.0;
                ++r;
            }
    TreeLimits limits;
    limits.max_depth = 2;
    const Tree t = fit_tree(x, y, iota_rows(8), {0, 1}, limits);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double row[2] = {x(i, 0), x(i, 1)};
        CHECK(t.predict(std::span<const double>(row, 2)) == doctest::Approx(y(i)));
    }
}

TEST_CASE("root split matches the exhaustive oracle") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 30 + static_cast<int>(rng() % 20);
        Eigen::MatrixXd x(n, 3);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
            y(i) = x(i, 0) > 0.3 ? 2.0 + normal(rng) : normal(rng);
        }
        TreeLimits limits;
        limits.max_depth = 1;
        limits.min_samples_leaf = 2;
        const Tree t = fit_tree(x, y, iota_rows(n), {0, 1, 2}, limits);
        const OracleSplit oracle = oracle_best_split(x, y, 2);
        REQUIRE(oracle.found);
        REQUIRE(t.nodes[0].feature >= 0);
        CHECK(t.nodes[0].feature == oracle.feature);
        CHECK(t.nodes[0].threshold == doctest::Approx(oracle.threshold).epsilon(1e-12));
    }
}

TEST_CASE("cover bookkeeping: parent equals sum of children everywhere") {
    std::mt19937_64 rng(52);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(200, 4);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 4; ++j) x(i, j) = normal(rng);
        y(i) = x(i, 1) * x(i, 2) + normal(rng);
    }
    TreeLimits limits;
    limits.max_depth = 6;
    limits.seed = 7;
    const Tree t = fit_tree(x, y, iota_rows(200), {0, 1, 2, 3}, limits);
    int internal = 0;
    for (const auto& node : t.nodes) {
        if (node.feature < 0) continue;
        ++internal;
        CHECK(node.cover == t.nodes[static_cast<std::size_t>(node.left)].cover +
                                t.nodes[static_cast<std::size_t>(node.right)].cover);
    }
    CHECK(internal > 0);
}

TEST_CASE("min_samples_leaf is honored") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(60, 2);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        y(i) = normal(rng);
    }
    TreeLimits limits;
    limits.min_samples_leaf = 7;
    limits.max_depth = 10;
    const Tree t = fit_tree(x, y, iota_rows(60), {0, 1}, limits);
    for (const auto& node : t.nodes)
        if (node.feature < 0) CHECK(node.cover >= 7.0);
}

TEST_CASE("extra-trees mode splits with random thresholds deterministically") {
    std::mt19937_64 rng(54);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(80, 3);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
        y(i) = 2.0 * x(i, 0) + normal(rng);
    }
    TreeLimits limits;
    limits.random_thresholds = true;
    limits.max_depth = 4;
    limits.seed = 99;
    const Tree a = fit_tree(x, y, iota_rows(80), {0, 1, 2}, limits);
    const Tree b = fit_tree(x, y, iota_rows(80), {0, 1, 2}, limits);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].feature == b.nodes[i].feature);
        CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
        CHECK(a.nodes[i].value == b.nodes[i].value);
    }
    // Thresholds must lie inside the node's value range for the split feature.
    REQUIRE(a.nodes[0].feature >= 0);
    const int f = a.nodes[0].feature;
    CHECK(a.nodes[0].threshold >= x.col(f).minCoeff());
    CHECK(a.nodes[0].threshold <= x.col(f).maxCoeff());
}
