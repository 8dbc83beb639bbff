#include "riskpanel/treeshap.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "riskpanel/errors.hpp"

namespace riskpanel {

namespace {

// One unique feature on the current root-to-node path. `one` is the product
// of branch indicators for x (0 or 1), `zero` the product of cover ratios.
struct PathElement {
    int feature;
    double zero;
    double one;
};

constexpr int kMaxFactorial = 64;

const std::array<double, kMaxFactorial>& factorials() {
    static const auto table = [] {
        std::array<double, kMaxFactorial> t{};
        t[0] = 1.0;
        for (int i = 1; i < kMaxFactorial; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] * i;
        return t;
    }();
    return table;
}

// Subset-sum polynomial over the path elements: poly[s] is the sum over
// coalitions S of size s of prod_{k in S} one_k * prod_{k not in S} zero_k.
std::vector<double> extend(const std::vector<double>& poly, double zero, double one) {
    std::vector<double> out(poly.size() + 1, 0.0);
    for (std::size_t s = 0; s < poly.size(); ++s) {
        out[s] += poly[s] * zero;
        out[s + 1] += poly[s] * one;
    }
    return out;
}

// Inverse of extend: removes one (zero, one) element from the polynomial.
std::vector<double> divide_out(const std::vector<double>& poly, double zero, double one) {
    const std::size_t d = poly.size() - 1;  // remaining element count
    std::vector<double> out(d, 0.0);
    if (one != 0.0) {
        out[d - 1] = poly[d] / one;
        for (std::size_t s = d - 1; s > 0; --s) out[s - 1] = (poly[s] - out[s] * zero) / one;
    } else {
        for (std::size_t s = 0; s < d; ++s) out[s] = poly[s] / zero;
    }
    return out;
}

struct ShapEngine {
    const Tree& tree;
    std::span<const double> x;
    std::span<double> phi;
    int condition_feature = -1;  // -1: unconditioned
    int condition = 0;           // +1 present, -1 absent

    void run() {
        if (tree.empty()) return;
        recurse(0, {}, {1.0}, 1.0);
    }

    void recurse(int index, std::vector<PathElement> path, std::vector<double> poly,
                 double condition_weight) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        if (node.feature < 0) {
            settle_leaf(path, poly, node.value * condition_weight);
            return;
        }
        if (node.cover <= 0.0) throw NumericError("tree_shap: zero cover at internal node");
        const TreeNode& left = tree.nodes[static_cast<std::size_t>(node.left)];
        const TreeNode& right = tree.nodes[static_cast<std::size_t>(node.right)];
        const bool goes_left = x[static_cast<std::size_t>(node.feature)] < node.threshold;
        const int hot = goes_left ? node.left : node.right;
        const int cold = goes_left ? node.right : node.left;
        const double hot_ratio = (goes_left ? left.cover : right.cover) / node.cover;
        const double cold_ratio = (goes_left ? right.cover : left.cover) / node.cover;
        if (hot_ratio <= 0.0 || cold_ratio <= 0.0)
            throw NumericError("tree_shap: zero cover at internal node");

        if (node.feature == condition_feature) {
            if (condition > 0) {
                recurse(hot, std::move(path), std::move(poly), condition_weight);
            } else {
                recurse(hot, path, poly, condition_weight * hot_ratio);
                recurse(cold, std::move(path), std::move(poly), condition_weight * cold_ratio);
            }
            return;
        }

        // A feature revisited deeper on the path folds multiplicatively into
        // its existing element.
        double prev_zero = 1.0, prev_one = 1.0;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (path[i].feature == node.feature) {
                prev_zero = path[i].zero;
                prev_one = path[i].one;
                poly = divide_out(poly, prev_zero, prev_one);
                path.erase(path.begin() + static_cast<std::ptrdiff_t>(i));
                break;
            }
        }

        {
            auto hot_path = path;
            hot_path.push_back({node.feature, prev_zero * hot_ratio, prev_one});
            auto hot_poly = extend(poly, prev_zero * hot_ratio, prev_one);
            recurse(hot, std::move(hot_path), std::move(hot_poly), condition_weight);
        }
        {
            path.push_back({node.feature, prev_zero * cold_ratio, 0.0});
            poly = extend(poly, prev_zero * cold_ratio, 0.0);
            recurse(cold, std::move(path), std::move(poly), condition_weight);
        }
    }

    void settle_leaf(const std::vector<PathElement>& path, const std::vector<double>& poly,
                     double leaf_value) {
        const std::size_t d = path.size();
        if (d == 0) return;  // single-leaf tree: nothing to attribute
        const auto& fact = factorials();
        for (const PathElement& el : path) {
            const std::vector<double> rest = divide_out(poly, el.zero, el.one);
            double weighted = 0.0;
            for (std::size_t s = 0; s < d; ++s)
                weighted += fact[s] * fact[d - 1 - s] / fact[d] * rest[s];
            phi[static_cast<std::size_t>(el.feature)] += leaf_value * (el.one - el.zero) * weighted;
        }
    }
};

}  // namespace

double tree_shap_values(const Tree& tree, std::span<const double> x, std::span<double> phi) {
    ShapEngine engine{tree, x, phi};
    engine.run();
    return tree.expected_value();
}

void tree_shap_conditioned(const Tree& tree, std::span<const double> x, int condition_feature,
                           int condition, std::span<double> phi) {
    ShapEngine engine{tree, x, phi, condition_feature, condition};
    engine.run();
}

Eigen::MatrixXd tree_shap_interactions(const Tree& tree, std::span<const double> x,
                                       int n_features) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_features, n_features);
    const auto used = tree.used_features();

    // Off-diagonal: phi_ij = (phi_j | i present  -  phi_j | i absent) / 2,
    // computed only for used i (unused features are dummies in both games).
    std::vector<double> present(static_cast<std::size_t>(n_features));
    std::vector<double> absent(static_cast<std::size_t>(n_features));
    Eigen::MatrixXd half = Eigen::MatrixXd::Zero(n_features, n_features);
    for (int i : used) {
        std::fill(present.begin(), present.end(), 0.0);
        std::fill(absent.begin(), absent.end(), 0.0);
        tree_shap_conditioned(tree, x, i, +1, present);
        tree_shap_conditioned(tree, x, i, -1, absent);
        for (int j = 0; j < n_features; ++j) {
            if (j == i) continue;
            half(i, j) = (present[static_cast<std::size_t>(j)] - absent[static_cast<std::size_t>(j)]) / 2.0;
        }
    }
    out = (half + half.transpose()) / 2.0;

    // Diagonal: own effect phi_jj = phi_j - sum_{i != j} phi_ij.
    std::vector<double> phi(static_cast<std::size_t>(n_features), 0.0);
    tree_shap_values(tree, x, phi);
    for (int j = 0; j < n_features; ++j)
        out(j, j) = phi[static_cast<std::size_t>(j)] - (out.col(j).sum() - out(j, j));
    return out;
}

}  // namespace riskpanel
