#include "riskpanel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "riskpanel/errors.hpp"

namespace riskpanel {

double Tree::predict(std::span<const double> x) const {
    int i = 0;
    while (!is_leaf(i)) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double Tree::expected_value() const {
    double total = 0.0;
    // Iterative weighted descent; weights multiply cover ratios.
    std::vector<std::pair<int, double>> stack{{0, 1.0}};
    while (!stack.empty()) {
        auto [i, w] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) {
            total += w * n.value;
            continue;
        }
        if (n.cover <= 0.0) throw NumericError("tree: zero cover at internal node");
        const TreeNode& l = nodes[static_cast<std::size_t>(n.left)];
        const TreeNode& r = nodes[static_cast<std::size_t>(n.right)];
        stack.push_back({n.left, w * l.cover / n.cover});
        stack.push_back({n.right, w * r.cover / n.cover});
    }
    return total;
}

std::vector<int> Tree::used_features() const {
    std::vector<int> out;
    for (const auto& n : nodes)
        if (n.feature >= 0) out.push_back(n.feature);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
};

struct Builder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const TreeLimits& limits;
    std::mt19937_64 rng;
    Tree tree;

    std::vector<int> candidate_features(const std::vector<int>& features) {
        const auto m = static_cast<double>(features.size());
        const auto take = static_cast<std::size_t>(
            std::min(m, std::max(1.0, std::ceil(limits.feature_fraction * m))));
        if (take >= features.size()) return features;
        std::vector<int> pool = features;
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        pool.resize(take);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    // Exhaustive midpoint scan; Extra-Trees mode draws one uniform threshold
    // per candidate instead.
    SplitChoice best_split(std::span<int> rows, const std::vector<int>& candidates) {
        SplitChoice best;
        const auto n = rows.size();
        double sum = 0.0;
        for (int r : rows) sum += y(r);

        std::vector<std::pair<double, double>> vals(n);  // (x, y) sorted per feature
        for (int f : candidates) {
            if (limits.random_thresholds) {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (int r : rows) {
                    lo = std::min(lo, x(r, f));
                    hi = std::max(hi, x(r, f));
                }
                if (lo >= hi) continue;
                std::uniform_real_distribution<double> dist(lo, hi);
                const double thr = dist(rng);
                double sum_l = 0.0;
                std::size_t n_l = 0;
                for (int r : rows) {
                    if (x(r, f) < thr) {
                        sum_l += y(r);
                        ++n_l;
                    }
                }
                const std::size_t n_r = n - n_l;
                if (n_l < static_cast<std::size_t>(limits.min_samples_leaf) ||
                    n_r < static_cast<std::size_t>(limits.min_samples_leaf))
                    continue;
                const double sum_r = sum - sum_l;
                const double score = sum_l * sum_l / static_cast<double>(n_l) +
                                     sum_r * sum_r / static_cast<double>(n_r);
                consider(best, score, f, thr);
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) vals[i] = {x(rows[i], f), y(rows[i])};
            std::sort(vals.begin(), vals.end());
            double sum_l = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                sum_l += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t n_l = i + 1, n_r = n - n_l;
                if (n_l < static_cast<std::size_t>(limits.min_samples_leaf) ||
                    n_r < static_cast<std::size_t>(limits.min_samples_leaf))
                    continue;
                const double sum_r = sum - sum_l;
                const double score = sum_l * sum_l / static_cast<double>(n_l) +
                                     sum_r * sum_r / static_cast<double>(n_r);
                const double thr = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
                consider(best, score, f, thr);
            }
        }
        return best;
    }

    static void consider(SplitChoice& best, double score, int feature, double threshold) {
        // Candidates arrive in ascending (feature, threshold) order for the
        // scan path, so strict improvement implements the tie-break. The
        // random-threshold path can present any order; compare explicitly.
        if (!best.found || score > best.gain ||
            (score == best.gain &&
             (feature < best.feature || (feature == best.feature && threshold < best.threshold)))) {
            best.found = true;
            best.gain = score;
            best.feature = feature;
            best.threshold = threshold;
        }
    }

    int build(std::span<int> rows, const std::vector<int>& features, int depth) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const auto n = rows.size();
        double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int r : rows) {
            sum += y(r);
            lo = std::min(lo, y(r));
            hi = std::max(hi, y(r));
        }
        tree.nodes[static_cast<std::size_t>(index)].cover = static_cast<double>(n);
        tree.nodes[static_cast<std::size_t>(index)].value = sum / static_cast<double>(n);

        const bool pure = lo == hi;
        if (pure || depth >= limits.max_depth ||
            n < static_cast<std::size_t>(limits.min_samples_split) ||
            n < 2 * static_cast<std::size_t>(limits.min_samples_leaf))
            return index;

        const auto candidates = candidate_features(features);
        const SplitChoice split = best_split(rows, candidates);
        if (!split.found) return index;

        auto mid = std::stable_partition(rows.begin(), rows.end(), [&](int r) {
            return x(r, split.feature) < split.threshold;
        });
        const auto n_left = static_cast<std::size_t>(mid - rows.begin());
        if (n_left == 0 || n_left == n) return index;  // numerically empty side

        tree.nodes[static_cast<std::size_t>(index)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = split.threshold;
        const int left = build(rows.subspan(0, n_left), features, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build(rows.subspan(n_left), features, depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

}  // namespace

Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int> rows,
              std::vector<int> features, const TreeLimits& limits) {
    if (rows.empty()) throw ValidationError("fit_tree: no training rows");
    if (features.empty()) throw ValidationError("fit_tree: no candidate features");
    if (limits.max_depth < 1 || limits.min_samples_split < 2 || limits.min_samples_leaf < 1 ||
        limits.feature_fraction <= 0.0 || limits.feature_fraction > 1.0)
        throw ValidationError("fit_tree: invalid limits");
    std::sort(features.begin(), features.end());
    Builder builder{x, y, limits, std::mt19937_64(limits.seed), Tree{}};
    builder.build(std::span<int>(rows), features, 0);
    return builder.tree;
}

}  // namespace riskpanel
