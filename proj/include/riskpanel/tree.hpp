#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace riskpanel {

// Binary regression tree node. feature < 0 marks a leaf. Rows with
// x[feature] < threshold go left, the rest go right. cover counts the
// training rows routed through the node; attribution relies on it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double cover = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool empty() const { return nodes.empty(); }
    bool is_leaf(int i) const { return nodes[static_cast<std::size_t>(i)].feature < 0; }
    double predict(std::span<const double> x) const;

    // Cover-weighted expectation of the tree output (the base value used by
    // attribution). Throws NumericError if an internal node has zero cover.
    double expected_value() const;

    // Sorted list of features used by at least one internal node.
    std::vector<int> used_features() const;
};

struct TreeLimits {
    int max_depth = 1 << 20;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    double feature_fraction = 1.0;  // candidate share per split, ceil(f * M)
    bool random_thresholds = false; // one uniform threshold per candidate
    std::uint64_t seed = 0;
};

// Greedy variance-reduction fit on rows (indices into x/y) over the given
// candidate features. Split ties break toward the lowest feature index, then
// the lowest threshold. Degenerate nodes become leaves; never throws on data.
Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int> rows,
              std::vector<int> features, const TreeLimits& limits);

}  // namespace riskpanel
