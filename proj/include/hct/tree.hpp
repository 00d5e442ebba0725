#pragma once

#include "hct/dataset.hpp"
#include "hct/similarity.hpp"
#include "hct/split_rules.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hct {

struct TreeNode {
    int leaf_count = 0;
    std::optional<Eigen::VectorXd> direction;
    std::optional<double> threshold;
    std::optional<Eigen::VectorXd> degree_context;  // frozen row sum (EV/AEV)
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::vector<int> point_ids;                     // leaves only

    bool is_leaf() const { return !left; }
};

struct BuildStats {
    int node_count = 0;
    int depth = 0;
    int degenerate_splits = 0;
};

struct ClassifyResult {
    int label = -1;
    int candidate_count = 0;
    double mean_knn_distance = 0.0;  // mean distance to the k used neighbors
    std::vector<int> neighbor_ids;   // the k used neighbors, nearest first
};

/// Immutable binary cluster tree. Internal nodes carry (direction, threshold,
/// leaf count); EV/AEV nodes additionally freeze the subset row sum used for
/// degree normalization so stored decisions replay the build partition
/// exactly. Leaves hold point ids. Graph-mode trees have no hyperplanes and
/// are not queryable.
class HCTree {
public:
    static HCTree build(const VectorDataset& data, const BuildConfig& config);
    static HCTree build(const ExplicitGraph& graph, const BuildConfig& config);

    /// Wraps an externally constructed node structure (leaf counts must be
    /// consistent). Used for trees that do not come from a splitting rule.
    static HCTree from_root(std::unique_ptr<TreeNode> root, int n, int dim,
                            bool vector_mode);

    bool queryable() const { return vector_mode_; }
    int n() const { return n_; }
    int dim() const { return dim_; }
    const BuildConfig& config() const { return config_; }
    const TreeNode& root() const { return *root_; }
    const BuildStats& stats() const { return stats_; }

    int depth() const { return stats_.depth; }
    int leaf_count() const;
    std::vector<std::vector<int>> leaves() const;  // point ids per leaf, preorder

    /// Descends by the stored decisions and returns all point ids under the
    /// first node that is a leaf or holds fewer than `bucket` points.
    std::vector<int> query(const Eigen::VectorXd& x, int bucket) const;

    /// Number of nodes on the query descent path (inclusive of the stop).
    int query_path_nodes(const Eigen::VectorXd& x, int bucket) const;

    /// Brute-force Euclidean kNN majority vote within the query bucket,
    /// against the training matrix the tree was built over. Vote ties break
    /// by smaller cumulative distance, then smaller class id.
    ClassifyResult classify(const VectorDataset& train, const Eigen::VectorXd& x,
                            int k, int bucket) const;

    void save(const std::string& path) const;
    static HCTree load(const std::string& path);
    std::string to_json() const;
    static HCTree from_json(const std::string& text);

private:
    HCTree() = default;
    static HCTree build_common(const SimilarityView& view, const BuildConfig& config,
                               int n, int dim, bool vector_mode);
    const TreeNode* descend(const Eigen::VectorXd& x, int bucket, int* visited) const;

    std::unique_ptr<TreeNode> root_;
    BuildConfig config_;
    BuildStats stats_;
    int n_ = 0;
    int dim_ = 0;
    bool vector_mode_ = true;
};

}  // namespace hct
