#pragma once

#include "hct/similarity.hpp"
#include "hct/tree.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace hct {

struct CostNodeEntry {
    int node_index = 0;      // preorder index
    int leaf_count = 0;
    double child_cut = 0.0;  // cut between the two child leaf sets
};

/// Hierarchy cost: sum over internal nodes of leaf_count x cut(left, right),
/// which counts every unordered pair once at its lowest common ancestor.
struct CostReport {
    double total_cost = 0.0;
    std::vector<CostNodeEntry> per_node;
    bool implicit_mode = true;
    std::int64_t clamped_pair_warning_count = 0;
};

/// Fast cost evaluation. Implicit mode computes each child cut from
/// aggregate row sums (O(n d log n) for balanced trees); explicit mode sums
/// cross weights. The view's points must exactly cover the tree's leaves.
CostReport cost(const HCTree& tree, const SimilarityView& view);

/// Literal evaluation through lowest-common-ancestor leaf counts over all
/// unordered pairs, with raw (unclamped) pairwise similarities. n <= 2000.
double brute_force_cost(const HCTree& tree, const SimilarityView& view);

/// Mean over clusters of the plurality-label fraction.
double purity(const std::vector<int>& assignment, const std::vector<int>& labels);

struct ClassReport {
    struct PerClass {
        int cls = 0;
        double precision = 0.0, recall = 0.0, f1 = 0.0;
    };
    std::vector<PerClass> per_class;            // classes present in truth
    double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
    std::map<std::pair<int, int>, int> confusion;  // (truth, predicted) -> count
    double accuracy = 0.0;
};

/// One-vs-rest precision/recall/F1 per truth class; macro values are
/// unweighted means. F1 is 0 when precision and recall are both 0.
ClassReport classification_report(const std::vector<int>& predicted,
                                  const std::vector<int>& truth);

}  // namespace hct
