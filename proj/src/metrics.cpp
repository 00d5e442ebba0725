#include "hct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace hct {

namespace {

// Position (within the view) of every leaf id, and the coverage check.
std::unordered_map<int, int> leaf_position_map(const HCTree& tree,
                                               const SimilarityView& view) {
    std::unordered_map<int, int> id_to_pos;
    id_to_pos.reserve(view.ids().size());
    for (int p = 0; p < view.size(); ++p) id_to_pos[view.ids()[p]] = p;

    std::vector<int> tree_ids;
    for (const auto& leaf : tree.leaves()) {
        tree_ids.insert(tree_ids.end(), leaf.begin(), leaf.end());
    }
    if (static_cast<int>(tree_ids.size()) != view.size()) {
        throw std::invalid_argument("tree leaves do not cover the view's points");
    }
    std::vector<char> seen(view.size(), 0);
    for (int id : tree_ids) {
        auto it = id_to_pos.find(id);
        if (it == id_to_pos.end() || seen[it->second]) {
            throw std::invalid_argument("tree leaves do not cover the view's points");
        }
        seen[it->second] = 1;
    }
    return id_to_pos;
}

struct CostWalker {
    const SimilarityView* view;
    const std::unordered_map<int, int>* id_to_pos;
    CostReport* report;
    int next_index = 0;

    // Returns the positions under `node`; implicit mode also returns the
    // aggregate row sum so child cuts cost O(d) each.
    std::pair<std::vector<int>, Eigen::VectorXd> walk(const TreeNode& node) {
        const int index = next_index++;
        if (node.is_leaf()) {
            std::vector<int> positions;
            positions.reserve(node.point_ids.size());
            Eigen::VectorXd agg;
            if (view->is_implicit()) agg = Eigen::VectorXd::Zero(view->dim());
            for (int id : node.point_ids) {
                const int pos = id_to_pos->at(id);
                positions.push_back(pos);
                if (view->is_implicit()) agg += view->rows().row(pos);
            }
            return {std::move(positions), std::move(agg)};
        }

        auto [left_pos, left_agg] = walk(*node.left);
        auto [right_pos, right_agg] = walk(*node.right);

        double cut = 0.0;
        if (view->is_implicit()) {
            cut = left_agg.dot(right_agg);
            if (cut < 0.0) {
                view->note_clamp();
                ++report->clamped_pair_warning_count;
                cut = 0.0;
            }
        } else {
            const auto& w = view->graph().weights;
            const auto& ids = view->ids();
            for (int lp : left_pos) {
                const auto row = w.row(ids[lp]);
                for (int rp : right_pos) cut += row[ids[rp]];
            }
        }
        report->per_node.push_back({index, node.leaf_count, cut});
        report->total_cost += static_cast<double>(node.leaf_count) * cut;

        left_pos.insert(left_pos.end(), right_pos.begin(), right_pos.end());
        Eigen::VectorXd agg;
        if (view->is_implicit()) agg = left_agg + right_agg;
        return {std::move(left_pos), std::move(agg)};
    }
};

}  // namespace

CostReport cost(const HCTree& tree, const SimilarityView& view) {
    auto id_to_pos = leaf_position_map(tree, view);
    CostReport report;
    report.implicit_mode = view.is_implicit();
    CostWalker walker{&view, &id_to_pos, &report};
    walker.walk(tree.root());
    return report;
}

double brute_force_cost(const HCTree& tree, const SimilarityView& view) {
    const int n = view.size();
    if (n > 2000) throw std::invalid_argument("brute-force cost limited to n <= 2000");
    auto id_to_pos = leaf_position_map(tree, view);

    // Flatten: per node parent and leaf_count; per position its leaf node.
    std::vector<const TreeNode*> nodes;
    std::vector<int> parent;
    std::vector<int> depth;
    std::vector<int> leaf_of(n, -1);
    std::function<void(const TreeNode&, int, int)> walk = [&](const TreeNode& node,
                                                              int parent_idx, int d) {
        const int idx = static_cast<int>(nodes.size());
        nodes.push_back(&node);
        parent.push_back(parent_idx);
        depth.push_back(d);
        if (node.is_leaf()) {
            for (int id : node.point_ids) leaf_of[id_to_pos.at(id)] = idx;
            return;
        }
        walk(*node.left, idx, d + 1);
        walk(*node.right, idx, d + 1);
    };
    walk(tree.root(), -1, 0);

    auto lca = [&](int a, int b) {
        while (a != b) {
            if (depth[a] >= depth[b]) a = parent[a];
            else b = parent[b];
        }
        return a;
    };

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double c = view.pair_similarity(i, j);
            if (c == 0.0) continue;
            total += c * nodes[lca(leaf_of[i], leaf_of[j])]->leaf_count;
        }
    }
    return total;
}

double purity(const std::vector<int>& assignment, const std::vector<int>& labels) {
    if (assignment.size() != labels.size() || assignment.empty()) {
        throw std::invalid_argument("assignment and labels must be nonempty and equal length");
    }
    std::map<int, std::map<int, int>> counts;  // cluster -> label -> count
    for (size_t i = 0; i < assignment.size(); ++i) {
        counts[assignment[i]][labels[i]] += 1;
    }
    double acc = 0.0;
    for (const auto& [cluster, label_counts] : counts) {
        int size = 0, best = 0;
        for (const auto& [label, c] : label_counts) {
            size += c;
            best = std::max(best, c);
        }
        acc += static_cast<double>(best) / size;
    }
    return acc / static_cast<double>(counts.size());
}

ClassReport classification_report(const std::vector<int>& predicted,
                                  const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("length mismatch");
    if (truth.empty()) throw std::invalid_argument("empty truth");

    ClassReport report;
    std::map<int, int> truth_count, predicted_count, correct_count;
    int correct_total = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        report.confusion[{truth[i], predicted[i]}] += 1;
        truth_count[truth[i]] += 1;
        predicted_count[predicted[i]] += 1;
        if (truth[i] == predicted[i]) {
            correct_count[truth[i]] += 1;
            ++correct_total;
        }
    }
    report.accuracy = static_cast<double>(correct_total) / truth.size();

    for (const auto& [cls, support] : truth_count) {
        const int tp = correct_count.count(cls) ? correct_count[cls] : 0;
        const int pred = predicted_count.count(cls) ? predicted_count[cls] : 0;
        ClassReport::PerClass pc;
        pc.cls = cls;
        pc.precision = pred > 0 ? static_cast<double>(tp) / pred : 0.0;
        pc.recall = static_cast<double>(tp) / support;
        pc.f1 = (pc.precision + pc.recall > 0.0)
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        report.per_class.push_back(pc);
        report.macro_p += pc.precision;
        report.macro_r += pc.recall;
        report.macro_f1 += pc.f1;
    }
    const double k = static_cast<double>(report.per_class.size());
    report.macro_p /= k;
    report.macro_r /= k;
    report.macro_f1 /= k;
    return report;
}

}  // namespace hct
