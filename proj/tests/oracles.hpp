// Independent brute-force oracles for the test suites. Everything here
// recomputes results from first principles (pair loops, dense solvers,
// exhaustive enumeration) without touching the aggregate-based paths under
// test.
#pragma once

#include "hct/dataset.hpp"
#include "hct/similarity.hpp"
#include "hct/tree.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// Pairwise similarity of view positions via the raw pair loop.
inline double brute_cut(const hct::SimilarityView& view, const std::vector<int>& left) {
    std::vector<char> in_left(view.size(), 0);
    for (int p : left) in_left[p] = 1;
    double cut = 0.0;
    for (int i = 0; i < view.size(); ++i) {
        if (!in_left[i]) continue;
        for (int j = 0; j < view.size(); ++j) {
            if (!in_left[j]) cut += view.pair_similarity(i, j);
        }
    }
    return cut;
}

inline Eigen::VectorXd brute_degrees(const hct::SimilarityView& view) {
    Eigen::VectorXd d(view.size());
    for (int i = 0; i < view.size(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < view.size(); ++j) acc += view.pair_similarity(i, j);
        d[i] = acc;
    }
    return d;
}

inline double brute_conductance(const hct::SimilarityView& view, const std::vector<int>& left) {
    const Eigen::VectorXd d = brute_degrees(view);
    double vol_left = 0.0;
    for (int p : left) vol_left += d[p];
    return brute_cut(view, left) / std::min(vol_left, d.sum() - vol_left);
}

// Dense symmetric eigensolver oracle (library path, independent of the
// artifact's Jacobi implementation). Values descending.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> dense_eigen(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    return {values, vectors};
}

inline Eigen::MatrixXd normalized_adjacency(const hct::ExplicitGraph& g) {
    Eigen::VectorXd inv_sqrt = g.degree.cwiseSqrt().cwiseInverse();
    return inv_sqrt.asDiagonal() * g.weights * inv_sqrt.asDiagonal();
}

// Exact kNN majority vote with the same tie conventions the tree documents:
// neighbors ordered by (distance, id); vote ties by cumulative distance,
// then smaller class id.
inline int brute_knn_classify(const hct::VectorDataset& train, const Eigen::VectorXd& x,
                              int k) {
    std::vector<std::pair<double, int>> by_distance;
    by_distance.reserve(train.n());
    for (int id = 0; id < train.n(); ++id) {
        by_distance.emplace_back((train.points.row(id).transpose() - x).norm(), id);
    }
    const int used = std::min<int>(k, train.n());
    std::partial_sort(by_distance.begin(), by_distance.begin() + used, by_distance.end());
    std::map<int, std::pair<int, double>> votes;
    for (int i = 0; i < used; ++i) {
        auto& entry = votes[(*train.labels)[by_distance[i].second]];
        entry.first += 1;
        entry.second += by_distance[i].first;
    }
    int best_label = -1, best_count = -1;
    double best_cum = 0.0;
    for (const auto& [cls, entry] : votes) {
        if (entry.first > best_count ||
            (entry.first == best_count &&
             (entry.second < best_cum || (entry.second == best_cum && cls < best_label)))) {
            best_label = cls;
            best_count = entry.first;
            best_cum = entry.second;
        }
    }
    return best_label;
}

// Nearest empirical class centroid.
inline int nearest_centroid_label(const hct::VectorDataset& data, const Eigen::VectorXd& x) {
    std::map<int, std::pair<Eigen::VectorXd, int>> sums;
    for (int i = 0; i < data.n(); ++i) {
        auto it = sums.find((*data.labels)[i]);
        if (it == sums.end()) {
            sums.emplace((*data.labels)[i],
                         std::make_pair(Eigen::VectorXd(data.points.row(i).transpose()), 1));
        } else {
            it->second.first += data.points.row(i).transpose();
            it->second.second += 1;
        }
    }
    int best = -1;
    double best_d = 0.0;
    for (const auto& [cls, sum] : sums) {
        const double d = (sum.first / sum.second - x).norm();
        if (best < 0 || d < best_d) {
            best = cls;
            best_d = d;
        }
    }
    return best;
}

// Random explicit graph with strictly positive degrees; weighted draws come
// from [0.2, 1] so entries stay inside [0,1].
inline hct::ExplicitGraph random_graph(int n, double edge_prob, bool weighted,
                                       std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.2, 1.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (unif(rng) < edge_prob) {
                const double val = weighted ? weight(rng) : 1.0;
                w(i, j) = val;
                w(j, i) = val;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (w.row(i).sum() <= 0.0) {
            const int j = (i + 1) % n;
            w(i, j) = 1.0;
            w(j, i) = 1.0;
        }
    }
    return hct::ExplicitGraph::from_weights(std::move(w));
}

// Random unit-norm dataset.
inline hct::VectorDataset random_unit_dataset(int n, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd points(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) points(i, j) = normal(rng);
        points.row(i).normalize();
    }
    return hct::VectorDataset::make(std::move(points), std::nullopt, true);
}

// Random binary tree over ids 0..n-1 (random recursive bipartition),
// independent of any splitting rule.
inline std::unique_ptr<hct::TreeNode> random_tree_node(std::vector<int> ids,
                                                       std::mt19937_64& rng) {
    auto node = std::make_unique<hct::TreeNode>();
    node->leaf_count = static_cast<int>(ids.size());
    if (ids.size() == 1) {
        node->point_ids = std::move(ids);
        return node;
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    std::uniform_int_distribution<size_t> cut(1, ids.size() - 1);
    const size_t split = cut(rng);
    std::vector<int> left(ids.begin(), ids.begin() + split);
    std::vector<int> right(ids.begin() + split, ids.end());
    node->left = random_tree_node(std::move(left), rng);
    node->right = random_tree_node(std::move(right), rng);
    return node;
}

// Seeded train/test split of row indices.
inline std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double test_fraction,
                                                                   std::mt19937_64& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const int test_n = static_cast<int>(n * test_fraction);
    std::vector<int> test(idx.begin(), idx.begin() + test_n);
    std::vector<int> train(idx.begin() + test_n, idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

}  // namespace oracle
