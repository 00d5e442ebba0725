#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hct {

/// Row matrix of feature vectors with optional integer class labels.
/// Immutable after construction; every accessor is safe to call from
/// concurrent readers.
struct VectorDataset {
    Eigen::MatrixXd points;                         // n x d, one point per row
    std::optional<std::vector<int>> labels;         // class ids, length n
    std::vector<int> ids;                           // stable point identifiers
    bool unit_normalized = false;

    int n() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    // Validates finiteness, label length and (when claimed) unit norms.
    static VectorDataset make(Eigen::MatrixXd points,
                              std::optional<std::vector<int>> labels,
                              bool unit_normalized);

    // Subset by row ids; labels follow, ids renumbered 0..m-1.
    VectorDataset subset(const std::vector<int>& keep_ids) const;
};

/// Dense symmetric weight matrix with entries in [0,1], zero diagonal,
/// cached degrees. Isolated nodes are rejected at construction.
struct ExplicitGraph {
    Eigen::MatrixXd weights;   // n x n symmetric
    Eigen::VectorXd degree;    // d_i = sum_j weights(i,j)

    int n() const { return static_cast<int>(weights.rows()); }

    static ExplicitGraph from_weights(Eigen::MatrixXd weights);
};

struct PlantedParams {
    int n = 0;                 // even node count
    double p = 0.0;            // intra-block edge probability, (0,1]
    double q = 0.0;            // inter-block edge probability, [0,1), q < p
    std::uint64_t seed = 0;
};

// --- ingestion -------------------------------------------------------------

// Comma-separated rows of finite reals; lines starting with '#' skipped.
// label_column selects an integer class column; normalize rescales rows to
// unit Euclidean norm (zero rows rejected). Row order preserved, ids 0..n-1.
VectorDataset load_csv(const std::string& path, std::optional<int> label_column,
                       bool normalize);

// Features only, 17 significant digits so load_csv(write_csv(D)) is
// bit-exact for finite inputs.
void write_csv(const VectorDataset& data, const std::string& path);

std::vector<int> load_labels(const std::string& path);
void write_labels(const std::vector<int>& labels, const std::string& path);

// Edge-list text format: "i j w" per line, 0-indexed, each undirected edge
// listed once. Node count inferred as max index + 1.
ExplicitGraph load_edge_list(const std::string& path);
void write_edge_list(const ExplicitGraph& graph, const std::string& path);

// --- generators ------------------------------------------------------------

// Two equisized blocks; each unordered pair gets a unit edge independently
// with probability p (same block) or q (across). Deterministic per seed.
ExplicitGraph gen_planted(const PlantedParams& params);

// k isotropic unit-variance Gaussian clusters, means at pairwise distance
// >= separation, near-equal sizes, rows unit-normalized, labels = cluster.
VectorDataset gen_gmm(int n, int k, int dim, double separation,
                      std::uint64_t seed);

// Complete graph with unit weights (n >= 2; a single node has degree 0 and
// is rejected as isolated).
ExplicitGraph gen_clique(int n);

}  // namespace hct
