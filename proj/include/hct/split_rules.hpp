#pragma once

#include "hct/similarity.hpp"
#include "hct/spectral.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hct {

enum class SplitRule { RandomHyperplane, Eigenvector, ApproxEigenvector, TwoMeans };

enum class PlanTag { RP, EV, AEV, TwoMeans, GraphSweep };

std::string to_string(SplitRule rule);
SplitRule split_rule_from_string(const std::string& name);
std::string to_string(PlanTag tag);

/// Output of a splitting rule: a direction/threshold pair (vector modes)
/// plus the induced bipartition of the input positions. For EV/AEV the
/// membership coordinate is the degree-normalized projection
/// (x . direction) / sqrt(degree), with degree taken against degree_context
/// (the node's frozen row sum); RP/TwoMeans use the raw projection.
/// `degenerate` marks splits that fell back to an index split because no
/// hyperplane separates the input (identical points, total coordinate ties).
struct SplitPlan {
    std::optional<Eigen::VectorXd> direction;
    std::optional<double> threshold;
    std::optional<Eigen::VectorXd> degree_context;
    std::vector<int> left_positions;
    std::vector<int> right_positions;
    PlanTag tag = PlanTag::RP;
    bool degenerate = false;
};

struct BuildConfig {
    SplitRule rule = SplitRule::ApproxEigenvector;
    bool balance_enforced = true;   // keep every split inside the (1/3, 2/3) band
    int leaf_max = 1;
    PowerConfig power;
    std::uint64_t seed = 0;
    int knn_bucket = 64;            // query-time default bucket size B
    int threads = 1;
    bool rp_zero_threshold = false; // fidelity switch: s = 0 instead of the median
};

/// Gaussian direction, threshold = median projection (odd sizes put the
/// median point left). The rp_zero_threshold fidelity switch uses s = 0.
SplitPlan split_rp(const SimilarityView& view, const BuildConfig& config,
                   std::uint64_t node_seed);

/// Exact second right singular vector of D^{-1/2} A, degree-normalized
/// coordinates, sweep over the balance band. Implicit mode only.
SplitPlan split_ev(const SimilarityView& view, const BuildConfig& config,
                   std::uint64_t node_seed);

/// Power-iteration variant of split_ev; also handles explicit graphs, where
/// it sweeps D^{-1/2} v2 and emits an index partition only (GraphSweep).
SplitPlan split_aev(const SimilarityView& view, const BuildConfig& config,
                    std::uint64_t node_seed);

/// k-means++ seeding (2 seeds, one attempt) then Lloyd iterations; the
/// returned hyperplane h = 2(c1 - c2), s = |c1|^2 - |c2|^2 is equidistant
/// from the converged centers, so h.x <= s matches nearest-center
/// membership with ties to the c2 side.
SplitPlan split_two_means(const SimilarityView& view, const BuildConfig& config,
                          std::uint64_t node_seed);

SplitPlan run_split(const SimilarityView& view, const BuildConfig& config,
                    std::uint64_t node_seed);

struct KMeansResult {
    std::vector<int> assignment;
    Eigen::MatrixXd centers;  // k x d
    int iterations = 0;
};

/// Flat k-means baseline: k-means++ seeding, Lloyd to convergence
/// (max center movement < 1e-7 or 100 rounds), deterministic per seed.
KMeansResult flat_kmeans(const VectorDataset& data, int k, std::uint64_t seed);

}  // namespace hct
