#pragma once

#include "hct/dataset.hpp"
#include "hct/tree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace hct {

/// Per-class average pairwise Euclidean distance over the training points,
/// subsampled to at most 2000 pairs per class (seeded per class, so entries
/// do not depend on point order). Singleton classes have no pairs and are
/// flagged with has_pairs = false.
struct AnomalyTable {
    struct Entry {
        int cls = 0;
        double avg_pair_distance = 0.0;
        int size = 0;
        bool has_pairs = false;
    };
    std::vector<Entry> entries;  // sorted by class id

    const Entry& lookup(int cls) const;
};

AnomalyTable build_table(const VectorDataset& train, std::uint64_t seed);

struct AnomalyDecision {
    int point_id = -1;
    int predicted_class = -1;
    double d1 = 0.0;       // mean distance to the k returned neighbors
    double d2 = 0.0;       // table entry for the predicted class
    bool flagged = false;  // d1 > d2 * (1 + tau)
    double ratio = 0.0;    // d1 / d2
};

/// Runs the tree's candidate retrieval and flags the point as a possible
/// new-class member when its neighborhood distance exceeds the predicted
/// class's reference scale by the multiplicative threshold tau.
AnomalyDecision score(const HCTree& tree, const AnomalyTable& table,
                      const VectorDataset& train, const Eigen::VectorXd& x,
                      int k, int bucket, double tau, int point_id = -1);

struct HoldoutSpec {
    std::vector<int> held_out_classes;
    std::optional<std::map<int, int>> superclass;  // class -> superclass
    std::vector<double> tau_grid;
};

struct SweepRow {
    double tau = 0.0;
    double pct_flagged = 0.0;   // percent of test points flagged, 0..100
    double precision = 0.0;     // positives = held-out-class points
    double recall = 0.0;
    double f1 = 0.0;
    double f1_superclass = 0.0; // correct-superclass predictions count as handled
};

struct HoldoutReport {
    std::vector<SweepRow> rows;
    int train_size = 0;
    int test_size = 0;
    int positives = 0;
};

/// Trains on the non-held-out classes, scores every point in the dataset,
/// and reports the label-budget/recall trade-off for each tau. With a
/// superclass map, an unflagged held-out point whose predicted class shares
/// its superclass counts as correctly handled.
HoldoutReport simulate_holdout(const VectorDataset& data, const HoldoutSpec& spec,
                               const BuildConfig& config, int k, int bucket);

}  // namespace hct
