#include "hct/anomaly.hpp"

#include "hct/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace hct {

namespace {

constexpr int kPairSampleCap = 2000;

bool row_less(const Eigen::MatrixXd& points, int a, int b) {
    for (int j = 0; j < points.cols(); ++j) {
        if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
    }
    return false;
}

}  // namespace

const AnomalyTable::Entry& AnomalyTable::lookup(int cls) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), cls,
                               [](const Entry& e, int c) { return e.cls < c; });
    if (it == entries.end() || it->cls != cls) {
        throw std::runtime_error("class " + std::to_string(cls) +
                                 " missing from anomaly table (label/table drift)");
    }
    return *it;
}

AnomalyTable build_table(const VectorDataset& train, std::uint64_t seed) {
    if (!train.labels) throw std::invalid_argument("anomaly table requires labels");
    std::map<int, std::vector<int>> members;
    for (int i = 0; i < train.n(); ++i) members[(*train.labels)[i]].push_back(i);

    AnomalyTable table;
    for (auto& [cls, ids] : members) {
        AnomalyTable::Entry entry;
        entry.cls = cls;
        entry.size = static_cast<int>(ids.size());
        const long long m = entry.size;
        const long long pair_count = m * (m - 1) / 2;
        if (pair_count == 0) {
            table.entries.push_back(entry);  // singleton: no pair exists
            continue;
        }
        entry.has_pairs = true;
        double acc = 0.0;
        if (pair_count <= kPairSampleCap) {
            for (size_t a = 0; a < ids.size(); ++a) {
                for (size_t b = a + 1; b < ids.size(); ++b) {
                    acc += (train.points.row(ids[a]) - train.points.row(ids[b])).norm();
                }
            }
            entry.avg_pair_distance = acc / static_cast<double>(pair_count);
        } else {
            // Canonical member order keeps the sampled mean invariant under
            // permutations of the dataset rows.
            std::sort(ids.begin(), ids.end(), [&](int a, int b) {
                return row_less(train.points, a, b);
            });
            auto rng = make_rng(seed, 0x7461626cULL + static_cast<std::uint64_t>(cls));
            std::uniform_int_distribution<int> uni(0, entry.size - 1);
            for (int t = 0; t < kPairSampleCap; ++t) {
                int a = uni(rng);
                int b = uni(rng);
                while (b == a) b = uni(rng);
                acc += (train.points.row(ids[a]) - train.points.row(ids[b])).norm();
            }
            entry.avg_pair_distance = acc / kPairSampleCap;
        }
        table.entries.push_back(entry);
    }
    return table;
}

AnomalyDecision score(const HCTree& tree, const AnomalyTable& table,
                      const VectorDataset& train, const Eigen::VectorXd& x,
                      int k, int bucket, double tau, int point_id) {
    if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
    ClassifyResult cls = tree.classify(train, x, k, bucket);
    const AnomalyTable::Entry& entry = table.lookup(cls.label);

    AnomalyDecision decision;
    decision.point_id = point_id;
    decision.predicted_class = cls.label;
    decision.d1 = cls.mean_knn_distance;
    decision.d2 = entry.has_pairs ? entry.avg_pair_distance : 0.0;
    decision.flagged = decision.d1 > decision.d2 * (1.0 + tau);
    if (decision.d2 > 0.0) {
        decision.ratio = decision.d1 / decision.d2;
    } else {
        decision.ratio = decision.d1 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return decision;
}

HoldoutReport simulate_holdout(const VectorDataset& data, const HoldoutSpec& spec,
                               const BuildConfig& config, int k, int bucket) {
    if (!data.labels) throw std::invalid_argument("holdout simulation requires labels");
    if (spec.tau_grid.empty()) throw std::invalid_argument("empty tau grid");
    const std::vector<int>& labels = *data.labels;

    std::set<int> held(spec.held_out_classes.begin(), spec.held_out_classes.end());
    std::set<int> all_classes(labels.begin(), labels.end());
    std::set<int> retained;
    for (int c : all_classes) {
        if (!held.count(c)) retained.insert(c);
    }
    for (int c : held) {
        if (!all_classes.count(c)) {
            throw std::invalid_argument("held-out class " + std::to_string(c) +
                                        " not present in the dataset");
        }
    }
    if (retained.size() < 2) {
        throw std::invalid_argument("need at least 2 retained training classes");
    }
    if (spec.superclass) {
        for (int c : all_classes) {
            if (!spec.superclass->count(c)) {
                throw std::invalid_argument("superclass map missing class " +
                                            std::to_string(c));
            }
        }
    }

    std::vector<int> train_ids;
    for (int i = 0; i < data.n(); ++i) {
        if (!held.count(labels[i])) train_ids.push_back(i);
    }
    VectorDataset train = data.subset(train_ids);
    HCTree tree = HCTree::build(train, config);
    AnomalyTable table = build_table(train, config.seed);

    struct PointScore {
        bool positive = false;   // true label held out
        double d1 = 0.0, d2 = 0.0;
        bool super_match = false;
    };
    std::vector<PointScore> scores;
    scores.reserve(data.n());
    for (int i = 0; i < data.n(); ++i) {
        AnomalyDecision d = score(tree, table, train, data.points.row(i).transpose(),
                                  k, bucket, 0.0, i);
        PointScore ps;
        ps.positive = held.count(labels[i]) > 0;
        ps.d1 = d.d1;
        ps.d2 = d.d2;
        if (spec.superclass) {
            ps.super_match = spec.superclass->at(d.predicted_class) ==
                             spec.superclass->at(labels[i]);
        }
        scores.push_back(ps);
    }

    HoldoutReport report;
    report.train_size = train.n();
    report.test_size = data.n();
    for (const auto& ps : scores) report.positives += ps.positive ? 1 : 0;

    for (double tau : spec.tau_grid) {
        if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
        long long flags = 0, tp = 0, fp = 0, fn = 0, super_credit = 0;
        for (const auto& ps : scores) {
            const bool flagged = ps.d1 > ps.d2 * (1.0 + tau);
            flags += flagged;
            if (ps.positive && flagged) ++tp;
            if (!ps.positive && flagged) ++fp;
            if (ps.positive && !flagged) {
                ++fn;
                if (ps.super_match) ++super_credit;
            }
        }
        SweepRow row;
        row.tau = tau;
        row.pct_flagged = 100.0 * static_cast<double>(flags) / scores.size();
        row.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        row.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        row.f1 = (row.precision + row.recall > 0.0)
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        // Superclass credit: unflagged held-out points routed to the right
        // superclass count as handled (moved from FN to TP).
        const long long tp_sc = tp + super_credit;
        const long long fn_sc = fn - super_credit;
        const double p_sc = (tp_sc + fp) > 0 ? static_cast<double>(tp_sc) / (tp_sc + fp) : 0.0;
        const double r_sc = (tp_sc + fn_sc) > 0 ? static_cast<double>(tp_sc) / (tp_sc + fn_sc) : 0.0;
        row.f1_superclass = (p_sc + r_sc > 0.0) ? 2.0 * p_sc * r_sc / (p_sc + r_sc) : row.f1;
        if (!spec.superclass) row.f1_superclass = row.f1;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace hct
