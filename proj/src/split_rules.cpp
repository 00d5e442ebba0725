#include "hct/split_rules.hpp"

#include "hct/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hct {

namespace {

constexpr double kLloydTol = 1e-7;
constexpr int kLloydMaxRounds = 100;

std::pair<double, double> band_for(const BuildConfig& config) {
    return config.balance_enforced ? std::make_pair(1.0 / 3.0, 2.0 / 3.0)
                                   : std::make_pair(0.0, 1.0);
}

std::vector<int> sorted_by_projection(const Eigen::VectorXd& proj) {
    std::vector<int> order(proj.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&proj](int i, int j) { return proj[i] < proj[j]; });
    return order;
}

// Splits by position order when no hyperplane separates the input.
void index_split(const std::vector<int>& order, int left_size, SplitPlan& plan) {
    plan.left_positions.assign(order.begin(), order.begin() + left_size);
    plan.right_positions.assign(order.begin() + left_size, order.end());
    plan.degenerate = true;
}

// Membership by value: left = {i : proj_i <= threshold}. Falls back to an
// index split at target_left when the value rule empties a side or (with
// the band on) ties push a side outside it.
void threshold_split(const Eigen::VectorXd& proj, double threshold, int target_left,
                     bool enforce_band, SplitPlan& plan) {
    const int m = static_cast<int>(proj.size());
    std::vector<int> left, right;
    for (int i = 0; i < m; ++i) {
        (proj[i] <= threshold ? left : right).push_back(i);
    }
    const int lo = (m + 2) / 3;  // ceil(m/3)
    const bool band_ok = !enforce_band ||
        std::min(left.size(), right.size()) >= static_cast<size_t>(lo);
    if (!left.empty() && !right.empty() && band_ok) {
        plan.left_positions = std::move(left);
        plan.right_positions = std::move(right);
        return;
    }
    index_split(sorted_by_projection(proj), target_left, plan);
}

SplitPlan degenerate_median_plan(const SimilarityView& view, PlanTag tag) {
    SplitPlan plan;
    plan.tag = tag;
    std::vector<int> order(view.size());
    std::iota(order.begin(), order.end(), 0);
    index_split(order, (view.size() + 1) / 2, plan);
    return plan;
}

// Sweep-based plan shared by EV and AEV in implicit mode. The membership
// coordinate is (x . h) / sqrt(x . row_sum), frozen against this node's
// aggregate so the partition can be replayed exactly.
SplitPlan sweep_plan_implicit(const SimilarityView& view, const Eigen::VectorXd& h,
                              const BuildConfig& config, PlanTag tag) {
    Eigen::VectorXd coords = (view.rows() * h).cwiseQuotient(view.degrees().cwiseSqrt());
    SweepResult sweep = sweep_cut(view, coords, band_for(config));
    SplitPlan plan;
    plan.tag = tag;
    plan.direction = h;
    plan.degree_context = view.row_sum();
    plan.threshold = coords[sweep.order[sweep.best_index - 1]];
    plan.left_positions = sweep.left_positions;
    plan.degenerate = sweep.degenerate_fallback;
    std::vector<char> in_left(view.size(), 0);
    for (int p : plan.left_positions) in_left[p] = 1;
    for (int i = 0; i < view.size(); ++i) {
        if (!in_left[i]) plan.right_positions.push_back(i);
    }
    return plan;
}

bool degrees_usable(const SimilarityView& view) {
    return (view.degrees().array() > 0.0).all();
}

}  // namespace

std::string to_string(SplitRule rule) {
    switch (rule) {
        case SplitRule::RandomHyperplane: return "rp";
        case SplitRule::Eigenvector: return "ev";
        case SplitRule::ApproxEigenvector: return "aev";
        case SplitRule::TwoMeans: return "2means";
    }
    return "?";
}

SplitRule split_rule_from_string(const std::string& name) {
    if (name == "rp") return SplitRule::RandomHyperplane;
    if (name == "ev") return SplitRule::Eigenvector;
    if (name == "aev") return SplitRule::ApproxEigenvector;
    if (name == "2means") return SplitRule::TwoMeans;
    throw std::invalid_argument("unknown rule '" + name + "' (expect rp|ev|aev|2means)");
}

std::string to_string(PlanTag tag) {
    switch (tag) {
        case PlanTag::RP: return "RP";
        case PlanTag::EV: return "EV";
        case PlanTag::AEV: return "AEV";
        case PlanTag::TwoMeans: return "TwoMeans";
        case PlanTag::GraphSweep: return "GraphSweep";
    }
    return "?";
}

SplitPlan split_rp(const SimilarityView& view, const BuildConfig& config,
                   std::uint64_t node_seed) {
    if (!view.is_implicit()) throw std::invalid_argument("RP rule requires vector mode");
    const int m = view.size();
    if (m < 2) throw std::invalid_argument("split needs at least 2 points");

    auto rng = make_rng(node_seed, 0x7270ULL);
    Eigen::VectorXd h = gaussian_vector(view.dim(), rng);
    const double hnorm = h.norm();
    if (hnorm > 0.0) h /= hnorm;

    Eigen::VectorXd proj = view.rows() * h;
    SplitPlan plan;
    plan.tag = PlanTag::RP;
    plan.direction = h;
    const int target_left = (m + 1) / 2;
    double threshold = 0.0;
    if (!config.rp_zero_threshold) {
        std::vector<int> order = sorted_by_projection(proj);
        threshold = proj[order[target_left - 1]];  // median, odd sizes left
    }
    plan.threshold = threshold;
    threshold_split(proj, threshold, target_left,
                    config.balance_enforced && !config.rp_zero_threshold, plan);
    return plan;
}

SplitPlan split_ev(const SimilarityView& view, const BuildConfig& config,
                   std::uint64_t /*node_seed*/) {
    if (!view.is_implicit()) throw std::invalid_argument("EV rule requires vector mode");
    if (view.size() < 2) throw std::invalid_argument("split needs at least 2 points");
    if (!degrees_usable(view)) return degenerate_median_plan(view, PlanTag::EV);
    Eigen::VectorXd h = exact_second_right_singular(view);
    return sweep_plan_implicit(view, h, config, PlanTag::EV);
}

SplitPlan split_aev(const SimilarityView& view, const BuildConfig& config,
                    std::uint64_t node_seed) {
    const int m = view.size();
    if (m < 2) throw std::invalid_argument("split needs at least 2 points");

    PowerConfig power = config.power;
    power.seed = mix_seed(node_seed, 0x616576ULL);

    if (view.is_implicit()) {
        if (!degrees_usable(view)) return degenerate_median_plan(view, PlanTag::AEV);
        Eigen::VectorXd v1 = top_eigenvector(view, power);
        Eigen::VectorXd h = second_eigenvector_deflated(view, v1, power);
        return sweep_plan_implicit(view, h, config, PlanTag::AEV);
    }

    // Explicit graphs: zero-degree nodes in the induced subgraph cannot be
    // normalized; peel them off as a free (conductance 0) side.
    std::vector<int> zero, positive;
    for (int i = 0; i < m; ++i) {
        (view.degrees()[i] <= 0.0 ? zero : positive).push_back(i);
    }
    SplitPlan plan;
    plan.tag = PlanTag::GraphSweep;
    if (!zero.empty()) {
        if (positive.empty()) {
            index_split(zero, (m + 1) / 2, plan);
            return plan;
        }
        plan.left_positions = std::move(zero);
        plan.right_positions = std::move(positive);
        return plan;
    }

    Eigen::VectorXd v1 = top_eigenvector(view, power);
    Eigen::VectorXd v2 = second_eigenvector_deflated(view, v1, power);
    Eigen::VectorXd coords = v2.cwiseQuotient(view.degrees().cwiseSqrt());
    SweepResult sweep = sweep_cut(view, coords, band_for(config));
    plan.left_positions = sweep.left_positions;
    plan.degenerate = sweep.degenerate_fallback;
    std::vector<char> in_left(m, 0);
    for (int p : plan.left_positions) in_left[p] = 1;
    for (int i = 0; i < m; ++i) {
        if (!in_left[i]) plan.right_positions.push_back(i);
    }
    return plan;
}

namespace {

// D^2-sampling seeding for two centers, one attempt.
std::pair<int, int> kmeans_pp_two_seeds(const Eigen::MatrixXd& rows,
                                        std::mt19937_64& rng) {
    const int m = static_cast<int>(rows.rows());
    std::uniform_int_distribution<int> uni(0, m - 1);
    const int first = uni(rng);
    Eigen::VectorXd dist2(m);
    for (int i = 0; i < m; ++i) dist2[i] = (rows.row(i) - rows.row(first)).squaredNorm();
    const double total = dist2.sum();
    if (total <= 0.0) {
        // All points coincide with the first seed; pick the next index so the
        // caller can detect the degenerate outcome after Lloyd.
        return {first, (first + 1) % m};
    }
    std::uniform_real_distribution<double> unif(0.0, total);
    double r = unif(rng);
    int second = m - 1;
    for (int i = 0; i < m; ++i) {
        r -= dist2[i];
        if (r <= 0.0) {
            second = i;
            break;
        }
    }
    return {first, second};
}

}  // namespace

SplitPlan split_two_means(const SimilarityView& view, const BuildConfig& config,
                          std::uint64_t node_seed) {
    if (!view.is_implicit()) throw std::invalid_argument("2-means rule requires vector mode");
    const int m = view.size();
    if (m < 2) throw std::invalid_argument("split needs at least 2 points");

    const Eigen::MatrixXd& rows = view.rows();
    auto rng = make_rng(node_seed, 0x326d6eULL);
    auto [s1, s2] = kmeans_pp_two_seeds(rows, rng);
    Eigen::VectorXd c1 = rows.row(s1);
    Eigen::VectorXd c2 = rows.row(s2);

    std::vector<int> assign(m, 0);
    for (int round = 0; round < kLloydMaxRounds; ++round) {
        Eigen::VectorXd sum1 = Eigen::VectorXd::Zero(view.dim());
        Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(view.dim());
        int n1 = 0, n2 = 0;
        for (int i = 0; i < m; ++i) {
            const double d1 = (rows.row(i).transpose() - c1).squaredNorm();
            const double d2 = (rows.row(i).transpose() - c2).squaredNorm();
            if (d1 < d2) {
                assign[i] = 0;
                sum1 += rows.row(i);
                ++n1;
            } else {  // ties go to c2, the side h.x <= s selects
                assign[i] = 1;
                sum2 += rows.row(i);
                ++n2;
            }
        }
        if (n1 == 0 || n2 == 0) {
            // Re-seat the empty center at the point farthest from the other.
            const Eigen::VectorXd& full = (n1 == 0) ? c2 : c1;
            int far = 0;
            double far_d = -1.0;
            for (int i = 0; i < m; ++i) {
                const double d = (rows.row(i).transpose() - full).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (n1 == 0) c1 = rows.row(far); else c2 = rows.row(far);
            continue;
        }
        Eigen::VectorXd new1 = sum1 / n1;
        Eigen::VectorXd new2 = sum2 / n2;
        const double moved = std::max((new1 - c1).norm(), (new2 - c2).norm());
        c1 = new1;
        c2 = new2;
        if (moved < kLloydTol) break;
    }

    SplitPlan plan;
    plan.tag = PlanTag::TwoMeans;
    if ((c1 - c2).norm() < 1e-12) {
        // All points identical: no separating hyperplane exists.
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        index_split(order, (m + 1) / 2, plan);
        return plan;
    }

    Eigen::VectorXd h = 2.0 * (c1 - c2);
    const double s = c1.squaredNorm() - c2.squaredNorm();
    plan.direction = h;
    plan.threshold = s;
    Eigen::VectorXd proj = rows * h;

    std::vector<int> left, right;
    for (int i = 0; i < m; ++i) (proj[i] <= s ? left : right).push_back(i);
    const int lo = (m + 2) / 3;
    const bool band_ok = !config.balance_enforced ||
        std::min(left.size(), right.size()) >= static_cast<size_t>(lo);
    if (!left.empty() && !right.empty() && band_ok) {
        plan.left_positions = std::move(left);
        plan.right_positions = std::move(right);
        return plan;
    }
    // Out of band (or one-sided): clamp the boundary to the nearest in-band
    // sorted-projection position; membership stays a pure threshold rule.
    std::vector<int> order = sorted_by_projection(proj);
    const int j_lo = config.balance_enforced ? lo : 1;
    const int j_hi = config.balance_enforced ? m - lo : m - 1;
    const int j = std::clamp(static_cast<int>(left.size()), std::max(1, j_lo),
                             std::max(1, j_hi));
    const double s_clamped = proj[order[j - 1]];
    plan.threshold = s_clamped;
    threshold_split(proj, s_clamped, j, config.balance_enforced, plan);
    return plan;
}

SplitPlan run_split(const SimilarityView& view, const BuildConfig& config,
                    std::uint64_t node_seed) {
    if (!view.is_implicit()) {
        if (config.rule != SplitRule::ApproxEigenvector) {
            throw std::invalid_argument("explicit graphs support only the aev rule");
        }
        return split_aev(view, config, node_seed);
    }
    switch (config.rule) {
        case SplitRule::RandomHyperplane: return split_rp(view, config, node_seed);
        case SplitRule::Eigenvector: return split_ev(view, config, node_seed);
        case SplitRule::ApproxEigenvector: return split_aev(view, config, node_seed);
        case SplitRule::TwoMeans: return split_two_means(view, config, node_seed);
    }
    throw std::logic_error("unreachable");
}

KMeansResult flat_kmeans(const VectorDataset& data, int k, std::uint64_t seed) {
    const int n = data.n();
    const int d = data.dim();
    if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");

    const Eigen::MatrixXd& rows = data.points;
    auto rng = make_rng(seed, 0x6b6d6eULL);
    std::uniform_int_distribution<int> uni(0, n - 1);

    Eigen::MatrixXd centers(k, d);
    centers.row(0) = rows.row(uni(rng));
    Eigen::VectorXd dist2 = (rows.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        int pick;
        if (total <= 0.0) {
            pick = uni(rng);
        } else {
            std::uniform_real_distribution<double> unif(0.0, total);
            double r = unif(rng);
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                r -= dist2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = rows.row(pick);
        dist2 = dist2.cwiseMin((rows.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    KMeansResult res;
    res.assignment.assign(n, 0);
    for (res.iterations = 1; res.iterations <= kLloydMaxRounds; ++res.iterations) {
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (rows.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double dd = (rows.row(i) - centers.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            res.assignment[i] = best;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.assignment[i]) += rows.row(i);
            ++counts[res.assignment[i]];
        }
        double moved = 0.0;
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seat at the point farthest from its current center.
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double dd =
                        (rows.row(i) - centers.row(res.assignment[i])).squaredNorm();
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                moved = std::max(moved, (centers.row(c) - rows.row(far)).norm());
                centers.row(c) = rows.row(far);
                continue;
            }
            Eigen::RowVectorXd next = sums.row(c) / counts[c];
            moved = std::max(moved, (centers.row(c) - next).norm());
            centers.row(c) = next;
        }
        if (moved < kLloydTol) break;
    }
    res.centers = std::move(centers);
    return res;
}

}  // namespace hct
