#pragma once

#include "hct/dataset.hpp"

#include <Eigen/Core>

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace hct {

/// Unified oracle over implicit similarity C = X X^T (never materialized;
/// cuts and degrees go through row aggregates) and explicit weight matrices.
/// A view is an immutable snapshot of an active index subset: restrict()
/// produces sub-views, and concurrent evaluations over the same view are
/// safe. Aggregate similarities that come out negative are clamped to 0 and
/// counted; clamp_count() is shared across a view's restrictions.
class SimilarityView {
public:
    static SimilarityView implicit(const VectorDataset& data);
    static SimilarityView explicit_graph(const ExplicitGraph& graph);

    // positions index into the current active list.
    SimilarityView restrict(std::span<const int> positions) const;

    bool is_implicit() const { return data_ != nullptr; }
    int size() const { return static_cast<int>(ids_.size()); }
    int dim() const;

    /// Global point ids of the active subset, in view order.
    const std::vector<int>& ids() const { return ids_; }

    /// Implicit mode only: active rows as an m x d matrix.
    const Eigen::MatrixXd& rows() const;

    /// Implicit mode only: sum of active rows (the degree-defining aggregate).
    const Eigen::VectorXd& row_sum() const;

    const ExplicitGraph& graph() const;

    /// Degrees within the active subset. Implicit mode: d_i = x_i . sum_j x_j
    /// including the i = j self term; explicit mode: induced row sums.
    const Eigen::VectorXd& degrees() const { return degrees_; }

    /// Cut weight between `left` (positions) and the rest of the subset,
    /// clamped below at 0. Implicit mode runs in O(m d) via aggregates.
    double cut_value(std::span<const int> left) const;

    /// cut / min(volume(left), volume(rest)).
    double conductance(std::span<const int> left) const;

    /// cut / min(|left|, |rest|).
    double expansion(std::span<const int> left) const;

    /// Raw pairwise similarity between positions i and j (no clamping);
    /// intended for brute-force style evaluation, O(d) per pair.
    double pair_similarity(int i, int j) const;

    std::int64_t clamp_count() const { return clamp_events_->load(); }
    void note_clamp() const { clamp_events_->fetch_add(1, std::memory_order_relaxed); }

private:
    SimilarityView() = default;
    void split_volumes(std::span<const int> left, double& vol_left, double& vol_right) const;

    const VectorDataset* data_ = nullptr;
    const ExplicitGraph* graph_ = nullptr;
    std::vector<int> ids_;
    Eigen::MatrixXd rows_;       // implicit: gathered active rows
    Eigen::VectorXd row_sum_;    // implicit: sum of active rows
    Eigen::VectorXd degrees_;
    std::shared_ptr<std::atomic<std::int64_t>> clamp_events_;
};

}  // namespace hct
