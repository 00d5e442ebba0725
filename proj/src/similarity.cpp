#include "hct/similarity.hpp"

#include <algorithm>
#include <stdexcept>

namespace hct {

namespace {

void check_proper_subset(std::span<const int> left, int m) {
    if (left.empty() || static_cast<int>(left.size()) >= m) {
        throw std::invalid_argument("cut requires a nonempty proper subset");
    }
    for (int p : left) {
        if (p < 0 || p >= m) throw std::invalid_argument("position out of range");
    }
}

}  // namespace

SimilarityView SimilarityView::implicit(const VectorDataset& data) {
    if (!data.unit_normalized) {
        throw std::invalid_argument("implicit similarity requires unit-normalized rows");
    }
    SimilarityView v;
    v.data_ = &data;
    v.ids_ = data.ids;
    v.rows_ = data.points;
    v.row_sum_ = v.rows_.colwise().sum();
    v.degrees_ = v.rows_ * v.row_sum_;
    v.clamp_events_ = std::make_shared<std::atomic<std::int64_t>>(0);
    return v;
}

SimilarityView SimilarityView::explicit_graph(const ExplicitGraph& graph) {
    SimilarityView v;
    v.graph_ = &graph;
    v.ids_.resize(graph.n());
    for (int i = 0; i < graph.n(); ++i) v.ids_[i] = i;
    v.degrees_ = graph.degree;
    v.clamp_events_ = std::make_shared<std::atomic<std::int64_t>>(0);
    return v;
}

SimilarityView SimilarityView::restrict(std::span<const int> positions) const {
    SimilarityView v;
    v.data_ = data_;
    v.graph_ = graph_;
    v.clamp_events_ = clamp_events_;
    const int m = static_cast<int>(positions.size());
    v.ids_.resize(m);
    for (int i = 0; i < m; ++i) {
        const int p = positions[i];
        if (p < 0 || p >= size()) throw std::invalid_argument("restrict position out of range");
        v.ids_[i] = ids_[p];
    }
    if (is_implicit()) {
        v.rows_.resize(m, rows_.cols());
        for (int i = 0; i < m; ++i) v.rows_.row(i) = rows_.row(positions[i]);
        v.row_sum_ = v.rows_.colwise().sum();
        v.degrees_ = v.rows_ * v.row_sum_;
    } else {
        const auto& w = graph_->weights;
        v.degrees_.resize(m);
        for (int i = 0; i < m; ++i) {
            double d = 0.0;
            for (int j = 0; j < m; ++j) d += w(v.ids_[i], v.ids_[j]);
            v.degrees_[i] = d;
        }
    }
    return v;
}

int SimilarityView::dim() const {
    return is_implicit() ? static_cast<int>(rows_.cols()) : 0;
}

const Eigen::MatrixXd& SimilarityView::rows() const {
    if (!is_implicit()) throw std::logic_error("rows() only valid in implicit mode");
    return rows_;
}

const Eigen::VectorXd& SimilarityView::row_sum() const {
    if (!is_implicit()) throw std::logic_error("row_sum() only valid in implicit mode");
    return row_sum_;
}

const ExplicitGraph& SimilarityView::graph() const {
    if (is_implicit()) throw std::logic_error("graph() only valid in explicit mode");
    return *graph_;
}

double SimilarityView::cut_value(std::span<const int> left) const {
    check_proper_subset(left, size());
    double raw = 0.0;
    if (is_implicit()) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(rows_.cols());
        for (int p : left) a += rows_.row(p);
        raw = a.dot(row_sum_ - a);
    } else {
        std::vector<char> in_left(size(), 0);
        for (int p : left) in_left[p] = 1;
        const auto& w = graph_->weights;
        for (int p : left) {
            for (int jpos = 0; jpos < size(); ++jpos) {
                if (!in_left[jpos]) raw += w(ids_[p], ids_[jpos]);
            }
        }
    }
    if (raw < 0.0) {
        note_clamp();
        return 0.0;
    }
    return raw;
}

void SimilarityView::split_volumes(std::span<const int> left, double& vol_left,
                                   double& vol_right) const {
    vol_left = 0.0;
    for (int p : left) vol_left += degrees_[p];
    vol_right = degrees_.sum() - vol_left;
}

double SimilarityView::conductance(std::span<const int> left) const {
    const double cut = cut_value(left);
    double vl = 0.0, vr = 0.0;
    split_volumes(left, vl, vr);
    const double denom = std::min(vl, vr);
    if (denom <= 0.0) throw std::domain_error("conductance denominator is zero");
    return cut / denom;
}

double SimilarityView::expansion(std::span<const int> left) const {
    const double cut = cut_value(left);
    const double denom = static_cast<double>(
        std::min(left.size(), ids_.size() - left.size()));
    if (denom <= 0.0) throw std::domain_error("expansion denominator is zero");
    return cut / denom;
}

double SimilarityView::pair_similarity(int i, int j) const {
    if (i < 0 || j < 0 || i >= size() || j >= size()) {
        throw std::invalid_argument("pair position out of range");
    }
    if (is_implicit()) return rows_.row(i).dot(rows_.row(j));
    return graph_->weights(ids_[i], ids_[j]);
}

}  // namespace hct
