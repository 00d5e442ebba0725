#include "hct/spectral.hpp"

#include "hct/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hct {

namespace {

constexpr double kJacobiTol = 1e-10;
constexpr int kJacobiMaxSweeps = 100;

void require_positive_degrees(const SimilarityView& view) {
    if (view.size() < 1) throw std::invalid_argument("empty view");
    if ((view.degrees().array() <= 0.0).any()) {
        throw std::domain_error("spectral routine requires strictly positive degrees");
    }
}

// Implicit: y = F v = A^T D^{-1} A v, the PSD right-side operator of
// A~ = D^{-1/2} A. Explicit: y = (v + D^{-1/2} C D^{-1/2} v) / 2, a PSD
// shift of the normalized adjacency that preserves eigenvector order.
std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>
make_operator(const SimilarityView& view) {
    if (view.is_implicit()) {
        const Eigen::MatrixXd& a = view.rows();
        const Eigen::VectorXd inv_deg = view.degrees().cwiseInverse();
        return [&a, inv_deg](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
            Eigen::VectorXd t = a * v;
            t.array() *= inv_deg.array();
            y.noalias() = a.transpose() * t;
        };
    }
    const auto& w = view.graph().weights;
    const std::vector<int> ids = view.ids();
    const Eigen::VectorXd inv_sqrt_deg = view.degrees().cwiseSqrt().cwiseInverse();
    const int m = view.size();
    return [&w, ids, inv_sqrt_deg, m](const Eigen::VectorXd& v, Eigen::VectorXd& y) {
        Eigen::VectorXd u = v.cwiseProduct(inv_sqrt_deg);
        y.resize(m);
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            const auto row = w.row(ids[i]);
            for (int j = 0; j < m; ++j) acc += row[ids[j]] * u[j];
            y[i] = 0.5 * (v[i] + acc * inv_sqrt_deg[i]);
        }
    };
}

int operator_dim(const SimilarityView& view) {
    return view.is_implicit() ? view.dim() : view.size();
}

}  // namespace

int PowerConfig::resolve_iterations(int n) const {
    if (iteration_count) {
        if (*iteration_count < 1) throw std::invalid_argument("iteration_count must be >= 1");
        return *iteration_count;
    }
    const double ln_n = std::log(static_cast<double>(std::max(n, 2)));
    return static_cast<int>(std::ceil(4.0 * ln_n / epsilon));
}

Eigen::VectorXd power_iteration(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int dim, int iterations, std::mt19937_64& rng, const Eigen::VectorXd* deflate) {
    if (dim < 1) throw std::invalid_argument("operator dimension must be >= 1");
    Eigen::VectorXd x = gaussian_vector(dim, rng);
    if (deflate) x -= deflate->dot(x) * (*deflate);
    double norm = x.norm();
    while (norm < 1e-300) {  // astronomically unlikely; keep the stream deterministic
        x = gaussian_vector(dim, rng);
        if (deflate) x -= deflate->dot(x) * (*deflate);
        norm = x.norm();
    }
    x /= norm;

    Eigen::VectorXd y(dim);
    for (int it = 0; it < iterations; ++it) {
        apply(x, y);
        if (deflate) y -= deflate->dot(y) * (*deflate);
        const double ynorm = y.norm();
        if (ynorm < 1e-300) {
            // x fell into the operator's kernel; restart from fresh noise.
            x = gaussian_vector(dim, rng);
            if (deflate) x -= deflate->dot(x) * (*deflate);
            x.normalize();
            continue;
        }
        x = y / ynorm;
    }
    return x;
}

Eigen::VectorXd top_eigenvector(const SimilarityView& view, const PowerConfig& config) {
    require_positive_degrees(view);
    const int dim = operator_dim(view);
    const int iters = config.resolve_iterations(view.size());
    auto rng = make_rng(config.seed, 0x746f70ULL);
    return power_iteration(make_operator(view), dim, iters, rng);
}

Eigen::VectorXd second_eigenvector_deflated(const SimilarityView& view,
                                            const Eigen::VectorXd& first,
                                            const PowerConfig& config) {
    require_positive_degrees(view);
    const int dim = operator_dim(view);
    if (first.size() != dim) throw std::invalid_argument("deflation vector dimension mismatch");
    if (std::abs(first.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("deflation vector must be unit norm");
    }
    const int iters = config.resolve_iterations(view.size());
    auto rng = make_rng(config.seed, 0x736563ULL);
    return power_iteration(make_operator(view), dim, iters, rng, &first);
}

EigenDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric) {
    const int n = static_cast<int>(symmetric.rows());
    if (symmetric.cols() != n) throw std::invalid_argument("matrix not square");
    Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    auto off_norm = [&a, n]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() >= kJacobiTol) {
        if (++sweep > kJacobiMaxSweeps) {
            throw std::runtime_error("jacobi eigensolver failed to converge");
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](int i, int j) { return a(i, i) > a(j, j); });
    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]);
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

Eigen::VectorXd exact_second_right_singular(const SimilarityView& view) {
    if (!view.is_implicit()) {
        throw std::invalid_argument("exact rule requires implicit (vector) mode");
    }
    require_positive_degrees(view);
    if (view.size() < 2 || view.dim() < 2) {
        throw std::invalid_argument("need at least 2 points and 2 dimensions");
    }
    const Eigen::MatrixXd& a = view.rows();
    const Eigen::VectorXd inv_deg = view.degrees().cwiseInverse();
    Eigen::MatrixXd scaled = a.array().colwise() * inv_deg.array();
    Eigen::MatrixXd f = a.transpose() * scaled;  // d x d, PSD
    EigenDecomposition eig = jacobi_eigen(f);
    return eig.vectors.col(1);
}

double rayleigh_quotient(const SimilarityView& view, const Eigen::VectorXd& x) {
    const double xx = x.squaredNorm();
    if (xx <= 0.0) throw std::invalid_argument("zero vector");
    if (view.is_implicit()) {
        Eigen::VectorXd t = view.rows() * x;
        t.array() *= view.degrees().array().rsqrt();
        return t.squaredNorm() / xx;
    }
    const auto& w = view.graph().weights;
    const auto& ids = view.ids();
    const Eigen::VectorXd u = x.cwiseProduct(view.degrees().cwiseSqrt().cwiseInverse());
    const int m = view.size();
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto row = w.row(ids[i]);
        double ri = 0.0;
        for (int j = 0; j < m; ++j) ri += row[ids[j]] * u[j];
        acc += u[i] * ri;
    }
    return acc / xx;
}

SweepResult sweep_cut(const SimilarityView& view, const Eigen::VectorXd& coordinates,
                      std::pair<double, double> balance_band) {
    const int m = view.size();
    if (coordinates.size() != m) throw std::invalid_argument("coordinate length mismatch");
    if (m < 2) throw std::invalid_argument("sweep needs at least 2 points");
    const auto [lo, hi] = balance_band;
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw std::invalid_argument("bad balance band");

    SweepResult res;
    res.coordinates = coordinates;
    res.order.resize(m);
    std::iota(res.order.begin(), res.order.end(), 0);
    std::stable_sort(res.order.begin(), res.order.end(),
                     [&coordinates](int i, int j) { return coordinates[i] < coordinates[j]; });

    const int j_lo = std::max(1, static_cast<int>(std::ceil(lo * m)));
    const int j_hi = std::min(m - 1, static_cast<int>(std::floor(hi * m)));
    if (j_lo > j_hi) throw std::invalid_argument("balance band admits no prefix");

    const double max_abs = coordinates.cwiseAbs().maxCoeff();
    const double spread = coordinates[res.order[m - 1]] - coordinates[res.order[0]];
    const bool all_tied = spread <= 1e-12 * std::max(1.0, max_abs);

    auto finish = [&](int j, double gamma, bool fallback) {
        res.best_index = j;
        res.best_conductance = gamma;
        res.left_positions.assign(res.order.begin(), res.order.begin() + j);
        res.degenerate_fallback = fallback;
        return res;
    };

    if (all_tied) {
        // No usable ordering; median split inside the band.
        const int j = std::clamp((m + 1) / 2, j_lo, j_hi);
        std::vector<int> left(res.order.begin(), res.order.begin() + j);
        return finish(j, view.conductance(left), true);
    }

    int best_j = -1;
    double best_gamma = 0.0;
    int best_balance = 0;  // distance from the most balanced position, |2j - m|
    const double total_volume = view.degrees().sum();

    if (view.is_implicit()) {
        const Eigen::MatrixXd& rows = view.rows();
        const Eigen::VectorXd& s = view.row_sum();
        Eigen::VectorXd prefix = Eigen::VectorXd::Zero(view.dim());
        for (int t = 0; t < m - 1; ++t) {
            prefix += rows.row(res.order[t]);
            const int j = t + 1;
            if (j < j_lo || j > j_hi) continue;
            if (!(coordinates[res.order[t]] < coordinates[res.order[t + 1]])) continue;
            double cut = prefix.dot(s - prefix);
            if (cut < 0.0) {
                view.note_clamp();
                cut = 0.0;
            }
            const double vol_left = prefix.dot(s);
            const double denom = std::min(vol_left, total_volume - vol_left);
            if (denom <= 0.0) continue;
            const double gamma = cut / denom;
            const int balance = std::abs(2 * j - m);
            if (best_j < 0 || gamma < best_gamma ||
                (gamma == best_gamma && (balance < best_balance ||
                                         (balance == best_balance && j < best_j)))) {
                best_j = j;
                best_gamma = gamma;
                best_balance = balance;
            }
        }
    } else {
        const auto& w = view.graph().weights;
        const auto& ids = view.ids();
        std::vector<char> in_left(m, 0);
        double cut = 0.0;
        double vol_left = 0.0;
        for (int t = 0; t < m - 1; ++t) {
            const int pos = res.order[t];
            double to_left = 0.0;
            const auto row = w.row(ids[pos]);
            for (int u = 0; u < m; ++u) {
                if (in_left[u]) to_left += row[ids[u]];
            }
            cut += view.degrees()[pos] - 2.0 * to_left;
            vol_left += view.degrees()[pos];
            in_left[pos] = 1;
            const int j = t + 1;
            if (j < j_lo || j > j_hi) continue;
            if (!(coordinates[res.order[t]] < coordinates[res.order[t + 1]])) continue;
            const double denom = std::min(vol_left, total_volume - vol_left);
            if (denom <= 0.0) continue;
            const double gamma = std::max(cut, 0.0);
            const double g = gamma / denom;
            const int balance = std::abs(2 * j - m);
            if (best_j < 0 || g < best_gamma ||
                (g == best_gamma && (balance < best_balance ||
                                     (balance == best_balance && j < best_j)))) {
                best_j = j;
                best_gamma = g;
                best_balance = balance;
            }
        }
    }

    if (best_j < 0) {
        // Every in-band boundary was a coordinate tie (or zero-volume side);
        // treat like the fully tied case.
        const int j = std::clamp((m + 1) / 2, j_lo, j_hi);
        std::vector<int> left(res.order.begin(), res.order.begin() + j);
        return finish(j, view.conductance(left), true);
    }
    return finish(best_j, best_gamma, false);
}

double lambda2_dense(const ExplicitGraph& graph) {
    const int n = graph.n();
    Eigen::VectorXd inv_sqrt = graph.degree.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd norm_adj =
        inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal();
    EigenDecomposition eig = jacobi_eigen(norm_adj);
    if (n < 2) throw std::invalid_argument("need n >= 2 for lambda2");
    return eig.values[1];
}

double min_conductance_exhaustive(const ExplicitGraph& graph) {
    const int n = graph.n();
    if (n > 20) throw std::invalid_argument("exhaustive conductance limited to n <= 20");
    if (n < 2) throw std::invalid_argument("need n >= 2");
    const double total = graph.degree.sum();
    double best = std::numeric_limits<double>::infinity();
    // Fix node 0 on the left to enumerate each split once.
    for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
        const std::uint32_t full = (mask << 1) | 1u;
        double cut = 0.0, vol = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(full >> i & 1u)) continue;
            vol += graph.degree[i];
            for (int j = 0; j < n; ++j) {
                if (!(full >> j & 1u)) cut += graph.weights(i, j);
            }
        }
        const double denom = std::min(vol, total - vol);
        if (denom <= 0.0) continue;
        best = std::min(best, cut / denom);
    }
    return best;
}

double sweep_conductance_upper(const ExplicitGraph& graph) {
    const int n = graph.n();
    Eigen::VectorXd inv_sqrt = graph.degree.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd norm_adj =
        inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal();
    EigenDecomposition eig = jacobi_eigen(norm_adj);
    Eigen::VectorXd coords = eig.vectors.col(1).cwiseProduct(inv_sqrt);

    SimilarityView view = SimilarityView::explicit_graph(graph);
    // Full-band sweep, but also admit tie boundaries by perturbing nothing:
    // the standard sweep bound only needs the best prefix over distinct
    // coordinate values, which sweep_cut already enumerates.
    SweepResult res = sweep_cut(view, coords, {0.0, 1.0});
    (void)n;
    return res.best_conductance;
}

}  // namespace hct
