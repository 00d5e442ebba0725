#pragma once

#include "hct/similarity.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace hct {

struct PowerConfig {
    double epsilon = 0.1;
    std::optional<int> iteration_count;  // default ceil(4 ln(n) / epsilon)
    std::uint64_t seed = 0;

    int resolve_iterations(int n) const;
};

/// Result of thresholding a coordinate vector at every admissible prefix of
/// its ascending order and keeping the prefix with smallest conductance.
struct SweepResult {
    Eigen::VectorXd coordinates;
    std::vector<int> order;           // permutation sorting coordinates ascending
    int best_index = 0;               // prefix size of the chosen split
    double best_conductance = 0.0;
    std::vector<int> left_positions;  // first best_index entries of order
    bool degenerate_fallback = false; // all coordinates tied; median split used
};

/// Top eigenvector by seeded power iteration. Implicit mode iterates
/// v <- A~^T (A~ v) on the d-dimensional side with A~ = D^{-1/2} A; explicit
/// mode iterates on the PSD shift (I + D^{-1/2} C D^{-1/2}) / 2 of the
/// normalized adjacency, whose eigenvector order matches. Unit result,
/// deterministic per seed. Throws if any active degree is <= 0.
Eigen::VectorXd top_eigenvector(const SimilarityView& view, const PowerConfig& config);

/// Power iteration with the deflation projector (I - v v^T) applied each
/// step; converges to the second eigenvector, orthogonal to `first`.
Eigen::VectorXd second_eigenvector_deflated(const SimilarityView& view,
                                            const Eigen::VectorXd& first,
                                            const PowerConfig& config);

/// Implicit mode only: forms F = A^T D^{-1} A (d x d) and returns the
/// eigenvector of its second-largest eigenvalue from the dense Jacobi
/// eigensolver.
Eigen::VectorXd exact_second_right_singular(const SimilarityView& view);

/// Evaluates the conductance of every prefix S_j of the ascending coordinate
/// order with ceil(lo*m) <= j <= floor(hi*m) (always proper: 1 <= j <= m-1)
/// and returns the minimizer. Candidate positions are boundaries between
/// strictly increasing coordinate values, so prefix membership equals the
/// rule coordinate <= threshold. Ties break toward the most balanced j, then
/// the smaller j. All-tied coordinates fall back to a median split inside
/// the band. Implicit mode uses O(m d) incremental aggregate updates.
SweepResult sweep_cut(const SimilarityView& view, const Eigen::VectorXd& coordinates,
                      std::pair<double, double> balance_band);

// --- dense symmetric eigensolver -------------------------------------------

/// Eigenvalues sorted descending with matching eigenvector columns.
struct EigenDecomposition {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-10; throws after the sweep cap on pathological input.
EigenDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric);

/// Rayleigh quotient of x against the view's normalized similarity operator:
/// implicit mode x^T F x / x^T x with F = A^T D^{-1} A; explicit mode
/// x^T (D^{-1/2} C D^{-1/2}) x / x^T x.
double rayleigh_quotient(const SimilarityView& view, const Eigen::VectorXd& x);

/// Matrix-free seeded power iteration core. `apply` must implement a PSD
/// operator; when `deflate` is given the projector (I - vv^T) runs each step.
Eigen::VectorXd power_iteration(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    int dim, int iterations, std::mt19937_64& rng,
    const Eigen::VectorXd* deflate = nullptr);

// --- spectral-gap checks on explicit graphs --------------------------------

/// Second-largest eigenvalue of D^{-1/2} C D^{-1/2} via the dense solver.
double lambda2_dense(const ExplicitGraph& graph);

/// Minimum conductance over all proper subsets (n <= 20 guard).
double min_conductance_exhaustive(const ExplicitGraph& graph);

/// Conductance of the best sweep cut of D^{-1/2} v2; an upper bound on the
/// graph conductance that still satisfies gamma <= sqrt(2 (1 - lambda2)).
double sweep_conductance_upper(const ExplicitGraph& graph);

}  // namespace hct
