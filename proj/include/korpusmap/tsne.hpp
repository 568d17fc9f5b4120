#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "korpusmap/matrix.hpp"

namespace korpusmap {

/// Floor applied to probabilities inside logarithms.
inline constexpr double kProbabilityFloor = 1e-12;

/// Symmetric joint probabilities P over point pairs, stored either densely
/// (n × n) or as a symmetric sparse graph. p_ii is zero and not stored.
class Affinities {
public:
    Affinities() = default;

    static Affinities dense(std::size_t n, std::vector<double> values);
    /// CSR storage; columns strictly increasing within each row and the
    /// pattern symmetric.
    static Affinities sparse(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
                             std::vector<double> values);

    std::size_t size() const { return n_; }
    bool is_sparse() const { return sparse_; }
    std::size_t stored_entries() const { return values_.size(); }

    /// p_ij, zero when not stored.
    double at(std::size_t i, std::size_t j) const;

    /// Calls f(j, p_ij) for every stored off-diagonal entry of row i in
    /// increasing j. Dense storage visits every j != i.
    template <typename F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (sparse_) {
            for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) f(cols_[e], values_[e]);
        } else {
            const double* row = values_.data() + i * n_;
            for (std::size_t j = 0; j < n_; ++j)
                if (j != i) f(j, row[j]);
        }
    }

    double total() const;
    Affinities to_dense() const;

    /// Throws Error unless P is symmetric to `tol`, non-negative, has a zero
    /// diagonal, and sums to 1 within `tol`.
    void validate(double tol = 1e-9) const;

private:
    std::size_t n_ = 0;
    bool sparse_ = false;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

/// Exact pairwise squared Euclidean distances, accumulated per coordinate
/// difference so that every entry is non-negative and duplicates give 0.
DenseMatrix squared_distances(const DenseMatrix& x);

struct CalibrationOptions {
    /// Allowed |achieved perplexity - target|.
    double tol = 1e-5;
    std::size_t max_iter = 50;
};

struct CalibrationReport {
    /// Gaussian precision per point.
    std::vector<double> beta;
    std::vector<double> achieved_perplexity;
    /// Points whose search hit max_iter before reaching `tol`.
    std::size_t unconverged = 0;
};

/// Exact neighbor lists, row i holding k (index, squared distance) pairs in
/// increasing distance order, ties broken by lower index.
struct NeighborLists {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::size_t> index;
    std::vector<double> distance2;
};

NeighborLists exact_knn(const DenseMatrix& x, std::size_t k);

/// Conditional Gaussian affinities with per-point precision found by
/// bisection, then symmetrized as (p_j|i + p_i|j) / 2N. Requires
/// 1 <= perplexity <= N - 1; run_tsne and knn_affinities further require
/// 3 · perplexity < N.
Affinities calibrate_affinities(const DenseMatrix& d2, double perplexity, const CalibrationOptions& options = {},
                                CalibrationReport* report = nullptr);

/// Same calibration restricted to each point's neighbor list; the result is
/// symmetrized and renormalized to sum 1.
Affinities calibrate_affinities(const NeighborLists& neighbors, double perplexity,
                                const CalibrationOptions& options = {}, CalibrationReport* report = nullptr);

/// k = floor(3 · perplexity) exact neighbors, then sparse calibration.
Affinities knn_affinities(const DenseMatrix& x, double perplexity, const CalibrationOptions& options = {},
                          CalibrationReport* report = nullptr);

struct JointQ {
    /// N × N, zero diagonal, entries sum to 1.
    DenseMatrix q;
    /// Σ_{i≠j} (1 + |y_i - y_j|²)^-1.
    double z = 0.0;
};

/// Student-t (one degree of freedom) similarities of a 2D layout.
JointQ joint_q(const DenseMatrix& y);

/// KL(P || Q) with both sides floored at kProbabilityFloor. Dense P sums over
/// all pairs; sparse P over its stored pairs (absent pairs have p = 0 and
/// contribute nothing).
double kl_divergence(const Affinities& p, const DenseMatrix& y);

/// dC/dy_i = 4 Σ_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|²)^-1, O(N²).
DenseMatrix gradient_exact(const Affinities& p, const DenseMatrix& y);

/// Exact attraction over the stored entries of P plus quadtree-approximated
/// repulsion. theta = 0 disables the approximation.
DenseMatrix gradient_barnes_hut(const Affinities& p, const DenseMatrix& y, double theta);

enum class TsneInit { SeededGaussian, FromPca };

struct TsneConfig {
    double perplexity = 30.0;
    std::size_t n_iter = 1000;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iters = 250;
    double learning_rate = 200.0;
    double momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch_iter = 250;
    /// 0 selects exact gradients.
    double theta = 0.5;
    TsneInit init = TsneInit::SeededGaussian;
    /// Standard deviation of the initial layout.
    double init_scale = 1e-4;
    std::uint64_t seed = 0;
    /// Inputs with more columns are first reduced by PCA to this many.
    std::size_t input_dim_reduction = 50;
    std::size_t kl_every = 10;
    /// Largest N for which theta = 0 uses dense affinities.
    std::size_t dense_limit = 2000;

    /// Throws PreconditionError for out-of-range values, or when the
    /// point count n is too small for the perplexity.
    void validate(std::size_t n) const;
};

struct KlPoint {
    std::size_t iteration = 0;
    double kl = 0.0;
};

struct EmbedState {
    DenseMatrix y;
    DenseMatrix velocity;
    DenseMatrix gains;
    std::size_t iteration = 0;
    std::vector<KlPoint> kl_trace;
};

/// Called after each recorded KL value; return false to stop early.
using TsneProgress = std::function<bool(const KlPoint&)>;

/// Full embedding run: optional PCA, affinities (dense when theta = 0 and
/// N <= dense_limit, sparse otherwise), early exaggeration, momentum
/// gradient descent with adaptive gains, and re-centering every iteration.
/// KL is recorded at iteration 0, every kl_every iterations, and at the end.
/// Deterministic for a fixed seed and independent of the worker count.
EmbedState run_tsne(const DenseMatrix& x, const TsneConfig& config, const TsneProgress& progress = {});

/// `iteration kl` per line.
std::string format_kl_trace(std::span<const KlPoint> trace);

namespace detail {

/// Gradient with attraction scaled by `exaggeration`; writes N × 2 into
/// `grad`. Returns the normalizer Z.
double gradient_exact_into(const Affinities& p, const DenseMatrix& y, double exaggeration, DenseMatrix& grad);
double gradient_barnes_hut_into(const Affinities& p, const DenseMatrix& y, double theta, double exaggeration,
                                DenseMatrix& grad);

}  // namespace detail

}  // namespace korpusmap
