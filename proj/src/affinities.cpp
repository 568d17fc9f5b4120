#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "korpusmap/error.hpp"
#include "korpusmap/parallel.hpp"
#include "korpusmap/tsne.hpp"

namespace korpusmap {

Affinities Affinities::dense(std::size_t n, std::vector<double> values) {
    if (values.size() != n * n) throw PreconditionError("dense affinities need n*n values");
    Affinities p;
    p.n_ = n;
    p.values_ = std::move(values);
    return p;
}

Affinities Affinities::sparse(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
                              std::vector<double> values) {
    if (row_ptr.size() != n + 1 || row_ptr.front() != 0 || row_ptr.back() != values.size() ||
        cols.size() != values.size())
        throw PreconditionError("sparse affinities: inconsistent CSR arrays");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
            if (cols[e] >= n || cols[e] == i) throw PreconditionError("sparse affinities: bad column in row " + std::to_string(i));
            if (e > row_ptr[i] && cols[e] <= cols[e - 1])
                throw PreconditionError("sparse affinities: columns not increasing in row " + std::to_string(i));
        }
    Affinities p;
    p.n_ = n;
    p.sparse_ = true;
    p.row_ptr_ = std::move(row_ptr);
    p.cols_ = std::move(cols);
    p.values_ = std::move(values);
    return p;
}

double Affinities::at(std::size_t i, std::size_t j) const {
    if (!sparse_) return values_[i * n_ + j];
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

double Affinities::total() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) for_each_in_row(i, [&](std::size_t, double v) { sum += v; });
    return sum;
}

Affinities Affinities::to_dense() const {
    if (!sparse_) return *this;
    std::vector<double> values(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for_each_in_row(i, [&](std::size_t j, double v) { values[i * n_ + j] = v; });
    return dense(n_, std::move(values));
}

void Affinities::validate(double tol) const {
    if (!sparse_)
        for (std::size_t i = 0; i < n_; ++i)
            if (values_[i * n_ + i] != 0.0) throw Error("affinities: non-zero diagonal at " + std::to_string(i));
    for (std::size_t i = 0; i < n_; ++i) {
        bool ok = true;
        for_each_in_row(i, [&](std::size_t j, double v) {
            if (!(v >= 0.0) || !std::isfinite(v)) ok = false;
            if (std::abs(v - at(j, i)) > tol) ok = false;
        });
        if (!ok) throw Error("affinities: row " + std::to_string(i) + " is negative or asymmetric");
    }
    const double sum = total();
    if (std::abs(sum - 1.0) > tol) throw Error("affinities: entries sum to " + std::to_string(sum));
}

DenseMatrix squared_distances(const DenseMatrix& x) {
    if (!x.all_finite()) throw PreconditionError("squared_distances: input contains non-finite values");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    DenseMatrix out(n, n);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto xi = x.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const auto xj = x.row(j);
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = xi[c] - xj[c];
                    s += diff * diff;
                }
                out(i, j) = s;
            }
        }
    });
    return out;
}

namespace {

struct RowResult {
    double beta = 1.0;
    double perplexity = 0.0;
    bool converged = false;
};

// Finds the Gaussian precision for one point by bisection on beta so that
// exp(entropy) of the conditional distribution matches `target`. Writes the
// conditional probabilities into `p`.
RowResult calibrate_row(std::span<const double> d2, double target, const CalibrationOptions& options,
                        std::span<double> p) {
    const std::size_t m = d2.size();
    const double dmin = *std::min_element(d2.begin(), d2.end());

    auto evaluate = [&](double beta) {
        double sum = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double shifted = d2[j] - dmin;
            p[j] = std::exp(-beta * shifted);
            sum += p[j];
            weighted += p[j] * shifted;
        }
        return std::exp(std::log(sum) + beta * weighted / sum);
    };

    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    RowResult best{beta, evaluate(beta), false};
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        const double perp = it == 0 ? best.perplexity : evaluate(beta);
        if (std::abs(perp - target) < std::abs(best.perplexity - target)) best = {beta, perp, false};
        if (std::abs(perp - target) < options.tol) {
            best = {beta, perp, true};
            break;
        }
        if (perp > target) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
        } else {
            hi = beta;
            beta = lo == 0.0 ? beta * 0.5 : 0.5 * (beta + lo);
        }
    }
    evaluate(best.beta);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= sum;
    return best;
}

// Entropy of a distribution over m outcomes is at most ln m, so a target
// above m neighbors can never be reached.
void check_perplexity(std::size_t candidates, double perplexity) {
    if (!(perplexity >= 1.0) || !std::isfinite(perplexity))
        throw PreconditionError("perplexity must be a finite value >= 1");
    if (perplexity > static_cast<double>(candidates))
        throw PreconditionError("perplexity " + std::to_string(perplexity) + " is infeasible with " +
                                std::to_string(candidates) + " neighbors per point");
}

void fill_report(CalibrationReport* report, std::vector<RowResult> rows) {
    if (!report) return;
    report->beta.clear();
    report->achieved_perplexity.clear();
    report->unconverged = 0;
    for (const auto& r : rows) {
        report->beta.push_back(r.beta);
        report->achieved_perplexity.push_back(r.perplexity);
        if (!r.converged) ++report->unconverged;
    }
}

}  // namespace

Affinities calibrate_affinities(const DenseMatrix& d2, double perplexity, const CalibrationOptions& options,
                                CalibrationReport* report) {
    const std::size_t n = d2.rows();
    if (d2.cols() != n) throw PreconditionError("distance matrix must be square");
    if (n < 2) throw PreconditionError("calibration needs at least 2 points");
    check_perplexity(n - 1, perplexity);

    std::vector<double> conditional(n * n, 0.0);
    std::vector<RowResult> rows(n);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist(n - 1);
        std::vector<double> prob(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0, t = 0; j < n; ++j)
                if (j != i) dist[t++] = d2(i, j);
            rows[i] = calibrate_row(dist, perplexity, options, prob);
            for (std::size_t j = 0, t = 0; j < n; ++j)
                if (j != i) conditional[i * n + j] = prob[t++];
        }
    });

    std::vector<double> joint(n * n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (conditional[i * n + j] + conditional[j * n + i]) * scale;
            joint[i * n + j] = v;
            joint[j * n + i] = v;
        }
    fill_report(report, std::move(rows));
    return Affinities::dense(n, std::move(joint));
}

Affinities calibrate_affinities(const NeighborLists& neighbors, double perplexity, const CalibrationOptions& options,
                                CalibrationReport* report) {
    const std::size_t n = neighbors.n;
    const std::size_t k = neighbors.k;
    if (k == 0 || k >= n) throw PreconditionError("neighbor count must lie in [1, N-1]");
    check_perplexity(k, perplexity);

    std::vector<double> conditional(n * k);
    std::vector<RowResult> rows(n);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            rows[i] = calibrate_row(std::span<const double>(neighbors.distance2.data() + i * k, k), perplexity, options,
                                    std::span<double>(conditional.data() + i * k, k));
    });

    // P + Pᵀ over the union of both neighbor patterns.
    std::vector<std::map<std::size_t, double>> sym(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            const std::size_t j = neighbors.index[i * k + t];
            const double v = conditional[i * k + t];
            sym[i][j] += v;
            sym[j][i] += v;
        }
    double total = 0.0;
    for (const auto& row : sym)
        for (const auto& [j, v] : row) total += v;

    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> values;
    for (const auto& row : sym) {
        for (const auto& [j, v] : row) {
            cols.push_back(j);
            values.push_back(v / total);
        }
        row_ptr.push_back(cols.size());
    }
    fill_report(report, std::move(rows));
    return Affinities::sparse(n, std::move(row_ptr), std::move(cols), std::move(values));
}

NeighborLists exact_knn(const DenseMatrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    if (k == 0 || k >= n) throw PreconditionError("k must lie in [1, N-1]");
    if (!x.all_finite()) throw PreconditionError("exact_knn: input contains non-finite values");
    NeighborLists out{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
    const std::size_t d = x.cols();
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> cand(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            const auto xi = x.row(i);
            for (std::size_t j = 0, t = 0; j < n; ++j) {
                if (j == i) continue;
                const auto xj = x.row(j);
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = xi[c] - xj[c];
                    s += diff * diff;
                }
                cand[t++] = {s, j};
            }
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            for (std::size_t t = 0; t < k; ++t) {
                out.index[i * k + t] = cand[t].second;
                out.distance2[i * k + t] = cand[t].first;
            }
        }
    });
    return out;
}

Affinities knn_affinities(const DenseMatrix& x, double perplexity, const CalibrationOptions& options,
                          CalibrationReport* report) {
    if (!(3.0 * perplexity < static_cast<double>(x.rows())))
        throw PreconditionError("perplexity " + std::to_string(perplexity) + " is infeasible for " +
                                std::to_string(x.rows()) + " points (requires 3 * perplexity < N)");
    const auto k = std::min(static_cast<std::size_t>(std::floor(3.0 * perplexity)), x.rows() - 1);
    return calibrate_affinities(exact_knn(x, k), perplexity, options, report);
}

}  // namespace korpusmap
