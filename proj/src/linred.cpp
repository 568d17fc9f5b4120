#include "korpusmap/linred.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "korpusmap/error.hpp"

namespace korpusmap {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t>;

// Column-centered view of the data exposing only the products the
// randomized solver needs. Centering is applied implicitly:
//   Xc·M  = X·M  - 1·(μᵀM)
//   Xcᵀ·M = Xᵀ·M - μ·(1ᵀM)
template <typename Data>
class CenteredOperator {
public:
    CenteredOperator(const Data& x, Vec mean) : x_(x), mean_(std::move(mean)) {}

    Eigen::Index rows() const { return x_.rows(); }
    Eigen::Index cols() const { return x_.cols(); }
    const Vec& mean() const { return mean_; }

    Mat times(const Mat& m) const {
        Mat out = x_ * m;
        out.rowwise() -= (mean_.transpose() * m);
        return out;
    }

    Mat transpose_times(const Mat& m) const {
        Mat out = x_.transpose() * m;
        out -= mean_ * m.colwise().sum();
        return out;
    }

    Mat dense_centered() const {
        Mat out = Mat(x_);
        out.rowwise() -= mean_.transpose();
        return out;
    }

private:
    const Data& x_;
    Vec mean_;
};

Mat orthonormal_basis(const Mat& a) {
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ() * Mat::Identity(a.rows(), a.cols());
}

// Columns left at zero (directions with no variance) are replaced by
// canonical basis vectors orthogonalized against the remaining columns.
void complete_orthonormal(Mat& components) {
    const Eigen::Index d = components.rows();
    std::vector<bool> filled(static_cast<std::size_t>(components.cols()));
    for (Eigen::Index c = 0; c < components.cols(); ++c) filled[c] = components.col(c).norm() > 0.5;
    Eigen::Index e = 0;
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
        if (filled[c]) continue;
        while (e < d) {
            Vec v = Vec::Unit(d, e++);
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index j = 0; j < components.cols(); ++j)
                    if (filled[j]) v -= components.col(j).dot(v) * components.col(j);
            const double norm = v.norm();
            if (norm > 1e-6) {
                components.col(c) = v / norm;
                filled[c] = true;
                break;
            }
        }
    }
}

// Largest-|coordinate| entry made positive; ties resolve to the lowest index.
void fix_signs(Mat& components) {
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < components.rows(); ++r)
            if (std::abs(components(r, c)) > std::abs(components(best, c))) best = r;
        if (components(best, c) < 0) components.col(c) *= -1.0;
    }
}

struct Eigenpairs {
    Vec values;   // descending
    Mat vectors;  // matching columns
};

Eigenpairs descending_eigen(const Mat& symmetric) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(symmetric);
    if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver failed to converge");
    const Eigen::Index n = symmetric.rows();
    Eigenpairs out{Vec(n), Mat(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

// Eigenvalues below this fraction of the largest count as zero.
constexpr double kRelativeZero = 1e-12;

template <typename Op>
PcaModel finish(const Op& op, Mat components, Vec variances, std::size_t k) {
    const Eigen::Index d = op.cols();
    const double top = variances.size() > 0 ? std::max(variances(0), 0.0) : 0.0;
    for (Eigen::Index i = 0; i < variances.size(); ++i)
        if (variances(i) <= kRelativeZero * top || variances(i) <= 0.0) variances(i) = 0.0;
    complete_orthonormal(components);
    fix_signs(components);

    PcaModel model;
    model.mean.assign(op.mean().data(), op.mean().data() + d);
    model.components = DenseMatrix(k, static_cast<std::size_t>(d));
    model.explained_variance.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        model.explained_variance[c] = variances(static_cast<Eigen::Index>(c));
        for (Eigen::Index r = 0; r < d; ++r) model.components(c, static_cast<std::size_t>(r)) = components(r, c);
    }
    return model;
}

template <typename Op>
PcaModel fit_exact(const Op& op, std::size_t k) {
    const Eigen::Index n = op.rows();
    const Eigen::Index d = op.cols();
    const double denom = static_cast<double>(n - 1);
    const Mat xc = op.dense_centered();
    const auto kk = static_cast<Eigen::Index>(k);
    if (d <= n) {
        const Mat cov = (xc.transpose() * xc) / denom;
        Eigenpairs eig = descending_eigen(cov);
        return finish(op, eig.vectors.leftCols(kk), eig.values.head(kk), k);
    }
    // Few rows, many columns: eigendecompose the Gram matrix and map back.
    const Mat gram = xc * xc.transpose();
    Eigenpairs eig = descending_eigen(gram);
    Mat components = Mat::Zero(d, kk);
    Vec variances(kk);
    const double top = std::max(eig.values(0), 0.0);
    for (Eigen::Index i = 0; i < kk; ++i) {
        const double lambda = eig.values(i);
        variances(i) = lambda / denom;
        if (lambda > kRelativeZero * top && lambda > 0.0) components.col(i) = xc.transpose() * eig.vectors.col(i) / std::sqrt(lambda);
    }
    return finish(op, std::move(components), std::move(variances), k);
}

template <typename Op>
PcaModel fit_randomized(const Op& op, std::size_t k, std::uint64_t seed, const PcaOptions& options) {
    const Eigen::Index n = op.rows();
    const Eigen::Index d = op.cols();
    const Eigen::Index width = std::min<Eigen::Index>(static_cast<Eigen::Index>(k + options.oversampling), std::min(n, d));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat omega(d, width);
    for (Eigen::Index j = 0; j < width; ++j)
        for (Eigen::Index i = 0; i < d; ++i) omega(i, j) = normal(rng);

    Mat q = orthonormal_basis(op.times(omega));
    for (std::size_t it = 0; it < options.power_iterations; ++it) {
        const Mat z = orthonormal_basis(op.transpose_times(q));
        q = orthonormal_basis(op.times(z));
    }

    // B = Qᵀ Xc (width × d); its row space holds the leading directions.
    const Mat bt = op.transpose_times(q);
    Eigenpairs eig = descending_eigen(bt.transpose() * bt);
    const auto kk = static_cast<Eigen::Index>(k);
    Mat components = Mat::Zero(d, kk);
    Vec variances(kk);
    const double top = std::max(eig.values(0), 0.0);
    for (Eigen::Index i = 0; i < kk; ++i) {
        const double lambda = eig.values(i);
        variances(i) = lambda / static_cast<double>(n - 1);
        if (lambda > kRelativeZero * top && lambda > 0.0) components.col(i) = bt * eig.vectors.col(i) / std::sqrt(lambda);
    }
    // One Gram-Schmidt sweep removes the rounding left by the back-projection.
    for (Eigen::Index i = 0; i < kk; ++i) {
        if (components.col(i).squaredNorm() == 0.0) continue;
        for (Eigen::Index j = 0; j < i; ++j) components.col(i) -= components.col(j).dot(components.col(i)) * components.col(j);
        components.col(i).normalize();
    }
    return finish(op, std::move(components), std::move(variances), k);
}

void check_fit_args(std::size_t rows, std::size_t cols, std::size_t k) {
    if (rows < 2) throw PreconditionError("PCA needs at least 2 rows, got " + std::to_string(rows));
    if (k < 1 || k > std::min(rows - 1, cols))
        throw PreconditionError("PCA dimension k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(std::min(rows - 1, cols)) + "]");
}

template <typename Data>
PcaModel fit(const Data& x, std::size_t k, std::uint64_t seed, const PcaOptions& options) {
    const auto rows = static_cast<std::size_t>(x.rows());
    const auto cols = static_cast<std::size_t>(x.cols());
    check_fit_args(rows, cols, k);
    Vec mean = Vec(x.transpose() * Vec::Ones(x.rows())) / static_cast<double>(rows);
    CenteredOperator<Data> op(x, std::move(mean));
    if (std::min(rows, cols) <= options.exact_threshold) return fit_exact(op, k);
    return fit_randomized(op, k, seed, options);
}

SparseRows to_eigen(const DocTermMatrix& x) {
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets;
    triplets.reserve(x.nnz());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto cols = x.row_columns(r);
        const auto w = x.row_weights(r);
        for (std::size_t e = 0; e < cols.size(); ++e)
            triplets.emplace_back(static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(cols[e]), w[e]);
    }
    SparseRows m(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

RowMajorMap as_eigen(const DenseMatrix& x) {
    return RowMajorMap(x.values().data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
}

template <typename Data>
DenseMatrix transform(const PcaModel& model, const Data& x) {
    if (static_cast<std::size_t>(x.cols()) != model.input_dim())
        throw PreconditionError("PCA transform: input has " + std::to_string(x.cols()) + " columns, model expects " +
                                std::to_string(model.input_dim()));
    const RowMajorMap comps = as_eigen(model.components);
    const Eigen::Map<const Vec> mean(model.mean.data(), static_cast<Eigen::Index>(model.mean.size()));
    Mat scores = x * comps.transpose();
    scores.rowwise() -= (comps * mean).transpose();
    DenseMatrix out(static_cast<std::size_t>(x.rows()), model.k());
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c)
            out(r, c) = scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return out;
}

}  // namespace

PcaModel pca_fit(const DenseMatrix& x, std::size_t k, std::uint64_t seed, const PcaOptions& options) {
    if (!x.all_finite()) throw PreconditionError("PCA input contains non-finite values");
    return fit(Mat(as_eigen(x)), k, seed, options);
}

PcaModel pca_fit(const DocTermMatrix& x, std::size_t k, std::uint64_t seed, const PcaOptions& options) {
    return fit(to_eigen(x), k, seed, options);
}

DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x) { return transform(model, Mat(as_eigen(x))); }

DenseMatrix pca_transform(const PcaModel& model, const DocTermMatrix& x) { return transform(model, to_eigen(x)); }

DenseMatrix pca_inverse_transform(const PcaModel& model, const DenseMatrix& scores) {
    if (scores.cols() != model.k()) throw PreconditionError("PCA inverse transform: dimension mismatch");
    DenseMatrix out(scores.rows(), model.input_dim());
    for (std::size_t r = 0; r < scores.rows(); ++r)
        for (std::size_t c = 0; c < model.input_dim(); ++c) {
            double v = model.mean[c];
            for (std::size_t j = 0; j < model.k(); ++j) v += scores(r, j) * model.components(j, c);
            out(r, c) = v;
        }
    return out;
}

}  // namespace korpusmap
