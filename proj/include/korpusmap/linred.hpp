#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "korpusmap/matrix.hpp"

namespace korpusmap {

/// Principal directions of column-centered data.
struct PcaModel {
    std::vector<double> mean;
    /// k × n_cols, orthonormal rows.
    DenseMatrix components;
    /// Sample variance (n - 1 denominator) along each component,
    /// non-increasing.
    std::vector<double> explained_variance;

    std::size_t k() const { return components.rows(); }
    std::size_t input_dim() const { return mean.size(); }
};

struct PcaOptions {
    std::size_t oversampling = 8;
    std::size_t power_iterations = 2;
    /// Inputs with min(rows, cols) at or below this are solved exactly.
    std::size_t exact_threshold = 64;
};

/// Top-k principal components.
///
/// Small problems are solved by a dense eigendecomposition of the covariance
/// (or Gram) matrix. Otherwise a seeded Gaussian test matrix with
/// `oversampling` extra columns sketches the range of the centered data,
/// refined by `power_iterations` orthonormalized power steps, and the
/// projected problem is solved exactly. Centering is implicit, so sparse
/// input is never densified on the randomized path.
///
/// Each component is sign-normalized so its largest-magnitude coordinate is
/// positive. Directions with zero variance are completed to an orthonormal
/// set deterministically.
///
/// Requires n_rows >= 2 and 1 <= k <= min(n_rows - 1, n_cols).
PcaModel pca_fit(const DenseMatrix& x, std::size_t k, std::uint64_t seed, const PcaOptions& options = {});
PcaModel pca_fit(const DocTermMatrix& x, std::size_t k, std::uint64_t seed, const PcaOptions& options = {});

/// (x - mean) projected onto the components, n_rows × k.
DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x);
DenseMatrix pca_transform(const PcaModel& model, const DocTermMatrix& x);

/// Maps k-dimensional scores back to input space: scores · components + mean.
DenseMatrix pca_inverse_transform(const PcaModel& model, const DenseMatrix& scores);

}  // namespace korpusmap
