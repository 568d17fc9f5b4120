#include "korpusmap/matrix.hpp"

#include <cmath>
#include <string>

#include "korpusmap/error.hpp"

namespace korpusmap {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols)
        throw PreconditionError("dense matrix: expected " + std::to_string(rows * cols) + " values, got " +
                                std::to_string(values_.size()));
}

bool DenseMatrix::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

DocTermMatrix::DocTermMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                             std::vector<std::uint32_t> col_index, std::vector<double> weights)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_index_(std::move(col_index)),
      weights_(std::move(weights)) {
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != weights_.size() ||
        col_index_.size() != weights_.size())
        throw PreconditionError("sparse matrix: inconsistent CSR arrays");
    for (std::size_t r = 0; r < rows_; ++r) {
        if (row_ptr_[r] > row_ptr_[r + 1]) throw PreconditionError("sparse matrix: row pointers decrease");
        for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
            if (col_index_[e] >= cols_) throw PreconditionError("sparse matrix: column out of range");
            if (e > row_ptr_[r] && col_index_[e] <= col_index_[e - 1])
                throw PreconditionError("sparse matrix: columns not strictly increasing in row " + std::to_string(r));
        }
    }
}

DenseMatrix DocTermMatrix::to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) out(r, col_index_[e]) = weights_[e];
    return out;
}

}  // namespace korpusmap
