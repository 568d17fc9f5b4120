#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace korpusmap {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Compressed sparse rows with strictly increasing column indices per row.
class DocTermMatrix {
public:
    DocTermMatrix() = default;
    DocTermMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                  std::vector<std::uint32_t> col_index, std::vector<double> weights);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return weights_.size(); }

    std::span<const std::uint32_t> row_columns(std::size_t r) const {
        return {col_index_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<const double> row_weights(std::size_t r) const {
        return {weights_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& col_index() const { return col_index_; }
    const std::vector<double>& weights() const { return weights_; }

    DenseMatrix to_dense() const;

    bool operator==(const DocTermMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_index_;
    std::vector<double> weights_;
};

}  // namespace korpusmap
