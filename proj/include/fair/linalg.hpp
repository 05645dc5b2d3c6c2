#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fair {

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);

/**
 * Solves A X = B for square A by Gaussian elimination with partial pivoting,
 * followed by one round of iterative refinement. Throws std::runtime_error if
 * A is numerically singular.
 */
DenseMatrix solve(DenseMatrix a, const DenseMatrix& b);

/// max_ij |A X - B|_ij
double residual_inf(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& b);

} // namespace fair
