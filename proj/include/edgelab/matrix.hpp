#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edgelab {

/// Dense row-major matrix of doubles.
///
/// Products are plain loops with a fixed accumulation order, so a row of a
/// result depends only on the corresponding input row. That keeps posteriors
/// bit-identical whether they come from the full graph or from an extracted
/// receptive-field subgraph.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    /// Appends one row; `values.size()` must equal cols() unless the matrix
    /// has no rows yet, in which case it fixes the column count.
    void append_row(std::span<const double> values);
    /// Drops trailing rows so that rows() == n.
    void truncate_rows(std::size_t n);

    void fill(double v);
    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// out = a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// out = a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// y += x * w for a single row vector x.
void row_times(std::span<const double> x, const Matrix& w, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

} // namespace edgelab
