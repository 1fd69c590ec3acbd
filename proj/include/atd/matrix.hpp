#ifndef ATD_MATRIX_HPP
#define ATD_MATRIX_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace atd {

/**
 * @brief Dense row-major matrix of doubles.
 *
 * Used both for layer weights (out x in) and for stacks of row vectors
 * (feature matrices, embedding sets).
 */
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) :
        rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values) :
        rows_(rows), cols_(cols), values_(std::move(values)) {
        detail::require(values_.size() == rows_ * cols_, ErrorCategory::argument,
            "matrix value count " + std::to_string(values_.size()) + " does not match shape " +
            std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    /** Append a row; the first row fixes the column count of an empty matrix. */
    void push_row(std::span<const double> row) {
        if (rows_ == 0 && cols_ == 0) {
            cols_ = row.size();
        }
        detail::require(row.size() == cols_, ErrorCategory::argument,
            "row of length " + std::to_string(row.size()) + " pushed into matrix with " +
            std::to_string(cols_) + " columns");
        values_.insert(values_.end(), row.begin(), row.end());
        ++rows_;
    }

    /** Rows picked by `indices`, in that order. */
    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

}

#endif
