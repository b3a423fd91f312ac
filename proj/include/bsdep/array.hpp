#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace bsdep {

/// Dense row-major 2-D array of doubles (rows x cols).
class Array2D {
public:
    Array2D() = default;
    Array2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const double> row(std::size_t r) const {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Dense row-major 3-D array (n0 x n1 x n2); inner dimension contiguous.
class Array3D {
public:
    Array3D() = default;
    Array3D(std::size_t n0, std::size_t n1, std::size_t n2, double fill = 0.0)
        : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        assert(i < n0_ && j < n1_ && k < n2_);
        return data_[(i * n1_ + j) * n2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        assert(i < n0_ && j < n1_ && k < n2_);
        return data_[(i * n1_ + j) * n2_ + k];
    }

    std::span<double> inner(std::size_t i, std::size_t j) {
        assert(i < n0_ && j < n1_);
        return {data_.data() + (i * n1_ + j) * n2_, n2_};
    }
    std::span<const double> inner(std::size_t i, std::size_t j) const {
        assert(i < n0_ && j < n1_);
        return {data_.data() + (i * n1_ + j) * n2_, n2_};
    }

    std::size_t dim0() const { return n0_; }
    std::size_t dim1() const { return n1_; }
    std::size_t dim2() const { return n2_; }
    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

private:
    std::size_t n0_ = 0, n1_ = 0, n2_ = 0;
    std::vector<double> data_;
};

} // namespace bsdep
