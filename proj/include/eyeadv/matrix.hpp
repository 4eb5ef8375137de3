#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace eyeadv {

/// Dense row-major matrix of doubles; rows are samples.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    void append_row(std::span<const double> r)
    {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw std::invalid_argument("Matrix::append_row: dimension mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace eyeadv
