#pragma once

#include <cstddef>
#include <vector>

#include "jcpa/common.hpp"

namespace jcpa {

/// Dense row-major matrix of doubles. Small (D x M with D,M in the tens), so
/// plain storage + index math beats any heavier linear-algebra dependency.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        require(rows >= 0 && cols >= 0, "Mat: negative dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Dense row-major rank-3 tensor, indexed (i, j, m).
class Ten3 {
public:
    Ten3() = default;
    Ten3(int d0, int d1, int d2, double fill = 0.0)
        : d0_(d0), d1_(d1), d2_(d2),
          data_(static_cast<size_t>(d0) * d1 * d2, fill) {
        require(d0 >= 0 && d1 >= 0 && d2 >= 0, "Ten3: negative dimensions");
    }

    int dim0() const { return d0_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }
    size_t size() const { return data_.size(); }

    double& operator()(int i, int j, int m) {
        return data_[(static_cast<size_t>(i) * d1_ + j) * d2_ + m];
    }
    double operator()(int i, int j, int m) const {
        return data_[(static_cast<size_t>(i) * d1_ + j) * d2_ + m];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    friend bool operator==(const Ten3& a, const Ten3& b) {
        return a.d0_ == b.d0_ && a.d1_ == b.d1_ && a.d2_ == b.d2_ && a.data_ == b.data_;
    }

private:
    int d0_ = 0;
    int d1_ = 0;
    int d2_ = 0;
    std::vector<double> data_;
};

inline bool all_finite(const double* p, size_t n) {
    for (size_t k = 0; k < n; ++k) {
        if (!std::isfinite(p[k])) return false;
    }
    return true;
}

}  // namespace jcpa
