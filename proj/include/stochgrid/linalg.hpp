#pragma once

#include <cassert>
#include <cstddef>
#include <limits>
#include <vector>

namespace stochgrid {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense row-major matrix. Rows/cols may be zero (empty constraint blocks).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    static Matrix from_rows(const std::vector<Vector>& rows) {
        if (rows.empty()) return Matrix();
        Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
        for (int i = 0; i < m.rows_; ++i) {
            assert(static_cast<int>(rows[i].size()) == m.cols_);
            for (int j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    // y = M x
    Vector mul(const Vector& x) const {
        assert(static_cast<int>(x.size()) == cols_);
        Vector y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = &data_[static_cast<size_t>(i) * cols_];
            for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    // y = Mᵀ x
    Vector mul_transpose(const Vector& x) const {
        assert(static_cast<int>(x.size()) == rows_);
        Vector y(cols_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            const double* row = &data_[static_cast<size_t>(i) * cols_];
            for (int j = 0; j < cols_; ++j) y[j] += row[j] * x[i];
        }
        return y;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const Vector& a, const Vector& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double inf_norm(const Vector& a) {
    double m = 0.0;
    for (double v : a) {
        double av = v < 0 ? -v : v;
        if (av > m) m = av;
    }
    return m;
}

inline double inf_dist(const Vector& a, const Vector& b) {
    assert(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d < 0) d = -d;
        if (d > m) m = d;
    }
    return m;
}

// Compensated sum; used where invariants are checked at 1e-12.
inline double kahan_sum(const Vector& a) {
    double s = 0.0, c = 0.0;
    for (double v : a) {
        double y = v - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace stochgrid
