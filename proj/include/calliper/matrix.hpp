#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "calliper/errors.hpp"

namespace calliper {

// Dense row-major matrix. float is the training type; double is the shadow
// type used by gradient checks.
template <class T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<T> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const T> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool empty() const { return rows == 0 || cols == 0; }

    bool operator==(const Mat&) const = default;
};

using MatF = Mat<float>;
using MatD = Mat<double>;

namespace detail {
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc);
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc);
}  // namespace detail

// C = op(A) * op(B) with op = transpose when the flag is set.
template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b, bool trans_a = false, bool trans_b = false) {
    const std::size_t m = trans_a ? a.cols : a.rows;
    const std::size_t k = trans_a ? a.rows : a.cols;
    const std::size_t kb = trans_b ? b.cols : b.rows;
    const std::size_t n = trans_b ? b.rows : b.cols;
    if (k != kb) {
        throw ShapeMismatchError("matmul: inner dimensions " + std::to_string(k) + " vs " +
                                 std::to_string(kb));
    }
    Mat<T> c(m, n);
    if (m == 0 || n == 0 || k == 0) return c;
    detail::gemm(trans_a, trans_b, m, n, k, T(1), a.data.data(), a.cols, b.data.data(), b.cols,
                 T(0), c.data.data(), c.cols);
    return c;
}

template <class T>
void ensure_finite(const Mat<T>& m, const std::string& what) {
    for (const T& v : m.data) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw NonFiniteError("non-finite value in " + what);
        }
    }
}

template <class T>
void ensure_finite(std::span<const T> v, const std::string& what) {
    for (const T& x : v) {
        if (!std::isfinite(static_cast<double>(x))) {
            throw NonFiniteError("non-finite value in " + what);
        }
    }
}

// In-place row-wise L2 normalization; returns the original norms (needed by
// the backward pass). A zero row cannot be normalized and is an error.
template <class T>
std::vector<T> l2_normalize_rows(Mat<T>& m, const std::string& what) {
    std::vector<T> norms(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            ss += static_cast<double>(m(i, j)) * static_cast<double>(m(i, j));
        }
        const double norm = std::sqrt(ss);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw NonFiniteError("cannot L2-normalize row " + std::to_string(i) + " of " + what);
        }
        norms[i] = static_cast<T>(norm);
        const T inv = static_cast<T>(1.0 / norm);
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) *= inv;
    }
    return norms;
}

// Gradient of y = x / |x| given the normalized rows y, the norms |x| and the
// gradient g w.r.t. y:  dx_i = (g_i - (g_i . y_i) y_i) / |x_i|.
template <class T>
Mat<T> l2_normalize_rows_backward(const Mat<T>& normalized, std::span<const T> norms,
                                  const Mat<T>& grad) {
    Mat<T> out(grad.rows, grad.cols);
    for (std::size_t i = 0; i < grad.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < grad.cols; ++j) {
            dot += static_cast<double>(grad(i, j)) * static_cast<double>(normalized(i, j));
        }
        const double inv = 1.0 / static_cast<double>(norms[i]);
        for (std::size_t j = 0; j < grad.cols; ++j) {
            out(i, j) = static_cast<T>(
                (static_cast<double>(grad(i, j)) - dot * static_cast<double>(normalized(i, j))) *
                inv);
        }
    }
    return out;
}

template <class From, class To>
Mat<To> cast_matrix(const Mat<From>& m) {
    Mat<To> out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<To>(m.data[i]);
    return out;
}

}  // namespace calliper
