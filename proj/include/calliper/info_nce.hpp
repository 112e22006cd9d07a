#pragma once

#include <cmath>
#include <vector>

#include "calliper/matrix.hpp"

namespace calliper {

template <class T>
struct InfoNceResult {
    double loss = 0.0;
    Mat<T> grad_left;       // dL/dz_left
    Mat<T> grad_right;      // dL/dz_right
    double grad_log_tau = 0.0;
    double top1_accuracy = 0.0;  // fraction of rows whose own logit is the argmax
};

// Bidirectional InfoNCE over matched rows:
//   L = -1/(2N) sum_i [ log softmax_j(l_i . r_j / tau)_i
//                     + log softmax_j(r_i . l_j / tau)_i ]
// Logits are stabilized by max subtraction per softmax. Gradients are exact:
// with M the logit matrix, dL/dM = -(2I - P - Q)/(2N) where P is the row
// softmax and Q the column softmax of M.
template <class T>
InfoNceResult<T> info_nce_loss(const Mat<T>& z_left, const Mat<T>& z_right, double tau) {
    if (z_left.rows != z_right.rows || z_left.cols != z_right.cols) {
        throw ShapeMismatchError("info_nce: embedding shapes differ");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigInvalidError("info_nce: tau must be positive and finite");
    }
    const std::size_t n = z_left.rows;
    InfoNceResult<T> result;
    result.grad_left = Mat<T>(n, z_left.cols);
    result.grad_right = Mat<T>(n, z_right.cols);
    if (n == 0) return result;

    Mat<T> logits = matmul(z_left, z_right, false, /*trans_b=*/true);
    const double inv_tau = 1.0 / tau;
    for (auto& v : logits.data) v = static_cast<T>(static_cast<double>(v) * inv_tau);
    ensure_finite(logits, "info_nce logits");

    // Row softmax P and per-row log-sum-exp. The two directional sums get
    // their own accumulators so swapping the arguments swaps the summands
    // without reordering any addition.
    Mat<double> p(n, n);
    double loss_rows = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = -1e300;
        std::size_t argmax = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = static_cast<double>(logits(i, j));
            if (v > row_max) {
                row_max = v;
                argmax = j;
            }
        }
        if (argmax == i) ++hits;
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double e = std::exp(static_cast<double>(logits(i, j)) - row_max);
            p(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < n; ++j) p(i, j) /= denom;
        loss_rows -= static_cast<double>(logits(i, i)) - row_max - std::log(denom);
    }
    result.top1_accuracy = static_cast<double>(hits) / static_cast<double>(n);

    // Column softmax Q (the text-to-location direction).
    Mat<double> q(n, n);
    double loss_cols = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double col_max = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
            col_max = std::max(col_max, static_cast<double>(logits(i, j)));
        }
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(static_cast<double>(logits(i, j)) - col_max);
            q(i, j) = e;
            denom += e;
        }
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= denom;
        loss_cols -= static_cast<double>(logits(j, j)) - col_max - std::log(denom);
    }
    result.loss = (loss_rows + loss_cols) / (2.0 * static_cast<double>(n));
    if (!std::isfinite(result.loss)) throw NonFiniteError("info_nce loss is non-finite");

    // dL/dM, then grad_left = dM . z_right / tau and grad_right = dM^T . z_left / tau.
    Mat<T> dm(n, n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    double grad_log_tau = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double delta = (i == j) ? 2.0 : 0.0;
            const double d = -scale * (delta - p(i, j) - q(i, j));
            dm(i, j) = static_cast<T>(d);
            grad_log_tau -= d * static_cast<double>(logits(i, j));
        }
    }
    result.grad_log_tau = grad_log_tau;
    Mat<T> gl = matmul(dm, z_right);
    Mat<T> gr = matmul(dm, z_left, /*trans_a=*/true);
    for (auto& v : gl.data) v = static_cast<T>(static_cast<double>(v) * inv_tau);
    for (auto& v : gr.data) v = static_cast<T>(static_cast<double>(v) * inv_tau);
    result.grad_left = std::move(gl);
    result.grad_right = std::move(gr);
    return result;
}

// Fraction of rows i whose best-matching right row is i itself.
template <class T>
double retrieval_accuracy(const Mat<T>& z_left, const Mat<T>& z_right) {
    if (z_left.rows != z_right.rows || z_left.cols != z_right.cols) {
        throw ShapeMismatchError("retrieval_accuracy: embedding shapes differ");
    }
    if (z_left.rows == 0) return 0.0;
    Mat<T> logits = matmul(z_left, z_right, false, /*trans_b=*/true);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        std::size_t argmax = 0;
        T best = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) {
            if (logits(i, j) > best) {
                best = logits(i, j);
                argmax = j;
            }
        }
        if (argmax == i) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows);
}

}  // namespace calliper
