#include "calliper/pca.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace calliper {

MatF pca_project(const MatF& points, std::size_t out_dim) {
    if (points.rows < out_dim) {
        throw ShapeMismatchError("pca_project: need at least out_dim rows");
    }
    const std::size_t n = points.rows, d = points.cols;
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = points(i, j);
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    const Eigen::MatrixXd cov = (x.transpose() * x) / std::max<double>(1.0, double(n) - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("pca_project: eigensolve failed");
    // Eigenvalues ascend; take the top out_dim columns in descending order.
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    const double max_eig = values.size() ? std::max(0.0, values(values.size() - 1)) : 0.0;
    const double rank_tol = max_eig * 1e-12;

    MatF out(n, out_dim);
    for (std::size_t c = 0; c < out_dim && c < d; ++c) {
        const auto col = static_cast<Eigen::Index>(d - 1 - c);
        if (values(col) <= rank_tol) continue;  // rank-deficient: keep zeros
        Eigen::VectorXd dir = vectors.col(col);
        // Fix the sign so the largest-magnitude component is positive.
        Eigen::Index max_idx = 0;
        dir.cwiseAbs().maxCoeff(&max_idx);
        if (dir(max_idx) < 0.0) dir = -dir;
        const Eigen::VectorXd proj = x * dir;
        for (std::size_t i = 0; i < n; ++i) out(i, c) = static_cast<float>(proj(i));
    }
    return out;
}

std::vector<std::array<int, 3>> rgb_encode(const MatF& proj) {
    std::vector<std::array<int, 3>> out(proj.rows, {128, 128, 128});
    if (proj.rows == 0) return out;
    ensure_finite(proj, "rgb_encode input");
    const std::size_t channels = std::min<std::size_t>(3, proj.cols);
    for (std::size_t c = 0; c < channels; ++c) {
        float lo = proj(0, c), hi = proj(0, c);
        for (std::size_t i = 1; i < proj.rows; ++i) {
            lo = std::min(lo, proj(i, c));
            hi = std::max(hi, proj(i, c));
        }
        for (std::size_t i = 0; i < proj.rows; ++i) {
            if (hi > lo) {
                const double t = (proj(i, c) - lo) / static_cast<double>(hi - lo);
                out[i][c] = static_cast<int>(std::lround(t * 255.0));
            } else {
                out[i][c] = 128;
            }
        }
    }
    return out;
}

std::string rgb_hex(const std::array<int, 3>& rgb) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", rgb[0], rgb[1], rgb[2]);
    return buf;
}

}  // namespace calliper
