#include "calliper/kmeans.hpp"

#include <cmath>
#include <limits>

#include "calliper/rng.hpp"

namespace calliper {

namespace {

double sq_dist(const MatF& a, std::size_t i, const MatF& b, std::size_t j) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
        const double d = static_cast<double>(a(i, c)) - static_cast<double>(b(j, c));
        d2 += d * d;
    }
    return d2;
}

}  // namespace

KMeansResult kmeans(const MatF& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                    double tol) {
    const std::size_t n = points.rows;
    if (k == 0 || k > n) {
        throw KTooLargeError("kmeans: k = " + std::to_string(k) + " with " + std::to_string(n) +
                             " points");
    }
    Rng rng = make_rng(seed, /*stream=*/40);

    // k-means++ seeding.
    MatF centroids(k, points.cols);
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
    std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(points, i, centroids, c - 1));
            total += d2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<std::size_t>(rng.uniform_index(n));
        }
        std::copy(points.row(chosen).begin(), points.row(chosen).end(), centroids.row(c).begin());
    }

    KMeansResult result;
    result.labels.assign(n, 0);
    std::vector<std::size_t> cluster_size(k, 0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Assignment.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(points, i, centroids, c);
                if (d < best) {
                    best = d;
                    best_c = static_cast<int>(c);
                }
            }
            result.labels[i] = best_c;
            inertia += best;
        }
        result.inertia = inertia;
        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;

        // Update.
        MatF next(k, points.cols);
        cluster_size.assign(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.labels[i]);
            ++cluster_size[c];
            for (std::size_t j = 0; j < points.cols; ++j) next(c, j) += points(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (cluster_size[c] == 0) {
                // Reseed from the point farthest from its assigned centroid.
                std::size_t farthest = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d =
                        sq_dist(points, i, centroids,
                                static_cast<std::size_t>(result.labels[i]));
                    if (d > far_d) {
                        far_d = d;
                        farthest = i;
                    }
                }
                std::copy(points.row(farthest).begin(), points.row(farthest).end(),
                          next.row(c).begin());
                continue;
            }
            const float inv = 1.0f / static_cast<float>(cluster_size[c]);
            for (std::size_t j = 0; j < points.cols; ++j) next(c, j) *= inv;
        }

        double max_shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            max_shift = std::max(max_shift, std::sqrt(sq_dist(next, c, centroids, c)));
        }
        centroids = std::move(next);
        if (max_shift < tol) break;
    }

    // Final assignment against the last centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::max();
        int best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double d = sq_dist(points, i, centroids, c);
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        result.labels[i] = best_c;
        inertia += best;
    }
    result.inertia = inertia;
    result.inertia_history.push_back(inertia);
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace calliper
