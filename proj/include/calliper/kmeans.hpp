#pragma once

#include <cstdint>
#include <vector>

#include "calliper/matrix.hpp"

namespace calliper {

struct KMeansResult {
    std::vector<int> labels;
    MatF centroids;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // after each Lloyd iteration
    std::size_t iterations = 0;
};

// k-means++ seeding, Lloyd iterations until the largest centroid movement
// drops below tol or max_iter is hit. Empty clusters are reseeded from the
// point farthest from its centroid. Deterministic per seed.
KMeansResult kmeans(const MatF& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300, double tol = 1e-4);

}  // namespace calliper
