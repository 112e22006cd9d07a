#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "calliper/geometry.hpp"
#include "calliper/matrix.hpp"
#include "calliper/poi.hpp"

namespace calliper {

// Lower-bound baseline: seeded unit-normalized Gaussian rows.
MatF random_baseline(std::size_t n_points, std::size_t dim, std::uint64_t seed);

// Smoothed tf-idf profile per unit over POI class labels:
//   tf(u,c)  = count of class c in u / POIs in u
//   idf(c)   = ln((1+|U|) / (1+df(c))) + 1
// rows L2-normalized; units without POIs get the zero vector. POIs attach to
// at most one unit: point-in-polygon when the units are polygons, nearest
// centroid otherwise.
MatF tfidf_baseline(std::span<const Poi> pois, std::span<const SpatialUnit> units,
                    std::span<const std::string> vocab);

// Sorted distinct class labels, the usual vocabulary argument.
std::vector<std::string> class_vocabulary(std::span<const Poi> pois);

}  // namespace calliper
