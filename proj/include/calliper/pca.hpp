#pragma once

#include <array>
#include <vector>

#include "calliper/matrix.hpp"

namespace calliper {

// Mean-centered projection onto the top `out_dim` principal directions.
// Sign convention: the largest-magnitude component of each direction is
// positive. Directions beyond the data rank come out as zero columns.
MatF pca_project(const MatF& points, std::size_t out_dim = 3);

// Min-max scale each column to [0, 255] (rounded); a constant column maps
// to 128.
std::vector<std::array<int, 3>> rgb_encode(const MatF& proj);

std::string rgb_hex(const std::array<int, 3>& rgb);

}  // namespace calliper
