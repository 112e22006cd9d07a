#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "calliper/geometry.hpp"
#include "calliper/model.hpp"

#include "json.hpp"

namespace calliper {

// Parses a FeatureCollection of Polygon/Point features carrying an `id`
// (feature member or property). Geometry is kept verbatim in `raw` so
// annotated output re-serializes the original coordinates untouched.
struct UnitCollection {
    nlohmann::json raw;  // the FeatureCollection as parsed
    std::vector<SpatialUnit> units;
};

UnitCollection read_geojson_units(const std::filesystem::path& path);

struct ClusteredUnits {
    nlohmann::json feature_collection;  // input plus `cluster` and `rgb` properties
    std::vector<int> labels;
    std::vector<std::array<int, 3>> rgb;
};

// Embeds every unit centroid with the frozen model, k-means clusters the
// embeddings, and colours units by a 3-D PCA projection of the embeddings.
ClusteredUnits cluster_units(const CalliperModel& model, const UnitCollection& collection,
                             std::size_t k, std::uint64_t seed);

void write_geojson(const std::filesystem::path& path, const nlohmann::json& feature_collection);

// `id,cluster,r,g,b` next to the annotated GeoJSON.
void write_cluster_csv(const std::filesystem::path& path, const UnitCollection& collection,
                       const ClusteredUnits& clustered);

// A square grid over an extent, handy as a unit layer for synthetic worlds.
nlohmann::json make_square_grid(double min_x, double min_y, double max_x, double max_y,
                                std::size_t cells_x, std::size_t cells_y);

}  // namespace calliper
