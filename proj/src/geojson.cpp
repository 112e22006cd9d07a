#include "calliper/geojson.hpp"

#include <fstream>

#include "calliper/csv.hpp"
#include "calliper/kmeans.hpp"
#include "calliper/pca.hpp"

namespace calliper {

namespace {

std::vector<Coord> parse_ring(const nlohmann::json& coords) {
    std::vector<Coord> ring;
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2) throw Error("geojson: bad ring coordinate");
        ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    return ring;
}

std::string feature_id(const nlohmann::json& feature, std::size_t index) {
    if (feature.contains("id")) {
        const auto& id = feature["id"];
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer()) return std::to_string(id.get<long long>());
    }
    if (feature.contains("properties") && feature["properties"].is_object() &&
        feature["properties"].contains("id")) {
        const auto& id = feature["properties"]["id"];
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer()) return std::to_string(id.get<long long>());
    }
    return "feature" + std::to_string(index);
}

}  // namespace

UnitCollection read_geojson_units(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open GeoJSON file: " + path.string());
    nlohmann::json fc;
    try {
        in >> fc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("invalid GeoJSON: ") + e.what());
    }
    if (!fc.is_object() || fc.value("type", "") != "FeatureCollection" ||
        !fc.contains("features") || !fc["features"].is_array()) {
        throw ParseError(0, "expected a GeoJSON FeatureCollection");
    }

    UnitCollection collection;
    collection.units.reserve(fc["features"].size());
    std::size_t index = 0;
    for (const auto& feature : fc["features"]) {
        if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
            throw ParseError(index, "feature without geometry");
        }
        const auto& geom = feature["geometry"];
        const std::string type = geom.value("type", "");
        SpatialUnit unit;
        unit.id = feature_id(feature, index);
        if (type == "Polygon") {
            if (!geom.contains("coordinates") || !geom["coordinates"].is_array() ||
                geom["coordinates"].empty()) {
                throw ParseError(index, "polygon without coordinates");
            }
            unit.polygon = parse_ring(geom["coordinates"][0]);  // outer ring only
        } else if (type == "Point") {
            const auto& pt = geom["coordinates"];
            if (!pt.is_array() || pt.size() < 2) throw ParseError(index, "bad point coordinates");
            unit.point = {pt[0].get<double>(), pt[1].get<double>()};
        } else {
            throw ParseError(index, "unsupported geometry type: " + type);
        }
        collection.units.push_back(std::move(unit));
        ++index;
    }
    collection.raw = std::move(fc);
    return collection;
}

ClusteredUnits cluster_units(const CalliperModel& model, const UnitCollection& collection,
                             std::size_t k, std::uint64_t seed) {
    std::vector<Coord> centroids;
    centroids.reserve(collection.units.size());
    for (const auto& unit : collection.units) centroids.push_back(unit.centroid());

    MatF embeddings = encode_locations(model, centroids);
    KMeansResult clusters = kmeans(embeddings, k, seed);
    MatF proj = pca_project(embeddings, std::min<std::size_t>(3, embeddings.rows));

    ClusteredUnits out;
    out.labels = clusters.labels;
    out.rgb = rgb_encode(proj);
    out.feature_collection = collection.raw;
    auto& features = out.feature_collection["features"];
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features[i].contains("properties") || !features[i]["properties"].is_object()) {
            features[i]["properties"] = nlohmann::json::object();
        }
        features[i]["properties"]["cluster"] = out.labels[i];
        features[i]["properties"]["rgb"] = rgb_hex(out.rgb[i]);
    }
    return out;
}

void write_geojson(const std::filesystem::path& path, const nlohmann::json& feature_collection) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << feature_collection.dump(2) << '\n';
}

void write_cluster_csv(const std::filesystem::path& path, const UnitCollection& collection,
                       const ClusteredUnits& clustered) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "id,cluster,r,g,b\n";
    for (std::size_t i = 0; i < collection.units.size(); ++i) {
        out << csv_escape(collection.units[i].id) << ',' << clustered.labels[i] << ','
            << clustered.rgb[i][0] << ',' << clustered.rgb[i][1] << ',' << clustered.rgb[i][2]
            << '\n';
    }
}

nlohmann::json make_square_grid(double min_x, double min_y, double max_x, double max_y,
                                std::size_t cells_x, std::size_t cells_y) {
    if (cells_x == 0 || cells_y == 0 || !(max_x > min_x) || !(max_y > min_y)) {
        throw ConfigInvalidError("make_square_grid: empty grid");
    }
    const double dx = (max_x - min_x) / static_cast<double>(cells_x);
    const double dy = (max_y - min_y) / static_cast<double>(cells_y);
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t iy = 0; iy < cells_y; ++iy) {
        for (std::size_t ix = 0; ix < cells_x; ++ix) {
            const double x0 = min_x + dx * static_cast<double>(ix);
            const double y0 = min_y + dy * static_cast<double>(iy);
            nlohmann::json ring = nlohmann::json::array();
            ring.push_back({x0, y0});
            ring.push_back({x0 + dx, y0});
            ring.push_back({x0 + dx, y0 + dy});
            ring.push_back({x0, y0 + dy});
            ring.push_back({x0, y0});
            nlohmann::json feature;
            feature["type"] = "Feature";
            feature["properties"] = {
                {"id", "cell_" + std::to_string(ix) + "_" + std::to_string(iy)}};
            feature["geometry"] = {{"type", "Polygon"},
                                   {"coordinates", nlohmann::json::array({ring})}};
            features.push_back(std::move(feature));
        }
    }
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc;
}

}  // namespace calliper
