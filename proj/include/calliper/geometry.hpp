#pragma once

#include <span>
#include <string>
#include <vector>

#include "calliper/grid_pe.hpp"

namespace calliper {

// Area-weighted centroid of a simple polygon ring. Accepts open or closed
// rings; throws DegenerateGeometry for fewer than 3 distinct vertices or
// (near-)zero area.
Coord polygon_centroid(std::span<const Coord> ring);

// Ray casting; points on an edge count as inside.
bool point_in_polygon(Coord p, std::span<const Coord> ring);

// A mappable unit: either a polygon or a bare point. Its representation is
// the location embedding of its centroid.
struct SpatialUnit {
    std::string id;
    std::vector<Coord> polygon;  // empty for point units
    Coord point;                 // the point itself for point units

    bool is_polygon() const { return !polygon.empty(); }
    Coord centroid() const { return is_polygon() ? polygon_centroid(polygon) : point; }
};

}  // namespace calliper
