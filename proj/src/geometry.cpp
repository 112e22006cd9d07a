#include "calliper/geometry.hpp"

#include <cmath>

#include "calliper/errors.hpp"

namespace calliper {

namespace {

// Strip the closing vertex if present.
std::span<const Coord> open_ring(std::span<const Coord> ring) {
    if (ring.size() >= 2 && ring.front() == ring.back()) return ring.first(ring.size() - 1);
    return ring;
}

}  // namespace

Coord polygon_centroid(std::span<const Coord> ring) {
    const auto r = open_ring(ring);
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) {
            if (r[i] == r[j]) {
                seen = true;
                break;
            }
        }
        if (!seen) ++distinct;
    }
    if (distinct < 3) throw DegenerateGeometryError("polygon needs >= 3 distinct vertices");

    double area2 = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Coord& a = r[i];
        const Coord& b = r[(i + 1) % r.size()];
        const double cross = a.x * b.y - b.x * a.y;
        area2 += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    if (std::fabs(area2) < 1e-12) throw DegenerateGeometryError("polygon has zero area");
    return {cx / (3.0 * area2), cy / (3.0 * area2)};
}

bool point_in_polygon(Coord p, std::span<const Coord> ring) {
    const auto r = open_ring(ring);
    if (r.size() < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const Coord& a = r[i];
        const Coord& b = r[j];
        // Edge hit counts as inside.
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (std::fabs(cross) < 1e-12 && std::min(a.x, b.x) - 1e-12 <= p.x &&
            p.x <= std::max(a.x, b.x) + 1e-12 && std::min(a.y, b.y) - 1e-12 <= p.y &&
            p.y <= std::max(a.y, b.y) + 1e-12) {
            return true;
        }
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

}  // namespace calliper
