#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "calliper/errors.hpp"
#include "calliper/matrix.hpp"

namespace calliper {

struct Coord {
    double x = 0.0;  // projected easting, metres
    double y = 0.0;  // projected northing, metres

    bool operator==(const Coord&) const = default;
};

// Multi-scale sinusoidal encoding of projected coordinates. Wavelengths run
// geometrically from r_min to r_max over `scales` steps; each scale emits
// (cos x/a, sin x/a, cos y/a, sin y/a), so the output has 4 * scales
// components, all in [-1, 1].
struct GridPeConfig {
    double r_min = 100.0;
    double r_max = 10000.0;
    std::size_t scales = 32;

    std::size_t output_dim() const { return 4 * scales; }

    void validate() const {
        if (!(r_min > 0.0) || !(r_max >= r_min) || scales < 1) {
            throw ConfigInvalidError("grid PE: need 0 < r_min <= r_max and scales >= 1");
        }
    }

    // a_s = r_min * (r_max / r_min)^(s / (S-1)); a_0 = r_min when S = 1.
    double wavelength(std::size_t s) const {
        if (scales == 1) return r_min;
        const double t = static_cast<double>(s) / static_cast<double>(scales - 1);
        return r_min * std::pow(r_max / r_min, t);
    }
};

inline std::vector<double> grid_pe(Coord coord, const GridPeConfig& config) {
    config.validate();
    if (!std::isfinite(coord.x) || !std::isfinite(coord.y)) {
        throw NonFiniteError("grid_pe: non-finite coordinate");
    }
    std::vector<double> out;
    out.reserve(config.output_dim());
    for (std::size_t s = 0; s < config.scales; ++s) {
        const double a = config.wavelength(s);
        out.push_back(std::cos(coord.x / a));
        out.push_back(std::sin(coord.x / a));
        out.push_back(std::cos(coord.y / a));
        out.push_back(std::sin(coord.y / a));
    }
    return out;
}

// One row per coordinate. Throws NonFiniteError naming the offending index.
template <class T>
Mat<T> grid_pe_batch(std::span<const Coord> coords, const GridPeConfig& config) {
    config.validate();
    Mat<T> out(coords.size(), config.output_dim());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (!std::isfinite(coords[i].x) || !std::isfinite(coords[i].y)) {
            throw NonFiniteError("grid_pe: non-finite coordinate at index " + std::to_string(i));
        }
        for (std::size_t s = 0; s < config.scales; ++s) {
            const double a = config.wavelength(s);
            out(i, 4 * s + 0) = static_cast<T>(std::cos(coords[i].x / a));
            out(i, 4 * s + 1) = static_cast<T>(std::sin(coords[i].x / a));
            out(i, 4 * s + 2) = static_cast<T>(std::cos(coords[i].y / a));
            out(i, 4 * s + 3) = static_cast<T>(std::sin(coords[i].y / a));
        }
    }
    return out;
}

}  // namespace calliper
