#include "calliper/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "calliper/rng.hpp"

namespace calliper {

MatF random_baseline(std::size_t n_points, std::size_t dim, std::uint64_t seed) {
    MatF out(n_points, dim);
    Rng rng = make_rng(seed, /*stream=*/30);
    for (std::size_t i = 0; i < n_points; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = rng.gaussian();
            out(i, j) = static_cast<float>(g);
            ss += g * g;
        }
        const float inv = static_cast<float>(1.0 / std::sqrt(ss));
        for (std::size_t j = 0; j < dim; ++j) out(i, j) *= inv;
    }
    return out;
}

std::vector<std::string> class_vocabulary(std::span<const Poi> pois) {
    std::set<std::string> distinct;
    for (const auto& poi : pois) distinct.insert(poi.class_label);
    return {distinct.begin(), distinct.end()};
}

MatF tfidf_baseline(std::span<const Poi> pois, std::span<const SpatialUnit> units,
                    std::span<const std::string> vocab) {
    if (vocab.empty()) throw EmptyVocabularyError("tf-idf: empty vocabulary");
    std::unordered_map<std::string, std::size_t> vocab_index;
    for (std::size_t c = 0; c < vocab.size(); ++c) vocab_index.emplace(vocab[c], c);

    const bool polygonal =
        std::any_of(units.begin(), units.end(), [](const auto& u) { return u.is_polygon(); });

    // counts[u][c] and per-unit totals
    MatD counts(units.size(), vocab.size());
    std::vector<double> totals(units.size(), 0.0);
    for (const auto& poi : pois) {
        auto it = vocab_index.find(poi.class_label);
        if (it == vocab_index.end()) continue;  // outside the vocabulary
        std::size_t unit = units.size();
        if (polygonal) {
            for (std::size_t u = 0; u < units.size(); ++u) {
                if (units[u].is_polygon() && point_in_polygon(poi.location(), units[u].polygon)) {
                    unit = u;
                    break;
                }
            }
        } else if (!units.empty()) {
            double best = 1e300;
            for (std::size_t u = 0; u < units.size(); ++u) {
                const Coord c = units[u].point;
                const double dx = poi.x - c.x, dy = poi.y - c.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) {
                    best = d2;
                    unit = u;
                }
            }
        }
        if (unit == units.size()) continue;  // unassignable POI
        counts(unit, it->second) += 1.0;
        totals[unit] += 1.0;
    }

    std::vector<double> df(vocab.size(), 0.0);
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (std::size_t c = 0; c < vocab.size(); ++c) {
            if (counts(u, c) > 0.0) df[c] += 1.0;
        }
    }
    std::vector<double> idf(vocab.size());
    const double n_units = static_cast<double>(units.size());
    for (std::size_t c = 0; c < vocab.size(); ++c) {
        idf[c] = std::log((1.0 + n_units) / (1.0 + df[c])) + 1.0;
    }

    MatF out(units.size(), vocab.size());
    for (std::size_t u = 0; u < units.size(); ++u) {
        if (totals[u] == 0.0) continue;  // empty unit keeps the zero vector
        double ss = 0.0;
        std::vector<double> row(vocab.size());
        for (std::size_t c = 0; c < vocab.size(); ++c) {
            row[c] = counts(u, c) / totals[u] * idf[c];
            ss += row[c] * row[c];
        }
        const double inv = ss > 0.0 ? 1.0 / std::sqrt(ss) : 0.0;
        for (std::size_t c = 0; c < vocab.size(); ++c) {
            out(u, c) = static_cast<float>(row[c] * inv);
        }
    }
    return out;
}

}  // namespace calliper
