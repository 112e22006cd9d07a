#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "calliper/grid_pe.hpp"
#include "calliper/matrix.hpp"
#include "calliper/text_provider.hpp"

namespace calliper {

// How the prompt template phrases the class label: a generic place, a place
// selling goods, or a place producing goods.
enum class ClassKind { Generic, Sells, Produces };

struct Poi {
    std::string id;
    double x = 0.0;  // projected easting, metres
    double y = 0.0;  // projected northing, metres
    std::string group_label;
    std::string class_label;
    ClassKind kind = ClassKind::Generic;

    Coord location() const { return {x, y}; }

    bool operator==(const Poi&) const = default;
};

// Logical-to-actual column names for POI tables.
struct PoiCsvSchema {
    std::string id = "id";
    std::string x = "x";
    std::string y = "y";
    std::string group = "group";
    std::string cls = "class";
    std::string kind = "kind";  // optional column; absent means Generic
};

std::vector<Poi> parse_poi_csv(const std::filesystem::path& path, const PoiCsvSchema& schema = {});
void write_poi_csv(const std::filesystem::path& path, std::span<const Poi> pois);

// "A place of {class}, a type of {group}", with "that sells" / "that
// produces" variants for the corresponding kinds.
std::string render_prompt(const Poi& poi);

struct TrainingPair {
    Coord location;
    std::string prompt;
    std::vector<float> text_embedding;
};

// Renders prompts and embeds each distinct prompt exactly once; pair order
// matches input order.
std::vector<TrainingPair> build_training_pairs(std::span<const Poi> pois,
                                               TextEmbeddingProvider& provider);

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

// Downstream supervision: points with either class indices (classification)
// or probability vectors (distribution regression), plus a split assignment.
struct LabeledPointSet {
    std::vector<Coord> points;
    std::vector<int> class_labels;  // classification targets; empty for distribution sets
    MatF distributions;             // one row per point; empty for classification sets
    std::vector<Split> split_assignment;

    bool is_distribution() const { return !distributions.empty(); }
    std::size_t size() const { return points.size(); }
    std::size_t num_classes() const;  // max label + 1, or distribution width

    std::vector<std::size_t> indices_of(Split split) const;
    void validate() const;
};

struct SplitRatio {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

// Seeded shuffle-then-slice; counts land within one sample of the exact
// proportions (cumulative rounding).
LabeledPointSet split_dataset(LabeledPointSet set, SplitRatio ratio, std::uint64_t seed);

// Dataset CSV formats: `x,y,label` (classification) or `x,y,p1,...,pm`
// (distribution). Detected from the header.
LabeledPointSet read_labeled_csv(const std::filesystem::path& path);
void write_labeled_csv(const std::filesystem::path& path, const LabeledPointSet& set);

// --- synthetic world -------------------------------------------------------

struct SyntheticWorldConfig {
    double min_x = 0.0, min_y = 0.0;
    double max_x = 10000.0, max_y = 10000.0;
    std::size_t regions = 5;
    std::size_t pois_per_region = 4000;
    std::size_t vocab_per_region = 6;
    std::size_t heldout_points = 2000;
    std::uint64_t seed = 0;
};

// A deterministic toy city: the extent is carved into Voronoi regions, each
// region gets its own disjoint class vocabulary, POIs are placed uniformly
// inside their region. Ground truth stays available for oracles.
struct SyntheticWorld {
    SyntheticWorldConfig config;
    std::vector<Coord> sites;                     // one Voronoi site per region
    std::vector<std::vector<std::string>> vocab;  // per-region class labels
    std::vector<Poi> pois;
    LabeledPointSet heldout;  // classification: region index per held-out point

    std::size_t region_of(Coord c) const;

    // Fresh points labeled by region, for extra datasets beyond `heldout`.
    LabeledPointSet sample_labeled_points(std::size_t count, std::uint64_t seed) const;

    // Distribution targets: softmax of negative site distances at scale
    // sigma, a smooth field whose optimum depends on location only.
    LabeledPointSet sample_distribution_points(std::size_t count, double sigma,
                                               std::uint64_t seed) const;
};

SyntheticWorld generate_synthetic_world(const SyntheticWorldConfig& config);

}  // namespace calliper
