#include "calliper/poi.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "calliper/csv.hpp"
#include "calliper/rng.hpp"

namespace calliper {

namespace {

bool parse_coordinate(const std::string& field, double& out) {
    const std::string s = trim(field);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const char* kind_name(ClassKind kind) {
    switch (kind) {
        case ClassKind::Sells: return "sells";
        case ClassKind::Produces: return "produces";
        default: return "generic";
    }
}

}  // namespace

std::vector<Poi> parse_poi_csv(const std::filesystem::path& path, const PoiCsvSchema& schema) {
    const CsvTable table = read_csv(path);
    const int col_id = find_column(table.header, schema.id);
    const int col_x = find_column(table.header, schema.x);
    const int col_y = find_column(table.header, schema.y);
    const int col_group = find_column(table.header, schema.group);
    const int col_class = find_column(table.header, schema.cls);
    const int col_kind = find_column(table.header, schema.kind);  // optional
    if (col_id < 0) throw MissingColumnError(schema.id);
    if (col_x < 0) throw MissingColumnError(schema.x);
    if (col_y < 0) throw MissingColumnError(schema.y);
    if (col_group < 0) throw MissingColumnError(schema.group);
    if (col_class < 0) throw MissingColumnError(schema.cls);
    if (table.rows.empty()) throw EmptyFileError("no data rows in " + path.string());

    std::vector<Poi> pois;
    pois.reserve(table.rows.size());
    const std::size_t width =
        static_cast<std::size_t>(std::max({col_id, col_x, col_y, col_group, col_class})) + 1;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 2;  // 1-based, after the header
        if (row.size() < width) {
            throw MalformedRowError(row_no, "expected at least " + std::to_string(width) +
                                                " fields, got " + std::to_string(row.size()));
        }
        Poi poi;
        poi.id = trim(row[col_id]);
        if (!parse_coordinate(row[col_x], poi.x)) {
            throw MalformedRowError(row_no, "unparseable x coordinate: '" + row[col_x] + "'");
        }
        if (!parse_coordinate(row[col_y], poi.y)) {
            throw MalformedRowError(row_no, "unparseable y coordinate: '" + row[col_y] + "'");
        }
        poi.group_label = trim(row[col_group]);
        poi.class_label = trim(row[col_class]);
        if (poi.group_label.empty()) throw MalformedRowError(row_no, "empty group label");
        if (poi.class_label.empty()) throw MalformedRowError(row_no, "empty class label");
        if (col_kind >= 0 && static_cast<std::size_t>(col_kind) < row.size()) {
            const std::string kind = lowercase(trim(row[col_kind]));
            if (kind == "sells") poi.kind = ClassKind::Sells;
            else if (kind == "produces") poi.kind = ClassKind::Produces;
            else if (kind == "generic" || kind.empty()) poi.kind = ClassKind::Generic;
            else throw MalformedRowError(row_no, "unknown kind: '" + kind + "'");
        }
        pois.push_back(std::move(poi));
    }
    return pois;
}

void write_poi_csv(const std::filesystem::path& path, std::span<const Poi> pois) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "id,x,y,group,class,kind\n";
    for (const auto& poi : pois) {
        out << csv_escape(poi.id) << ',' << format_double(poi.x) << ',' << format_double(poi.y)
            << ',' << csv_escape(poi.group_label) << ',' << csv_escape(poi.class_label) << ','
            << kind_name(poi.kind) << '\n';
    }
}

std::string render_prompt(const Poi& poi) {
    switch (poi.kind) {
        case ClassKind::Sells:
            return "A place that sells " + poi.class_label + ", a type of " + poi.group_label;
        case ClassKind::Produces:
            return "A place that produces " + poi.class_label + ", a type of " + poi.group_label;
        default:
            return "A place of " + poi.class_label + ", a type of " + poi.group_label;
    }
}

std::vector<TrainingPair> build_training_pairs(std::span<const Poi> pois,
                                               TextEmbeddingProvider& provider) {
    std::vector<std::string> prompts;
    prompts.reserve(pois.size());
    std::vector<std::string> distinct;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& poi : pois) {
        std::string prompt = render_prompt(poi);
        if (index.emplace(prompt, distinct.size()).second) distinct.push_back(prompt);
        prompts.push_back(std::move(prompt));
    }
    std::vector<std::vector<float>> vectors;
    if (!distinct.empty()) {
        vectors = provider.embed_texts(distinct);
        if (vectors.size() != distinct.size()) {
            throw ProviderFailure(ProviderErrorKind::Other,
                                  "provider returned " + std::to_string(vectors.size()) +
                                      " vectors for " + std::to_string(distinct.size()) +
                                      " texts");
        }
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (vectors[i].size() != provider.dim()) {
                throw ProviderFailure(ProviderErrorKind::DimensionMismatch,
                                      "provider returned dimension " +
                                          std::to_string(vectors[i].size()) + " for prompt '" +
                                          distinct[i] + "', declared " +
                                          std::to_string(provider.dim()));
            }
            ensure_finite<float>(vectors[i], "embedding of prompt '" + distinct[i] + "'");
        }
    }
    std::vector<TrainingPair> pairs;
    pairs.reserve(pois.size());
    for (std::size_t i = 0; i < pois.size(); ++i) {
        TrainingPair pair;
        pair.location = pois[i].location();
        pair.prompt = prompts[i];
        pair.text_embedding = vectors[index.at(prompts[i])];
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

std::size_t LabeledPointSet::num_classes() const {
    if (is_distribution()) return distributions.cols;
    int max_label = -1;
    for (int label : class_labels) max_label = std::max(max_label, label);
    return static_cast<std::size_t>(max_label + 1);
}

std::vector<std::size_t> LabeledPointSet::indices_of(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split_assignment.size(); ++i) {
        if (split_assignment[i] == split) out.push_back(i);
    }
    return out;
}

void LabeledPointSet::validate() const {
    if (is_distribution()) {
        if (distributions.rows != points.size()) {
            throw ShapeMismatchError("labeled set: distribution rows vs points");
        }
        for (std::size_t i = 0; i < distributions.rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < distributions.cols; ++j) {
                const float p = distributions(i, j);
                if (p < 0.0f || !std::isfinite(p)) {
                    throw NotADistributionError(i, "negative or non-finite probability");
                }
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-6) {
                throw NotADistributionError(i, "probabilities sum to " + std::to_string(sum));
            }
        }
    } else {
        if (class_labels.size() != points.size()) {
            throw ShapeMismatchError("labeled set: labels vs points");
        }
        for (int label : class_labels) {
            if (label < 0) throw LabelOutOfRangeError("negative class label");
        }
    }
    if (!split_assignment.empty() && split_assignment.size() != points.size()) {
        throw ShapeMismatchError("labeled set: split assignment vs points");
    }
}

LabeledPointSet split_dataset(LabeledPointSet set, SplitRatio ratio, std::uint64_t seed) {
    const double sum = ratio.train + ratio.val + ratio.test;
    if (!(ratio.train > 0.0) || !(ratio.val > 0.0) || !(ratio.test > 0.0) ||
        std::fabs(sum - 1.0) > 1e-9) {
        throw RatioInvalidError("split ratio components must be positive and sum to 1");
    }
    const std::size_t n = set.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, /*stream=*/2);
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(std::llround(ratio.train * static_cast<double>(n)));
    const auto n_train_val =
        static_cast<std::size_t>(std::llround((ratio.train + ratio.val) * static_cast<double>(n)));
    set.split_assignment.assign(n, Split::Test);
    for (std::size_t k = 0; k < n; ++k) {
        if (k < n_train) set.split_assignment[order[k]] = Split::Train;
        else if (k < n_train_val) set.split_assignment[order[k]] = Split::Val;
    }
    return set;
}

LabeledPointSet read_labeled_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const int col_x = find_column(table.header, "x");
    const int col_y = find_column(table.header, "y");
    if (col_x < 0) throw MissingColumnError("x");
    if (col_y < 0) throw MissingColumnError("y");
    const int col_label = find_column(table.header, "label");

    std::vector<int> prob_cols;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const std::string name = trim(table.header[i]);
        if (name.size() >= 2 && name[0] == 'p' &&
            std::all_of(name.begin() + 1, name.end(),
                        [](unsigned char c) { return std::isdigit(c); })) {
            prob_cols.push_back(static_cast<int>(i));
        }
    }
    if (col_label < 0 && prob_cols.empty()) {
        throw MissingColumnError("label (or p1..pm)");
    }

    LabeledPointSet set;
    if (col_label < 0) set.distributions = MatF(table.rows.size(), prob_cols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 2;
        Coord c;
        if (static_cast<std::size_t>(col_x) >= row.size() ||
            static_cast<std::size_t>(col_y) >= row.size() || !parse_coordinate(row[col_x], c.x) ||
            !parse_coordinate(row[col_y], c.y)) {
            throw MalformedRowError(row_no, "unparseable coordinates");
        }
        set.points.push_back(c);
        if (col_label >= 0) {
            if (static_cast<std::size_t>(col_label) >= row.size()) {
                throw MalformedRowError(row_no, "missing label field");
            }
            int label = 0;
            const std::string field = trim(row[col_label]);
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), label);
            if (ec != std::errc() || ptr != field.data() + field.size() || label < 0) {
                throw MalformedRowError(row_no, "unparseable label: '" + field + "'");
            }
            set.class_labels.push_back(label);
        } else {
            for (std::size_t k = 0; k < prob_cols.size(); ++k) {
                double p = 0.0;
                if (static_cast<std::size_t>(prob_cols[k]) >= row.size() ||
                    !parse_coordinate(row[prob_cols[k]], p)) {
                    throw MalformedRowError(row_no, "unparseable probability");
                }
                set.distributions(r, k) = static_cast<float>(p);
            }
        }
    }
    if (set.points.empty()) throw EmptyFileError("no data rows in " + path.string());
    set.validate();
    return set;
}

void write_labeled_csv(const std::filesystem::path& path, const LabeledPointSet& set) {
    set.validate();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    if (set.is_distribution()) {
        out << "x,y";
        for (std::size_t k = 0; k < set.distributions.cols; ++k) out << ",p" << (k + 1);
        out << '\n';
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            out << format_double(set.points[i].x) << ',' << format_double(set.points[i].y);
            for (std::size_t k = 0; k < set.distributions.cols; ++k) {
                out << ',' << format_float(set.distributions(i, k));
            }
            out << '\n';
        }
    } else {
        out << "x,y,label\n";
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            out << format_double(set.points[i].x) << ',' << format_double(set.points[i].y) << ','
                << set.class_labels[i] << '\n';
        }
    }
}

// --- synthetic world -------------------------------------------------------

std::size_t SyntheticWorld::region_of(Coord c) const {
    std::size_t best = 0;
    double best_d2 = 1e300;
    for (std::size_t g = 0; g < sites.size(); ++g) {
        const double dx = c.x - sites[g].x;
        const double dy = c.y - sites[g].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = g;
        }
    }
    return best;
}

LabeledPointSet SyntheticWorld::sample_labeled_points(std::size_t count,
                                                      std::uint64_t seed) const {
    Rng rng = make_rng(seed, /*stream=*/3);
    LabeledPointSet set;
    set.points.reserve(count);
    set.class_labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Coord c{rng.uniform(config.min_x, config.max_x), rng.uniform(config.min_y, config.max_y)};
        set.points.push_back(c);
        set.class_labels.push_back(static_cast<int>(region_of(c)));
    }
    return set;
}

LabeledPointSet SyntheticWorld::sample_distribution_points(std::size_t count, double sigma,
                                                           std::uint64_t seed) const {
    if (!(sigma > 0.0)) throw ConfigInvalidError("sample_distribution_points: sigma must be > 0");
    Rng rng = make_rng(seed, /*stream=*/4);
    LabeledPointSet set;
    set.points.reserve(count);
    set.distributions = MatF(count, sites.size());
    for (std::size_t i = 0; i < count; ++i) {
        Coord c{rng.uniform(config.min_x, config.max_x), rng.uniform(config.min_y, config.max_y)};
        set.points.push_back(c);
        double max_logit = -1e300;
        std::vector<double> logits(sites.size());
        for (std::size_t g = 0; g < sites.size(); ++g) {
            const double dx = c.x - sites[g].x;
            const double dy = c.y - sites[g].y;
            logits[g] = -std::sqrt(dx * dx + dy * dy) / sigma;
            max_logit = std::max(max_logit, logits[g]);
        }
        double denom = 0.0;
        for (double& l : logits) {
            l = std::exp(l - max_logit);
            denom += l;
        }
        for (std::size_t g = 0; g < sites.size(); ++g) {
            set.distributions(i, g) = static_cast<float>(logits[g] / denom);
        }
        // Renormalize in float so the stored row passes the 1e-6 sum check.
        float fsum = 0.0f;
        for (std::size_t g = 0; g < sites.size(); ++g) fsum += set.distributions(i, g);
        for (std::size_t g = 0; g < sites.size(); ++g) set.distributions(i, g) /= fsum;
    }
    return set;
}

SyntheticWorld generate_synthetic_world(const SyntheticWorldConfig& config) {
    if (config.regions < 2) throw ConfigInvalidError("synthetic world: need at least 2 regions");
    if (config.vocab_per_region < 1) {
        throw ConfigInvalidError("synthetic world: need at least 1 class per region");
    }
    if (!(config.max_x > config.min_x) || !(config.max_y > config.min_y)) {
        throw ConfigInvalidError("synthetic world: extent is empty");
    }

    SyntheticWorld world;
    world.config = config;
    Rng rng = make_rng(config.seed, /*stream=*/5);

    // Voronoi sites. Rejection keeps sites a reasonable distance apart so no
    // region degenerates to a sliver.
    const double min_gap = 0.15 * std::min(config.max_x - config.min_x,
                                           config.max_y - config.min_y) /
                           std::sqrt(static_cast<double>(config.regions));
    while (world.sites.size() < config.regions) {
        Coord c{rng.uniform(config.min_x, config.max_x), rng.uniform(config.min_y, config.max_y)};
        bool ok = true;
        for (const auto& s : world.sites) {
            const double dx = c.x - s.x, dy = c.y - s.y;
            if (std::sqrt(dx * dx + dy * dy) < min_gap) {
                ok = false;
                break;
            }
        }
        if (ok) world.sites.push_back(c);
    }

    // Disjoint per-region vocabularies.
    world.vocab.resize(config.regions);
    for (std::size_t g = 0; g < config.regions; ++g) {
        for (std::size_t k = 0; k < config.vocab_per_region; ++k) {
            world.vocab[g].push_back("Category " + std::to_string(g) + "." + std::to_string(k));
        }
    }

    std::size_t next_id = 0;
    for (std::size_t g = 0; g < config.regions; ++g) {
        std::size_t placed = 0;
        while (placed < config.pois_per_region) {
            Coord c{rng.uniform(config.min_x, config.max_x),
                    rng.uniform(config.min_y, config.max_y)};
            if (world.region_of(c) != g) continue;  // uniform within the region
            Poi poi;
            poi.id = "poi" + std::to_string(next_id++);
            poi.x = c.x;
            poi.y = c.y;
            poi.group_label = "Synthetic district " + std::to_string(g);
            poi.class_label = world.vocab[g][rng.uniform_index(config.vocab_per_region)];
            poi.kind = ClassKind::Generic;
            world.pois.push_back(std::move(poi));
            ++placed;
        }
    }

    world.heldout = world.sample_labeled_points(config.heldout_points, config.seed + 1);
    return world;
}

}  // namespace calliper
