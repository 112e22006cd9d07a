// Command-line front end: synth, pretrain, embed, eval, cluster, serve.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "calliper/baselines.hpp"
#include "calliper/config.hpp"
#include "calliper/csv.hpp"
#include "calliper/geojson.hpp"
#include "calliper/poi.hpp"
#include "calliper/probe.hpp"
#include "calliper/server.hpp"
#include "calliper/text_provider.hpp"
#include "calliper/trainer.hpp"

namespace {

using namespace calliper;

// Input problems the user can fix by correcting a path or a file: exit 2.
bool is_usage_error(const std::exception& e) {
    return dynamic_cast<const ConfigInvalidError*>(&e) != nullptr ||
           dynamic_cast<const MissingColumnError*>(&e) != nullptr ||
           dynamic_cast<const MalformedRowError*>(&e) != nullptr ||
           dynamic_cast<const EmptyFileError*>(&e) != nullptr ||
           dynamic_cast<const ParseError*>(&e) != nullptr ||
           dynamic_cast<const RatioInvalidError*>(&e) != nullptr ||
           dynamic_cast<const NotADistributionError*>(&e) != nullptr;
}

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path)) {
        throw ConfigInvalidError(what + " not found: " + path);
    }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw ConfigInvalidError(what + ": not an integer: '" + text + "'");
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string current;
    for (char c : text) {
        if (c == ',') {
            seeds.push_back(parse_u64(trim(current), "--seeds"));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!trim(current).empty()) seeds.push_back(parse_u64(trim(current), "--seeds"));
    if (seeds.empty()) throw ConfigInvalidError("--seeds: empty list");
    return seeds;
}

struct CommonFlags {
    std::string config_path;

    RunConfig load() const {
        if (config_path.empty()) return RunConfig{};
        require_file(config_path, "config file");
        return load_config(config_path);
    }
};

// --- synth ------------------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    std::size_t regions = 5;
    std::size_t pois_per_region = 4000;
    std::size_t vocab_per_region = 6;
    std::size_t heldout = 2000;
    std::size_t sdm_points = 2000;
    double sdm_sigma = 0.0;  // 0 = 20% of the larger extent edge
    std::size_t grid = 20;
    double extent = 10000.0;
    std::uint64_t data_seed = 0;
};

int cmd_synth(const SynthArgs& args) {
    SyntheticWorldConfig config;
    config.max_x = config.max_y = args.extent;
    config.regions = args.regions;
    config.pois_per_region = args.pois_per_region;
    config.vocab_per_region = args.vocab_per_region;
    config.heldout_points = args.heldout;
    config.seed = args.data_seed;
    const auto world = generate_synthetic_world(config);

    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    write_poi_csv(dir / "pois.csv", world.pois);
    write_labeled_csv(dir / "luc.csv", world.heldout);
    const double sigma = args.sdm_sigma > 0.0 ? args.sdm_sigma : 0.2 * args.extent;
    write_labeled_csv(dir / "sdm.csv",
                      world.sample_distribution_points(args.sdm_points, sigma, config.seed + 2));
    write_geojson(dir / "units.geojson",
                  make_square_grid(config.min_x, config.min_y, config.max_x, config.max_y,
                                   args.grid, args.grid));
    std::cout << "synthetic world: " << world.pois.size() << " POIs, " << world.heldout.size()
              << " labeled points, " << args.grid * args.grid << " grid cells -> " << args.out_dir
              << "\n";
    return 0;
}

// --- pretrain ---------------------------------------------------------------

struct PretrainArgs {
    CommonFlags common;
    std::string poi_path;
    std::string embeddings_path;
    std::string synthetic_spec;  // "dim,seed"
    std::string endpoint;
    std::size_t endpoint_dim = 0;
    std::string cache_path;
    std::string out_path;
    std::string log_path;
    // Flag overrides; negative/empty means "not given".
    CLI::Option* opt_epochs = nullptr;
    CLI::Option* opt_batch = nullptr;
    CLI::Option* opt_lr = nullptr;
    CLI::Option* opt_tau = nullptr;
    CLI::Option* opt_normalize = nullptr;
    CLI::Option* opt_tau_learnable = nullptr;
    CLI::Option* opt_train_seed = nullptr;
    CLI::Option* opt_model_seed = nullptr;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double lr = 0.0;
    double tau = 0.0;
    bool normalize = true;
    bool tau_learnable = false;
    std::uint64_t train_seed = 0;
    std::uint64_t model_seed = 0;
};

std::unique_ptr<TextEmbeddingProvider> make_provider(const PretrainArgs& args) {
    if (!args.embeddings_path.empty()) {
        require_file(args.embeddings_path, "embedding file");
        return load_embedding_file(args.embeddings_path);
    }
    if (!args.synthetic_spec.empty()) {
        const auto comma = args.synthetic_spec.find(',');
        if (comma == std::string::npos) {
            throw ConfigInvalidError("--synthetic-embedder: expected dim,seed");
        }
        const auto dim = parse_u64(args.synthetic_spec.substr(0, comma), "--synthetic-embedder");
        const auto seed = parse_u64(args.synthetic_spec.substr(comma + 1), "--synthetic-embedder");
        return synthetic_embedder(dim, seed);
    }
    if (args.endpoint_dim == 0) {
        throw ConfigInvalidError("--endpoint requires --endpoint-dim");
    }
    HttpClientOptions options;
    if (!args.cache_path.empty()) options.cache_path = args.cache_path;
    return http_embedding_client(args.endpoint, args.endpoint_dim, options);
}

int cmd_pretrain(const PretrainArgs& args) {
    RunConfig config = args.common.load();
    if (*args.opt_epochs) config.trainer.epochs = args.epochs;
    if (*args.opt_batch) config.trainer.batch_size = args.batch_size;
    if (*args.opt_lr) config.trainer.lr = args.lr;
    if (*args.opt_tau) config.trainer.tau = args.tau;
    if (*args.opt_normalize) config.trainer.normalize_embeddings = args.normalize;
    if (*args.opt_tau_learnable) config.trainer.tau_learnable = args.tau_learnable;
    if (*args.opt_train_seed) config.trainer.seed = args.train_seed;
    if (*args.opt_model_seed) config.model_seed = args.model_seed;

    require_file(args.poi_path, "POI file");
    const auto pois = parse_poi_csv(args.poi_path);
    auto provider = make_provider(args);
    std::cerr << "embedding " << pois.size() << " POI prompts (d_t = " << provider->dim()
              << ")\n";
    const auto pairs = build_training_pairs(pois, *provider);

    CalliperModel model = make_model(config.pe, config.model_dims(provider->dim()),
                                     config.trainer.tau, config.trainer.normalize_embeddings,
                                     config.model_seed);
    const auto log = train(pairs, model, config.trainer);
    save_checkpoint(model, args.out_path);
    const std::string log_path =
        args.log_path.empty() ? args.out_path + ".train.csv" : args.log_path;
    write_training_log(log_path, log);

    double total = 0.0;
    for (const auto& entry : log) total += entry.wall_seconds;
    std::cout << "checkpoint " << args.out_path << "  epochs " << log.size() << "  final loss "
              << format_double(log.back().mean_loss) << "  total "
              << format_double(total) << "s\n";
    return 0;
}

// --- embed ------------------------------------------------------------------

std::vector<Coord> read_points_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int col_x = find_column(table.header, "x");
    const int col_y = find_column(table.header, "y");
    if (col_x < 0) throw MissingColumnError("x");
    if (col_y < 0) throw MissingColumnError("y");
    std::vector<Coord> points;
    points.reserve(table.rows.size());
    const auto width = static_cast<std::size_t>(std::max(col_x, col_y)) + 1;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() < width) {
            throw MalformedRowError(r + 2, "missing coordinate fields");
        }
        Coord c;
        try {
            c.x = std::stod(table.rows[r][col_x]);
            c.y = std::stod(table.rows[r][col_y]);
        } catch (const std::exception&) {
            throw MalformedRowError(r + 2, "unparseable coordinates");
        }
        points.push_back(c);
    }
    return points;
}

int cmd_embed(const std::string& model_path, const std::string& points_path,
              const std::string& out_path, int normalize_override) {
    require_file(model_path, "model checkpoint");
    require_file(points_path, "points file");
    const CalliperModel model = load_checkpoint(model_path);
    const bool normalize = normalize_override < 0 ? model.normalize : normalize_override > 0;
    const auto points = read_points_csv(points_path);
    const MatF embeddings = encode_locations(model, points, normalize);

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + out_path);
    out << "x,y";
    for (std::size_t j = 0; j < model.dims.d; ++j) out << ",e" << j;
    out << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << format_double(points[i].x) << ',' << format_double(points[i].y);
        for (std::size_t j = 0; j < embeddings.cols; ++j) {
            out << ',' << format_float(embeddings(i, j));
        }
        out << '\n';
    }
    std::cout << "wrote " << points.size() << " embeddings to " << out_path << "\n";
    return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
    CommonFlags common;
    std::string task;  // luc | sdm
    std::string model_path;
    std::string baseline;  // random | tfidf
    std::string dataset_path;
    std::string poi_path;  // tfidf only
    std::string report_path;
    std::string head;
    std::string seeds_text;
    CLI::Option* opt_head = nullptr;
    CLI::Option* opt_seeds = nullptr;
    std::uint64_t split_seed = 0;
    CLI::Option* opt_split_seed = nullptr;
};

int cmd_eval(const EvalArgs& args) {
    RunConfig config = args.common.load();
    if (*args.opt_head) {
        if (args.head == "linear") config.probe.head = HeadKind::Linear;
        else if (args.head == "mlp") config.probe.head = HeadKind::MlpOneHidden;
        else throw ConfigInvalidError("--head: expected linear or mlp");
    }
    if (*args.opt_seeds) config.probe.seeds = parse_seed_list(args.seeds_text);
    if (*args.opt_split_seed) config.data_seed = args.split_seed;

    require_file(args.dataset_path, "dataset file");
    LabeledPointSet dataset = read_labeled_csv(args.dataset_path);
    if (args.task == "luc" && dataset.is_distribution()) {
        throw ConfigInvalidError("luc needs a classification dataset (x,y,label)");
    }
    if (args.task == "sdm" && !dataset.is_distribution()) {
        throw ConfigInvalidError("sdm needs a distribution dataset (x,y,p1..pm)");
    }
    dataset = split_dataset(std::move(dataset), config.ratio, config.data_seed);

    MatF embeddings;
    std::string source;
    if (!args.model_path.empty()) {
        require_file(args.model_path, "model checkpoint");
        const CalliperModel model = load_checkpoint(args.model_path);
        embeddings = encode_locations(model, dataset.points);
        source = "model:" + args.model_path;
    } else if (args.baseline == "random") {
        embeddings = random_baseline(dataset.size(), config.fcnet.dim, config.data_seed);
        source = "baseline:random";
    } else if (args.baseline == "tfidf") {
        if (args.poi_path.empty()) {
            throw ConfigInvalidError("--baseline tfidf requires --poi");
        }
        require_file(args.poi_path, "POI file");
        const auto pois = parse_poi_csv(args.poi_path);
        std::vector<SpatialUnit> units(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            units[i].id = std::to_string(i);
            units[i].point = dataset.points[i];
        }
        const auto vocab = class_vocabulary(pois);
        embeddings = tfidf_baseline(pois, units, vocab);
        source = "baseline:tfidf";
    } else {
        throw ConfigInvalidError("--baseline: expected random or tfidf");
    }

    config.probe.config_digest_extra = source;
    const MetricsReport report = run_experiment(embeddings, dataset, config.probe);
    if (!args.report_path.empty()) {
        std::ofstream out(args.report_path, std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + args.report_path);
        out << report.to_json();
    }
    std::cout << args.task << " (" << source << ", head " << report.head << ", "
              << report.seeds.size() << " seeds)\n";
    for (const auto& [name, stat] : report.metrics) {
        std::printf("  %-10s %.4f +- %.4f\n", name.c_str(), stat.mean, stat.std);
    }
    return 0;
}

// --- cluster ----------------------------------------------------------------

int cmd_cluster(const std::string& model_path, const std::string& geojson_path, std::size_t k,
                std::uint64_t seed, const std::string& out_path, std::string csv_path) {
    require_file(model_path, "model checkpoint");
    require_file(geojson_path, "GeoJSON file");
    const CalliperModel model = load_checkpoint(model_path);
    const auto collection = read_geojson_units(geojson_path);
    const auto clustered = cluster_units(model, collection, k, seed);
    write_geojson(out_path, clustered.feature_collection);
    if (csv_path.empty()) {
        csv_path = std::filesystem::path(out_path).replace_extension(".csv").string();
    }
    write_cluster_csv(csv_path, collection, clustered);
    std::cout << "clustered " << collection.units.size() << " units into " << k << " groups -> "
              << out_path << ", " << csv_path << "\n";
    return 0;
}

// --- serve ------------------------------------------------------------------

int cmd_serve(const std::string& model_path, const std::string& host, int port,
              int normalize_override) {
    require_file(model_path, "model checkpoint");
    CalliperModel model = load_checkpoint(model_path);
    if (normalize_override >= 0) model.normalize = normalize_override > 0;
    EmbeddingServer server(std::move(model));
    std::cerr << "serving on http://" << host << ":" << port << " (POST /embed, GET /health)\n";
    if (!server.serve(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CaLLiPer-style location-language pre-training toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic world");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--regions", synth.regions, "number of Voronoi regions");
    synth_cmd->add_option("--pois-per-region", synth.pois_per_region);
    synth_cmd->add_option("--vocab-per-region", synth.vocab_per_region);
    synth_cmd->add_option("--heldout", synth.heldout, "labeled points for LUC");
    synth_cmd->add_option("--sdm-points", synth.sdm_points, "labeled points for SDM");
    synth_cmd->add_option("--sdm-sigma", synth.sdm_sigma, "distance scale of SDM targets");
    synth_cmd->add_option("--grid", synth.grid, "cells per side of the unit grid");
    synth_cmd->add_option("--extent", synth.extent, "square extent edge length in metres");
    synth_cmd->add_option("--data-seed", synth.data_seed);

    PretrainArgs pre;
    auto* pre_cmd = app.add_subcommand("pretrain", "contrastive pre-training");
    pre_cmd->add_option("--poi", pre.poi_path, "POI CSV")->required();
    auto* source = pre_cmd->add_option_group("embedding source");
    source->add_option("--embeddings", pre.embeddings_path, "NDJSON embedding file");
    source->add_option("--synthetic-embedder", pre.synthetic_spec, "dim,seed");
    source->add_option("--endpoint", pre.endpoint, "HTTP embedding service URL");
    source->require_option(1);
    pre_cmd->add_option("--endpoint-dim", pre.endpoint_dim, "dimension of --endpoint vectors");
    pre_cmd->add_option("--cache", pre.cache_path, "NDJSON cache for --endpoint");
    pre_cmd->add_option("--config", pre.common.config_path, "config file");
    pre_cmd->add_option("--out", pre.out_path, "checkpoint path")->required();
    pre_cmd->add_option("--log", pre.log_path, "training log CSV");
    pre.opt_epochs = pre_cmd->add_option("--epochs", pre.epochs);
    pre.opt_batch = pre_cmd->add_option("--batch-size", pre.batch_size);
    pre.opt_lr = pre_cmd->add_option("--lr", pre.lr);
    pre.opt_tau = pre_cmd->add_option("--tau", pre.tau);
    pre.opt_normalize = pre_cmd->add_option("--normalize", pre.normalize, "true/false");
    pre.opt_tau_learnable = pre_cmd->add_option("--tau-learnable", pre.tau_learnable);
    pre.opt_train_seed = pre_cmd->add_option("--train-seed", pre.train_seed);
    pre.opt_model_seed = pre_cmd->add_option("--model-seed", pre.model_seed);

    std::string embed_model, embed_points, embed_out;
    int embed_normalize = -1;
    auto* embed_cmd = app.add_subcommand("embed", "embed coordinates to CSV");
    embed_cmd->add_option("--model", embed_model)->required();
    embed_cmd->add_option("--points", embed_points, "CSV with x,y columns")->required();
    embed_cmd->add_option("--out", embed_out)->required();
    embed_cmd->add_option("--normalize", embed_normalize, "1/0, default: model setting");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "downstream probe evaluation");
    eval_cmd->add_option("task", eval.task, "luc or sdm")
        ->required()
        ->check(CLI::IsMember({"luc", "sdm"}));
    auto* eval_source = eval_cmd->add_option_group("embedding source");
    eval_source->add_option("--model", eval.model_path, "model checkpoint");
    eval_source->add_option("--baseline", eval.baseline, "random or tfidf");
    eval_source->require_option(1);
    eval_cmd->add_option("--dataset", eval.dataset_path)->required();
    eval_cmd->add_option("--poi", eval.poi_path, "POI CSV (tfidf baseline)");
    eval_cmd->add_option("--report", eval.report_path, "report JSON path");
    eval_cmd->add_option("--config", eval.common.config_path, "config file");
    eval.opt_head = eval_cmd->add_option("--head", eval.head, "linear or mlp");
    eval.opt_seeds = eval_cmd->add_option("--seeds", eval.seeds_text, "comma-separated seeds");
    eval.opt_split_seed = eval_cmd->add_option("--split-seed", eval.split_seed);

    std::string cluster_model, cluster_geojson, cluster_out, cluster_csv;
    std::size_t cluster_k = 4;
    std::uint64_t cluster_seed = 0;
    auto* cluster_cmd = app.add_subcommand("cluster", "k-means over unit embeddings");
    cluster_cmd->add_option("--model", cluster_model)->required();
    cluster_cmd->add_option("--geojson", cluster_geojson)->required();
    cluster_cmd->add_option("--k", cluster_k)->required();
    cluster_cmd->add_option("--seed", cluster_seed);
    cluster_cmd->add_option("--out", cluster_out)->required();
    cluster_cmd->add_option("--csv", cluster_csv);

    std::string serve_model, serve_host = "0.0.0.0";
    int serve_port = 8080;
    int serve_normalize = -1;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP embedding service");
    serve_cmd->add_option("--model", serve_model)->required();
    serve_cmd->add_option("--host", serve_host);
    serve_cmd->add_option("--port", serve_port);
    serve_cmd->add_option("--normalize", serve_normalize, "1/0, default: model setting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth);
        if (*pre_cmd) return cmd_pretrain(pre);
        if (*embed_cmd) return cmd_embed(embed_model, embed_points, embed_out, embed_normalize);
        if (*eval_cmd) return cmd_eval(eval);
        if (*cluster_cmd) {
            return cmd_cluster(cluster_model, cluster_geojson, cluster_k, cluster_seed,
                               cluster_out, cluster_csv);
        }
        if (*serve_cmd) return cmd_serve(serve_model, serve_host, serve_port, serve_normalize);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_usage_error(e) ? 2 : 1;
    }
    return 2;
}
