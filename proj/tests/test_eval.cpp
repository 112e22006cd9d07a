#include <cmath>

#include "calliper/baselines.hpp"
#include "calliper/probe.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace calliper;

namespace {

// Two linearly separable Gaussian clouds in embedding space.
std::pair<MatF, LabeledPointSet> separable_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    MatF embeddings(n, 8);
    LabeledPointSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < 8; ++j) {
            embeddings(i, j) = static_cast<float>(rng.gaussian() * 0.3);
        }
        embeddings(i, 0) += label == 0 ? 2.0f : -2.0f;
        set.points.push_back({double(i), 0.0});
        set.class_labels.push_back(label);
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 11);
    return {embeddings, set};
}

}  // namespace

TEST_CASE("train_probe: linearly separable classes reach F1 >= 0.95") {
    auto [embeddings, set] = separable_dataset(300, 1);
    ProbeConfig config;
    config.max_epochs = 100;
    ProbeHead head = train_probe(embeddings, set, config, 5);

    const auto test_idx = set.indices_of(Split::Test);
    MatF test(test_idx.size(), embeddings.cols);
    std::vector<int> truth(test_idx.size());
    for (std::size_t k = 0; k < test_idx.size(); ++k) {
        std::copy(embeddings.row(test_idx[k]).begin(), embeddings.row(test_idx[k]).end(),
                  test.row(k).begin());
        truth[k] = set.class_labels[test_idx[k]];
    }
    auto pred = probe_predict_classes(head, test);
    auto metrics = classification_metrics(pred, truth, 2);
    CHECK(metrics.f1 >= 0.95);
}

TEST_CASE("train_probe: constant distribution target is matched within L1 0.01") {
    Rng rng(3);
    const std::size_t n = 200;
    MatF embeddings = testutil::random_matrix<float>(n, 6, rng);
    LabeledPointSet set;
    set.distributions = MatF(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        set.points.push_back({double(i), 0.0});
        set.distributions(i, 0) = 0.2f;
        set.distributions(i, 1) = 0.5f;
        set.distributions(i, 2) = 0.3f;
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 4);
    ProbeConfig config;
    config.lr = 0.05;  // constant target: only the bias has to travel
    config.batch_size = 32;
    config.max_epochs = 300;
    config.patience = 30;
    ProbeHead head = train_probe(embeddings, set, config, 1);
    MatF probs = probe_predict(head, embeddings);
    MatD pd = cast_matrix<float, double>(probs);
    MatD td = cast_matrix<float, double>(set.distributions);
    CHECK(distribution_metrics(pd, td).l1 < 0.01);
}

TEST_CASE("train_probe: empty validation split raises EmptySplit") {
    auto [embeddings, set] = separable_dataset(20, 2);
    for (auto& s : set.split_assignment) {
        if (s == Split::Val) s = Split::Train;
    }
    CHECK_THROWS_AS(train_probe(embeddings, set, ProbeConfig{}, 0), EmptySplitError);
}

TEST_CASE("train_probe: early stopping keeps the best-validation epoch") {
    // patience 3 vs a probe that keeps improving for far longer: the kept
    // epoch must be the best seen before the stall, not the last one run.
    auto [embeddings, set] = separable_dataset(120, 9);
    ProbeConfig config;
    config.max_epochs = 200;
    config.patience = 3;
    ProbeHead head = train_probe(embeddings, set, config, 2);
    CHECK(head.best_epoch >= 1);
    CHECK(head.best_epoch <= config.max_epochs);

    // Rerunning with identical inputs reproduces the same best epoch.
    ProbeHead again = train_probe(embeddings, set, config, 2);
    CHECK(again.best_epoch == head.best_epoch);
    CHECK(again.net.layers[0].weight == head.net.layers[0].weight);
}

TEST_CASE("run_experiment: identical seeds give std 0; distinct seeds vary") {
    auto [embeddings, set] = separable_dataset(150, 4);
    ProbeConfig config;
    config.seeds = {7, 7, 7, 7, 7};
    auto report = run_experiment(embeddings, set, config);
    CHECK(report.metrics.at("F1").std == 0.0);
    CHECK(report.task == "classification");
    CHECK(report.head == "linear");

    config.seeds = {1, 2, 3};
    auto varied = run_experiment(embeddings, set, config);
    CHECK(varied.metrics.at("F1").mean > 0.8);
}

TEST_CASE("run_experiment: random embeddings score near chance on balanced classes") {
    LabeledPointSet set;
    const std::size_t n = 400;
    for (std::size_t i = 0; i < n; ++i) {
        set.points.push_back({double(i), 0.0});
        set.class_labels.push_back(static_cast<int>(i % 4));
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 5);
    MatF embeddings = random_baseline(n, 16, 123);
    ProbeConfig config;
    config.max_epochs = 40;
    config.seeds = {1, 2, 3};
    auto report = run_experiment(embeddings, set, config);
    CHECK(report.metrics.at("F1").mean < 0.45);  // chance is 0.25
    CHECK(report.metrics.at("F1").mean > 0.05);
}

TEST_CASE("run_experiment: L1 >= Chebyshev holds in reported means") {
    Rng rng(21);
    const std::size_t n = 120;
    MatF embeddings = testutil::random_matrix<float>(n, 6, rng);
    LabeledPointSet set;
    set.distributions = MatF(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        set.points.push_back({double(i), 0.0});
        float sum = 0.0f;
        for (std::size_t k = 0; k < 4; ++k) {
            set.distributions(i, k) = static_cast<float>(rng.uniform() + 0.05);
            sum += set.distributions(i, k);
        }
        for (std::size_t k = 0; k < 4; ++k) set.distributions(i, k) /= sum;
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 6);
    ProbeConfig config;
    config.max_epochs = 20;
    config.seeds = {1, 2};
    auto report = run_experiment(embeddings, set, config);
    CHECK(report.metrics.at("L1").mean >= report.metrics.at("Chebyshev").mean);
    CHECK(report.metrics.at("KL").mean >= 0.0);
}

TEST_CASE("random_baseline: deterministic unit rows") {
    MatF a = random_baseline(10, 8, 42);
    MatF b = random_baseline(10, 8, 42);
    CHECK(a == b);
    CHECK(random_baseline(10, 8, 43) != a);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) ss += double(a(i, j)) * double(a(i, j));
        CHECK(std::sqrt(ss) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("tfidf_baseline: single unit, single class is one unit-norm spike") {
    std::vector<Poi> pois(3);
    for (auto& p : pois) p = {"x", 1.0, 1.0, "G", "OnlyClass", ClassKind::Generic};
    std::vector<SpatialUnit> units(1);
    units[0].id = "u";
    units[0].point = {0.0, 0.0};
    std::vector<std::string> vocab{"OnlyClass"};
    MatF m = tfidf_baseline(pois, units, vocab);
    CHECK(m.rows == 1);
    CHECK(m.cols == 1);
    CHECK(m(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("tfidf_baseline: rarer classes get strictly larger idf weight") {
    // Class "common" appears in both units, "rare" only in the first. With
    // equal in-unit counts the rare class must dominate unit 0's vector.
    std::vector<Poi> pois;
    pois.push_back({"a", 0.0, 0.0, "G", "common", ClassKind::Generic});
    pois.push_back({"b", 0.0, 0.0, "G", "rare", ClassKind::Generic});
    pois.push_back({"c", 10.0, 0.0, "G", "common", ClassKind::Generic});
    std::vector<SpatialUnit> units(2);
    units[0].id = "u0";
    units[0].point = {0.0, 0.0};
    units[1].id = "u1";
    units[1].point = {10.0, 0.0};
    std::vector<std::string> vocab{"common", "rare"};
    MatF m = tfidf_baseline(pois, units, vocab);
    CHECK(m(0, 1) > m(0, 0));
}

TEST_CASE("tfidf_baseline matches a hand-computed 3x2 table") {
    // Unit u0: 2x alpha, 1x beta. Unit u1: 3x beta. Unit u2: empty.
    std::vector<Poi> pois;
    for (int i = 0; i < 2; ++i) pois.push_back({"a", 0.0, 0.0, "G", "alpha", ClassKind::Generic});
    pois.push_back({"b", 0.0, 0.0, "G", "beta", ClassKind::Generic});
    for (int i = 0; i < 3; ++i) pois.push_back({"c", 10.0, 0.0, "G", "beta", ClassKind::Generic});
    std::vector<SpatialUnit> units(3);
    units[0].point = {0.0, 0.0};
    units[1].point = {10.0, 0.0};
    units[2].point = {100.0, 100.0};
    std::vector<std::string> vocab{"alpha", "beta"};

    // Hand computation with the smoothed idf: idf = ln((1+3)/(1+df)) + 1.
    const double idf_alpha = std::log(4.0 / 2.0) + 1.0;  // df = 1
    const double idf_beta = std::log(4.0 / 3.0) + 1.0;   // df = 2
    const double u0_alpha = (2.0 / 3.0) * idf_alpha;
    const double u0_beta = (1.0 / 3.0) * idf_beta;
    const double norm = std::sqrt(u0_alpha * u0_alpha + u0_beta * u0_beta);

    MatF m = tfidf_baseline(pois, units, vocab);
    CHECK(m(0, 0) == doctest::Approx(u0_alpha / norm).epsilon(1e-6));
    CHECK(m(0, 1) == doctest::Approx(u0_beta / norm).epsilon(1e-6));
    CHECK(m(1, 0) == doctest::Approx(0.0));
    CHECK(m(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m(2, 0) == 0.0f);  // empty unit keeps the zero vector
    CHECK(m(2, 1) == 0.0f);

    CHECK_THROWS_AS(tfidf_baseline(pois, units, std::vector<std::string>{}),
                    EmptyVocabularyError);
}

TEST_CASE("tfidf_baseline assigns by point-in-polygon when units are polygons") {
    std::vector<Poi> pois;
    pois.push_back({"a", 0.5, 0.5, "G", "inner", ClassKind::Generic});
    pois.push_back({"b", 5.0, 5.0, "G", "outer", ClassKind::Generic});
    std::vector<SpatialUnit> units(1);
    units[0].id = "cell";
    units[0].polygon = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
    std::vector<std::string> vocab{"inner", "outer"};
    MatF m = tfidf_baseline(pois, units, vocab);
    CHECK(m(0, 0) == doctest::Approx(1.0));  // only the inside POI counted
    CHECK(m(0, 1) == 0.0f);
}

TEST_CASE("train_probe: degrading validation keeps the best epoch, not the last") {
    // Train labels are flipped relative to validation/test labels: fitting
    // the train split makes the validation F1 strictly worse over time, so
    // early stopping must fire and the returned weights must come from the
    // best validation epoch.
    Rng rng(31);
    const std::size_t n = 200;
    MatF embeddings(n, 4);
    LabeledPointSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < 4; ++j) {
            embeddings(i, j) = static_cast<float>(rng.gaussian() * 0.1);
        }
        embeddings(i, 0) += label == 0 ? 1.0f : -1.0f;
        set.points.push_back({double(i), 0.0});
        set.class_labels.push_back(label);
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (set.split_assignment[i] == Split::Train) {
            set.class_labels[i] = 1 - set.class_labels[i];
        }
    }

    ProbeConfig config;
    config.patience = 5;
    ProbeHead head = train_probe(embeddings, set, config, 3);
    CHECK(head.epochs_run < config.max_epochs);      // early stop fired
    CHECK(head.best_epoch < head.epochs_run);        // kept weights are not the last

    // The returned head reproduces the recorded best validation metric.
    const auto val_idx = set.indices_of(Split::Val);
    MatF val(val_idx.size(), 4);
    std::vector<int> truth(val_idx.size());
    for (std::size_t k = 0; k < val_idx.size(); ++k) {
        std::copy(embeddings.row(val_idx[k]).begin(), embeddings.row(val_idx[k]).end(),
                  val.row(k).begin());
        truth[k] = set.class_labels[val_idx[k]];
    }
    const auto pred = probe_predict_classes(head, val);
    const double f1 = classification_metrics(pred, truth, 2).f1;
    CHECK(f1 == doctest::Approx(head.best_val_metric).epsilon(1e-12));
}

TEST_CASE("run_experiment never mutates the model (frozen-encoder contract)") {
    GridPeConfig pe{100.0, 4000.0, 4};
    const CalliperModel model = make_model(pe, ModelDims{8, 12, 16, 1}, 0.07, true, 21);
    LabeledPointSet set;
    Rng rng(5);
    for (int i = 0; i < 120; ++i) {
        set.points.push_back({rng.uniform(0.0, 4000.0), rng.uniform(0.0, 4000.0)});
        set.class_labels.push_back(i % 2);
    }
    set = split_dataset(std::move(set), {0.7, 0.1, 0.2}, 1);
    const MatF before = encode_locations(model, set.points);
    ProbeConfig config;
    config.max_epochs = 10;
    config.seeds = {1, 2};
    run_experiment(model, set, config);
    const MatF after = encode_locations(model, set.points);
    CHECK(before == after);
}
