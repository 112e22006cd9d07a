#include <cmath>
#include <set>

#include "calliper/geojson.hpp"
#include "calliper/geometry.hpp"
#include "calliper/kmeans.hpp"
#include "calliper/pca.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace calliper;

TEST_CASE("polygon centroid: square, triangle, degenerate ring") {
    std::vector<Coord> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    auto c = polygon_centroid(square);
    CHECK(c.x == doctest::Approx(0.5));
    CHECK(c.y == doctest::Approx(0.5));

    std::vector<Coord> triangle{{0, 0}, {3, 0}, {0, 3}, {0, 0}};  // closed ring
    c = polygon_centroid(triangle);
    CHECK(c.x == doctest::Approx(1.0));
    CHECK(c.y == doctest::Approx(1.0));

    std::vector<Coord> collinear{{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(polygon_centroid(collinear), DegenerateGeometryError);
    std::vector<Coord> two{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(polygon_centroid(two), DegenerateGeometryError);
}

TEST_CASE("point_in_polygon basics") {
    std::vector<Coord> square{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {0, 0}};
    CHECK(point_in_polygon({1, 1}, square));
    CHECK_FALSE(point_in_polygon({3, 1}, square));
    CHECK(point_in_polygon({0, 1}, square));  // edge counts as inside
}

TEST_CASE("kmeans: k=1 gives the column mean and total SSE") {
    Rng rng(17);
    MatF points = testutil::random_matrix<float>(40, 3, rng);
    auto result = kmeans(points, 1, 0);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 40; ++i) mean += points(i, j);
        mean /= 40.0;
        CHECK(result.centroids(0, j) == doctest::Approx(mean).epsilon(1e-5));
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double d = points(i, j) - result.centroids(0, j);
            sse += d * d;
        }
    }
    CHECK(result.inertia == doctest::Approx(sse).epsilon(1e-5));
}

TEST_CASE("kmeans: k = N distinct rows gives zero inertia") {
    MatF points(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        points(i, 0) = static_cast<float>(i * 10);
        points(i, 1) = static_cast<float>(i);
    }
    auto result = kmeans(points, 5, 3);
    CHECK(result.inertia == doctest::Approx(0.0));
    std::set<int> labels(result.labels.begin(), result.labels.end());
    CHECK(labels.size() == 5);
}

TEST_CASE("kmeans: two 10-sigma blobs are recovered exactly") {
    Rng rng(8);
    const std::size_t per_blob = 60;
    MatF points(2 * per_blob, 2);
    std::vector<int> truth(2 * per_blob);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const bool second = i >= per_blob;
        points(i, 0) = static_cast<float>(rng.gaussian() + (second ? 10.0 : 0.0));
        points(i, 1) = static_cast<float>(rng.gaussian());
        truth[i] = second ? 1 : 0;
    }
    auto result = kmeans(points, 2, 123);
    CHECK(testutil::adjusted_rand_index(result.labels, truth) == doctest::Approx(1.0));
}

TEST_CASE("kmeans: inertia never increases across Lloyd iterations") {
    Rng rng(9);
    for (int run = 0; run < 10; ++run) {
        MatF points = testutil::random_matrix<float>(80, 4, rng);
        auto result = kmeans(points, 1 + rng.uniform_index(6), run);
        for (std::size_t i = 1; i < result.inertia_history.size(); ++i) {
            CHECK(result.inertia_history[i] <= result.inertia_history[i - 1] + 1e-6);
        }
    }
}

TEST_CASE("kmeans: labels invariant under global translation, same seed") {
    Rng rng(10);
    MatF points = testutil::random_matrix<float>(50, 3, rng);
    MatF shifted = points;
    for (std::size_t i = 0; i < shifted.rows; ++i) {
        shifted(i, 0) += 100.0f;
        shifted(i, 1) -= 40.0f;
        shifted(i, 2) += 7.0f;
    }
    auto a = kmeans(points, 4, 77);
    auto b = kmeans(shifted, 4, 77);
    CHECK(testutil::adjusted_rand_index(a.labels, b.labels) == doctest::Approx(1.0));
}

TEST_CASE("kmeans rejects k > N and is deterministic per seed") {
    MatF points(3, 2, 1.0f);
    CHECK_THROWS_AS(kmeans(points, 4, 0), KTooLargeError);

    Rng rng(11);
    MatF data = testutil::random_matrix<float>(30, 2, rng);
    auto a = kmeans(data, 3, 5);
    auto b = kmeans(data, 3, 5);
    CHECK(a.labels == b.labels);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("pca: recovers axis-aligned structure up to the sign convention") {
    // Data spread mostly along y, then x, then z.
    Rng rng(12);
    MatF points(200, 3);
    for (std::size_t i = 0; i < 200; ++i) {
        points(i, 0) = static_cast<float>(rng.gaussian() * 2.0);
        points(i, 1) = static_cast<float>(rng.gaussian() * 5.0);
        points(i, 2) = static_cast<float>(rng.gaussian() * 0.5);
    }
    MatF proj = pca_project(points, 3);
    // Component 0 should track column 1, component 1 column 0.
    double corr0 = 0.0, corr1 = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
        corr0 += proj(i, 0) * points(i, 1);
        corr1 += proj(i, 1) * points(i, 0);
    }
    CHECK(std::fabs(corr0) / 200.0 > 10.0);
    CHECK(std::fabs(corr1) / 200.0 > 1.0);
}

TEST_CASE("pca: constant rows project to zero; reconstruction improves with out_dim") {
    MatF constant(5, 4, 3.25f);
    MatF proj = pca_project(constant, 3);
    for (float v : proj.data) CHECK(v == 0.0f);

    Rng rng(13);
    MatF points = testutil::random_matrix<float>(60, 6, rng);
    // Reconstruction error via preserved variance: total variance minus
    // projected variance is non-increasing in out_dim.
    auto residual = [&](std::size_t k) {
        MatF p = pca_project(points, k);
        double total = 0.0, kept = 0.0;
        std::vector<double> means(6, 0.0);
        for (std::size_t i = 0; i < points.rows; ++i) {
            for (std::size_t j = 0; j < 6; ++j) means[j] += points(i, j);
        }
        for (auto& m : means) m /= double(points.rows);
        for (std::size_t i = 0; i < points.rows; ++i) {
            for (std::size_t j = 0; j < 6; ++j) {
                total += (points(i, j) - means[j]) * (points(i, j) - means[j]);
            }
            for (std::size_t j = 0; j < k; ++j) kept += double(p(i, j)) * double(p(i, j));
        }
        return total - kept;
    };
    double previous = residual(1);
    for (std::size_t k = 2; k <= 5; ++k) {
        const double r = residual(k);
        CHECK(r <= previous + 1e-3);
        previous = r;
    }
}

TEST_CASE("rgb_encode: single row, endpoints, monotone order") {
    MatF one(1, 3, 0.7f);
    auto rgb = rgb_encode(one);
    CHECK(rgb[0] == std::array<int, 3>{128, 128, 128});

    MatF two(2, 3);
    two(0, 0) = 0.0f;
    two(1, 0) = 1.0f;
    two(0, 1) = 5.0f;
    two(1, 1) = 5.0f;  // constant column -> 128
    auto r2 = rgb_encode(two);
    CHECK(r2[0][0] == 0);
    CHECK(r2[1][0] == 255);
    CHECK(r2[0][1] == 128);
    CHECK(r2[1][1] == 128);

    Rng rng(14);
    MatF mono(10, 3);
    for (std::size_t i = 0; i < 10; ++i) mono(i, 0) = static_cast<float>(i) + 0.5f;
    auto r3 = rgb_encode(mono);
    for (std::size_t i = 1; i < 10; ++i) CHECK(r3[i][0] >= r3[i - 1][0]);

    CHECK(rgb_hex({0, 128, 255}) == "#0080FF");
}

TEST_CASE("geojson: grid round-trips ids, geometry and gains properties") {
    testutil::TempDir dir;
    auto fc = make_square_grid(0.0, 0.0, 100.0, 100.0, 3, 2);
    write_geojson(dir.file("grid.geojson"), fc);
    auto collection = read_geojson_units(dir.file("grid.geojson"));
    REQUIRE(collection.units.size() == 6);
    CHECK(collection.units[0].id == "cell_0_0");
    CHECK(collection.units[0].is_polygon());
    auto c = collection.units[0].centroid();
    CHECK(c.x == doctest::Approx(100.0 / 6.0));
    CHECK(c.y == doctest::Approx(25.0));

    // Annotate with a model and re-read: same ids/geometry plus properties.
    GridPeConfig pe{50.0, 1000.0, 4};
    auto model = make_model(pe, ModelDims{8, 16, 16, 1}, 0.07, true, 0);
    auto clustered = cluster_units(model, collection, 2, 9);
    write_geojson(dir.file("out.geojson"), clustered.feature_collection);
    auto back = read_geojson_units(dir.file("out.geojson"));
    REQUIRE(back.units.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(back.units[i].id == collection.units[i].id);
        CHECK(back.units[i].polygon == collection.units[i].polygon);
        const auto& props = back.raw["features"][i]["properties"];
        CHECK(props.contains("cluster"));
        CHECK(props.contains("rgb"));
    }

    // Determinism: same seed, byte-identical output.
    auto again = cluster_units(model, collection, 2, 9);
    write_geojson(dir.file("out2.geojson"), again.feature_collection);
    CHECK(testutil::read_file(dir.file("out.geojson")) ==
          testutil::read_file(dir.file("out2.geojson")));

    // k = 1: everything in cluster 0.
    auto k1 = cluster_units(model, collection, 1, 0);
    for (int label : k1.labels) CHECK(label == 0);

    // CSV sidecar.
    write_cluster_csv(dir.file("out.csv"), collection, clustered);
    const auto csv = testutil::read_file(dir.file("out.csv"));
    CHECK(csv.rfind("id,cluster,r,g,b\n", 0) == 0);
}

TEST_CASE("geojson: parse failures carry context") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("bad.geojson"), "{\"type\": \"Feature\"}");
    CHECK_THROWS_AS(read_geojson_units(dir.file("bad.geojson")), ParseError);
    testutil::write_file(dir.file("worse.geojson"), "not json at all");
    CHECK_THROWS_AS(read_geojson_units(dir.file("worse.geojson")), ParseError);
}
