#include <thread>

#include "calliper/server.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_helpers.hpp"

using namespace calliper;

namespace {

CalliperModel test_model() {
    GridPeConfig pe{100.0, 5000.0, 4};
    return make_model(pe, ModelDims{8, 12, 16, 1}, 0.07, true, 5);
}

}  // namespace

TEST_CASE("server: health and embed against the library path") {
    EmbeddingServer server(test_model());
    const int port = server.start_background("127.0.0.1");
    REQUIRE(port > 0);
    httplib::Client client("127.0.0.1", port);

    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    auto body = nlohmann::json::parse(health->body);
    CHECK(body["status"] == "ok");
    CHECK(body["dim"] == 8);
    CHECK(body["version"] == kVersion);

    auto res = client.Post("/embed", R"({"coords":[[10.0,20.0],[300.0,-40.0]]})",
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto parsed = nlohmann::json::parse(res->body);
    const auto model = test_model();
    std::vector<Coord> coords{{10.0, 20.0}, {300.0, -40.0}};
    const MatF expected = encode_locations(model, coords);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(parsed["embeddings"][i][j].get<double>() ==
                  doctest::Approx(expected(i, j)).epsilon(1e-9));
        }
    }

    auto bad = client.Post("/embed", "{\"coords\": 7}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    server.stop();
}

TEST_CASE("server: concurrent embed storm matches the serial answer") {
    EmbeddingServer server(test_model());
    const int port = server.start_background("127.0.0.1");
    REQUIRE(port > 0);

    const std::string body = R"({"coords":[[123.0,456.0],[789.0,-12.0],[0.5,0.5]]})";
    std::string serial;
    {
        httplib::Client client("127.0.0.1", port);
        auto res = client.Post("/embed", body, "application/json");
        REQUIRE(res);
        serial = res->body;
    }

    constexpr int kThreads = 8;
    constexpr int kRequests = 10;
    std::vector<std::thread> workers;
    std::vector<int> mismatches(kThreads, 0);
    for (int t = 0; t < kThreads; ++t) {
        workers.emplace_back([&, t] {
            httplib::Client client("127.0.0.1", port);
            for (int r = 0; r < kRequests; ++r) {
                auto res = client.Post("/embed", body, "application/json");
                if (!res || res->status != 200 || res->body != serial) ++mismatches[t];
            }
        });
    }
    for (auto& w : workers) w.join();
    for (int t = 0; t < kThreads; ++t) CHECK(mismatches[t] == 0);
    server.stop();
}
