#include "calliper/server.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace calliper {

struct EmbeddingServer::Impl {
    CalliperModel model;
    httplib::Server server;
    std::thread thread;

    explicit Impl(CalliperModel m) : model(std::move(m)) {
        model.validate();
        // SO_REUSEADDR only: restarts reuse TIME_WAIT ports, but binding a
        // port another live server holds must fail (httplib's default also
        // sets SO_REUSEPORT, which would silently double-bind).
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                       sizeof(yes));
        });
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json body;
            body["status"] = "ok";
            body["dim"] = model.dims.d;
            body["version"] = kVersion;
            res.set_content(body.dump(), "application/json");
        });
        server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                fail(res, std::string("invalid JSON: ") + e.what());
                return;
            }
            if (!body.is_object() || !body.contains("coords") || !body["coords"].is_array()) {
                fail(res, "expected {\"coords\": [[x, y], ...]}");
                return;
            }
            std::vector<Coord> coords;
            coords.reserve(body["coords"].size());
            for (const auto& pt : body["coords"]) {
                if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
                    fail(res, "each coordinate must be [x, y]");
                    return;
                }
                coords.push_back({pt[0].get<double>(), pt[1].get<double>()});
            }
            nlohmann::json reply;
            try {
                const MatF embeddings = encode_locations(model, coords);
                nlohmann::json rows = nlohmann::json::array();
                for (std::size_t i = 0; i < embeddings.rows; ++i) {
                    nlohmann::json row = nlohmann::json::array();
                    for (std::size_t j = 0; j < embeddings.cols; ++j) row.push_back(embeddings(i, j));
                    rows.push_back(std::move(row));
                }
                reply["embeddings"] = std::move(rows);
            } catch (const Error& e) {
                fail(res, e.what());
                return;
            }
            res.set_content(reply.dump(), "application/json");
        });
    }

    static void fail(httplib::Response& res, const std::string& message) {
        res.status = 400;
        nlohmann::json body;
        body["error"] = message;
        res.set_content(body.dump(), "application/json");
    }
};

EmbeddingServer::EmbeddingServer(CalliperModel model)
    : impl_(std::make_unique<Impl>(std::move(model))) {}

EmbeddingServer::~EmbeddingServer() { stop(); }

bool EmbeddingServer::serve(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int EmbeddingServer::start_background(const std::string& host) {
    const int port = impl_->server.bind_to_any_port(host);
    if (port <= 0) return -1;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void EmbeddingServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace calliper
