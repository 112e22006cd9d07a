#pragma once

#include <memory>
#include <string>

#include "calliper/model.hpp"

namespace calliper {

// Coordinate-to-embedding HTTP service over an immutable model snapshot.
//   GET  /health -> {"status":"ok","dim":d,"version":...}
//   POST /embed  {"coords":[[x,y],...]} -> {"embeddings":[[...],...]}
// Malformed bodies get a 400 with {"error": ...}.
class EmbeddingServer {
public:
    explicit EmbeddingServer(CalliperModel model);
    ~EmbeddingServer();

    EmbeddingServer(const EmbeddingServer&) = delete;
    EmbeddingServer& operator=(const EmbeddingServer&) = delete;

    // Blocks until stop(); false if the port could not be bound.
    bool serve(const std::string& host, int port);

    // Binds an ephemeral port and serves from a background thread; returns
    // the port. Used by tests and cross-interface checks.
    int start_background(const std::string& host);

    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace calliper
