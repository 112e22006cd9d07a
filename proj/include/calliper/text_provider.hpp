#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "calliper/errors.hpp"

namespace calliper {

// Source of fixed-dimension text embeddings. The text encoder itself always
// lives outside this process (it is frozen during training, so its outputs
// are constants); implementations only look vectors up, derive them
// deterministically, or fetch them over HTTP.
class TextEmbeddingProvider {
public:
    virtual ~TextEmbeddingProvider() = default;

    virtual std::size_t dim() const = 0;

    // One vector per text, in input order. Same text, same vector, always.
    virtual std::vector<std::vector<float>> embed_texts(
        const std::vector<std::string>& texts) = 0;
};

// Newline-delimited JSON store: {"text": "...", "embedding": [...]} per line.
// The first record fixes the dimension. Duplicate texts must carry identical
// vectors. Unknown texts fail at embed time with MissingEntry.
std::unique_ptr<TextEmbeddingProvider> load_embedding_file(const std::filesystem::path& path);

// Appends records to an embedding file (creates it if absent), holding an
// exclusive flock over the write.
void append_embedding_records(const std::filesystem::path& path,
                              const std::vector<std::string>& texts,
                              const std::vector<std::vector<float>>& vectors);

// Deterministic stand-in for a real sentence encoder: an L2-normalized
// Gaussian draw seeded by FNV-1a(text) mixed with `seed`. Bit-identical
// across runs and platforms.
std::unique_ptr<TextEmbeddingProvider> synthetic_embedder(std::size_t dim, std::uint64_t seed);

struct HttpClientOptions {
    int max_attempts = 3;
    int initial_backoff_ms = 100;  // doubles per retry
    std::filesystem::path cache_path;  // NDJSON cache, reusable as a provider file; empty = off
};

// Client for a service implementing POST /embed {"texts": [...]} ->
// {"embeddings": [[...], ...]}. Validates the dimension of every vector.
std::unique_ptr<TextEmbeddingProvider> http_embedding_client(const std::string& endpoint,
                                                             std::size_t dim,
                                                             HttpClientOptions options = {});

}  // namespace calliper
