#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "calliper/text_provider.hpp"
#include "httplib.h"
#include "json.hpp"

namespace calliper {

namespace {

// Talks to a sentence-encoder service and memoizes every vector, optionally
// persisting them to an NDJSON cache that itself loads as a file provider.
class HttpProvider : public TextEmbeddingProvider {
public:
    HttpProvider(std::string endpoint, std::size_t dim, HttpClientOptions options)
        : endpoint_(std::move(endpoint)), dim_(dim), options_(std::move(options)) {
        if (dim_ == 0) throw ConfigInvalidError("http_embedding_client: dim must be positive");
        if (!options_.cache_path.empty() && std::filesystem::exists(options_.cache_path)) {
            auto provider = load_embedding_file(options_.cache_path);
            if (provider->dim() != dim_) {
                throw ProviderFailure(ProviderErrorKind::DimensionMismatch,
                                      "cache file dimension " + std::to_string(provider->dim()) +
                                          " does not match declared " + std::to_string(dim_));
            }
            // Re-read the file into the local map; the provider interface
            // does not expose its index.
            warm_cache_from_file();
        }
    }

    std::size_t dim() const override { return dim_; }

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        std::lock_guard<std::mutex> lock(mutex_);
        // Cache misses, deduplicated in input order.
        std::vector<std::string> distinct;
        std::unordered_map<std::string, bool> seen;
        for (const auto& text : texts) {
            if (!cache_.count(text) && seen.emplace(text, true).second) {
                distinct.push_back(text);
            }
        }
        if (!distinct.empty()) {
            auto fetched = fetch(distinct);
            for (std::size_t i = 0; i < distinct.size(); ++i) {
                cache_.emplace(distinct[i], fetched[i]);
            }
            if (!options_.cache_path.empty()) {
                append_embedding_records(options_.cache_path, distinct, fetched);
            }
        }
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(cache_.at(text));
        return out;
    }

private:
    void warm_cache_from_file() {
        // The file was validated by load_embedding_file above; a plain
        // re-parse is enough here.
        std::ifstream in(options_.cache_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto rec = nlohmann::json::parse(line);
            std::vector<float> v;
            for (const auto& x : rec["embedding"]) v.push_back(x.get<float>());
            cache_.emplace(rec["text"].get<std::string>(), std::move(v));
        }
    }

    std::vector<std::vector<float>> fetch(const std::vector<std::string>& texts) {
        nlohmann::json body;
        body["texts"] = texts;
        const std::string payload = body.dump();

        std::string last_error;
        int backoff = options_.initial_backoff_ms;
        for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            httplib::Client client(endpoint_);
            client.set_read_timeout(30, 0);
            auto res = client.Post("/embed", payload, "application/json");
            if (!res) {
                last_error = "network error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "status " + std::to_string(res->status);
                continue;
            }
            return parse_response(res->body, texts.size());
        }
        const auto kind = last_error.rfind("status", 0) == 0 ? ProviderErrorKind::BadStatus
                                                             : ProviderErrorKind::Network;
        throw ProviderFailure(kind, "embed request to " + endpoint_ + " failed after " +
                                        std::to_string(options_.max_attempts) +
                                        " attempts: " + last_error);
    }

    std::vector<std::vector<float>> parse_response(const std::string& body, std::size_t expected) {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderFailure(ProviderErrorKind::Other,
                                  std::string("unparseable response: ") + e.what());
        }
        if (!parsed.is_object() || !parsed.contains("embeddings") ||
            !parsed["embeddings"].is_array() || parsed["embeddings"].size() != expected) {
            throw ProviderFailure(ProviderErrorKind::Other,
                                  "response missing embeddings for all texts");
        }
        std::vector<std::vector<float>> out;
        out.reserve(expected);
        for (const auto& arr : parsed["embeddings"]) {
            if (!arr.is_array() || arr.size() != dim_) {
                throw ProviderFailure(ProviderErrorKind::DimensionMismatch,
                                      "server returned dimension " + std::to_string(arr.size()) +
                                          ", expected " + std::to_string(dim_));
            }
            std::vector<float> v;
            v.reserve(dim_);
            for (const auto& x : arr) v.push_back(x.get<float>());
            out.push_back(std::move(v));
        }
        return out;
    }

    std::string endpoint_;
    std::size_t dim_;
    HttpClientOptions options_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::vector<float>> cache_;
};

}  // namespace

std::unique_ptr<TextEmbeddingProvider> http_embedding_client(const std::string& endpoint,
                                                             std::size_t dim,
                                                             HttpClientOptions options) {
    return std::make_unique<HttpProvider>(endpoint, dim, std::move(options));
}

}  // namespace calliper
