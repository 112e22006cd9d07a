#include "calliper/text_provider.hpp"

#include <sys/file.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "calliper/rng.hpp"
#include "json.hpp"

namespace calliper {

namespace {

class FileBackedProvider : public TextEmbeddingProvider {
public:
    FileBackedProvider(std::size_t dim, std::unordered_map<std::string, std::vector<float>> index)
        : dim_(dim), index_(std::move(index)) {}

    std::size_t dim() const override { return dim_; }

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) {
            auto it = index_.find(text);
            if (it == index_.end()) {
                throw ProviderFailure(ProviderErrorKind::MissingEntry,
                                      "no stored embedding for text: " + text);
            }
            out.push_back(it->second);
        }
        return out;
    }

private:
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<float>> index_;
};

std::vector<float> parse_embedding(const nlohmann::json& arr, std::size_t line) {
    std::vector<float> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw ParseError(line, "embedding component is not a number");
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw ParseError(line, "embedding component is not finite");
        v.push_back(static_cast<float>(d));
    }
    return v;
}

class SyntheticProvider : public TextEmbeddingProvider {
public:
    SyntheticProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
        if (dim_ < 2) throw ConfigInvalidError("synthetic_embedder: dim must be >= 2");
    }

    std::size_t dim() const override { return dim_; }

    std::vector<std::vector<float>> embed_texts(const std::vector<std::string>& texts) override {
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(embed_one(text));
        return out;
    }

private:
    std::vector<float> embed_one(const std::string& text) const {
        Rng rng(fnv1a64(text) ^ splitmix64(seed_));
        std::vector<float> v(dim_);
        double ss = 0.0;
        for (auto& x : v) {
            const double g = rng.gaussian();
            x = static_cast<float>(g);
            ss += g * g;
        }
        // A Gaussian draw of dim >= 2 is zero with probability zero, and the
        // mapping must stay total, so re-draw the first component if needed.
        if (ss == 0.0) {
            v[0] = 1.0f;
            ss = 1.0;
        }
        const float inv = static_cast<float>(1.0 / std::sqrt(ss));
        for (auto& x : v) x *= inv;
        return v;
    }

    std::size_t dim_;
    std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<TextEmbeddingProvider> load_embedding_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding file: " + path.string());
    std::unordered_map<std::string, std::vector<float>> index;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("text") || !rec.contains("embedding") ||
            !rec["text"].is_string() || !rec["embedding"].is_array()) {
            throw ParseError(line_no, "expected {\"text\": string, \"embedding\": [number]}");
        }
        std::string text = rec["text"].get<std::string>();
        std::vector<float> vec = parse_embedding(rec["embedding"], line_no);
        if (dim == 0) {
            if (vec.empty()) throw ParseError(line_no, "empty embedding");
            dim = vec.size();
        } else if (vec.size() != dim) {
            throw DimensionMismatchError(line_no, "embedding has dimension " +
                                                      std::to_string(vec.size()) + ", store uses " +
                                                      std::to_string(dim));
        }
        auto it = index.find(text);
        if (it != index.end()) {
            if (it->second != vec) throw DuplicateConflictError(text);
        } else {
            index.emplace(std::move(text), std::move(vec));
        }
    }
    if (dim == 0) throw EmptyFileError("embedding file has no records: " + path.string());
    return std::make_unique<FileBackedProvider>(dim, std::move(index));
}

void append_embedding_records(const std::filesystem::path& path,
                              const std::vector<std::string>& texts,
                              const std::vector<std::vector<float>>& vectors) {
    if (texts.size() != vectors.size()) {
        throw ShapeMismatchError("append_embedding_records: texts/vectors size mismatch");
    }
    std::string payload;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        nlohmann::json rec;
        rec["text"] = texts[i];
        rec["embedding"] = vectors[i];
        payload += rec.dump();
        payload += '\n';
    }
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (!f) throw Error("cannot open embedding cache for append: " + path.string());
    flock(fileno(f), LOCK_EX);
    std::fwrite(payload.data(), 1, payload.size(), f);
    std::fflush(f);
    flock(fileno(f), LOCK_UN);
    std::fclose(f);
}

std::unique_ptr<TextEmbeddingProvider> synthetic_embedder(std::size_t dim, std::uint64_t seed) {
    return std::make_unique<SyntheticProvider>(dim, seed);
}

}  // namespace calliper
