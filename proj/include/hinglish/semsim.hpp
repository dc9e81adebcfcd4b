#pragma once

// Embedding-based similarity: greedy-matching BERTScore and sentence cosine.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinglish/error.hpp"
#include "hinglish/http_util.hpp"
#include "hinglish/normalize.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("vector dimensions differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Scales `v` to unit length; throws on a zero vector.
inline Vector unit(Vector v) {
    double norm = std::sqrt(dot(v, v));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("cannot normalize a zero or non-finite vector");
    for (auto& x : v) x /= norm;
    return v;
}

/// Produces unit-norm embeddings. Implementations must be deterministic.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// One vector per whitespace token of `input`.
    virtual std::vector<Vector> embed_tokens(std::string_view input) = 0;
    virtual Vector embed_sentence(std::string_view input) = 0;
    virtual std::size_t dimension() const = 0;
};

/// Mean of token vectors, renormalized.
inline Vector mean_unit(std::span<const Vector> vectors) {
    if (vectors.empty()) throw ValidationError("cannot embed empty text");
    Vector sum(vectors.front().size(), 0.0);
    for (const auto& v : vectors) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    return unit(std::move(sum));
}

/// Test provider: each lowercased token maps to a hash-seeded sign vector
/// (components ±1/√d). For d a power of 4 every component is exact, so a
/// token's self-similarity is exactly 1. Sentences embed as the normalized
/// token mean.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dimension = 256, std::uint64_t seed = 0)
        : dimension_(dimension), seed_(seed) {
        if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
    }

    std::vector<Vector> embed_tokens(std::string_view input) override {
        std::vector<Vector> out;
        for (auto tok : text::split_whitespace(input)) out.push_back(token_vector(tok));
        return out;
    }

    Vector embed_sentence(std::string_view input) override { return mean_unit(embed_tokens(input)); }

    std::size_t dimension() const override { return dimension_; }

    Vector token_vector(std::string_view token) const {
        auto lowered = text::to_lower_ascii(token);
        std::uint64_t state = 0xcbf29ce484222325ULL ^ seed_;
        for (unsigned char c : lowered) state = (state ^ c) * 0x100000001b3ULL;
        const double magnitude = 1.0 / std::sqrt(static_cast<double>(dimension_));
        Vector v(dimension_);
        for (auto& x : v) {
            // splitmix64
            state += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = state;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z ^= z >> 31;
            x = (z >> 63) ? magnitude : -magnitude;
        }
        return v;
    }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Test provider backed by an explicit token → vector table.
class FixedEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit FixedEmbeddingProvider(std::map<std::string, Vector> table) {
        if (table.empty()) throw ValidationError("fixed provider needs at least one vector");
        dimension_ = table.begin()->second.size();
        for (auto& [tok, vec] : table) {
            if (vec.size() != dimension_) throw ValidationError("inconsistent vector dimensions");
            table_.emplace(tok, unit(std::move(vec)));
        }
    }

    std::vector<Vector> embed_tokens(std::string_view input) override {
        std::vector<Vector> out;
        for (auto tok : text::split_whitespace(input)) {
            auto it = table_.find(std::string(tok));
            if (it == table_.end()) throw NotFoundError("no vector for token '" + std::string(tok) + "'");
            out.push_back(it->second);
        }
        return out;
    }

    Vector embed_sentence(std::string_view input) override {
        auto it = table_.find(std::string(text::trim(input)));
        if (it != table_.end()) return it->second;
        return mean_unit(embed_tokens(input));
    }

    std::size_t dimension() const override { return dimension_; }

private:
    std::map<std::string, Vector> table_;
    std::size_t dimension_ = 0;
};

struct HttpEmbeddingOptions {
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds timeout{30000};
};

/// Client for an encoder served as POST /embed {"texts": [...]} →
/// {"vectors": [[...], ...]}. Batches run concurrently, at most
/// `max_in_flight` outstanding requests per provider.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(std::string url, HttpEmbeddingOptions options = {})
        : url_(http::parse_url(url)), options_(options), slots_(clamp_slots(options.max_in_flight)) {
        if (options_.batch_size == 0) throw ValidationError("batch_size must be positive");
    }

    std::vector<Vector> embed_tokens(std::string_view input) override {
        std::vector<std::string> tokens;
        for (auto tok : text::split_whitespace(input)) tokens.emplace_back(tok);
        return embed_texts(tokens);
    }

    Vector embed_sentence(std::string_view input) override {
        if (text::trim(input).empty()) throw ValidationError("cannot embed empty text");
        return embed_texts({std::string(input)}).front();
    }

    std::size_t dimension() const override { return dimension_; }

    std::vector<Vector> embed_texts(const std::vector<std::string>& texts) {
        std::vector<std::future<std::vector<Vector>>> pending;
        for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
            auto end = std::min(texts.size(), start + options_.batch_size);
            std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                           texts.begin() + static_cast<std::ptrdiff_t>(end));
            pending.push_back(std::async(std::launch::async, [this, b = std::move(batch)] { return post(b); }));
        }
        std::vector<Vector> out;
        out.reserve(texts.size());
        for (auto& f : pending) {
            for (auto& v : f.get()) out.push_back(std::move(v));
        }
        return out;
    }

private:
    static constexpr std::ptrdiff_t kMaxSlots = 256;

    static std::ptrdiff_t clamp_slots(std::size_t k) {
        if (k == 0) throw ValidationError("max_in_flight must be positive");
        return std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(k), kMaxSlots);
    }

    std::vector<Vector> post(const std::vector<std::string>& batch) {
        slots_.acquire();
        struct Release {
            std::counting_semaphore<kMaxSlots>& s;
            ~Release() { s.release(); }
        } release{slots_};

        auto client = http::make_client(url_, options_.timeout);
        nlohmann::json body = {{"texts", batch}};
        auto res = client->Post(url_.path, body.dump(), "application/json");
        if (!res) throw EndpointError(0, "embedding request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) {
            throw EndpointError(res->status, "embedding endpoint returned HTTP " + std::to_string(res->status));
        }
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("embedding reply is not JSON: ") + e.what());
        }
        if (!reply.contains("vectors") || !reply["vectors"].is_array() || reply["vectors"].size() != batch.size()) {
            throw ParseError("embedding reply must carry one vector per input text");
        }
        std::vector<Vector> out;
        for (const auto& v : reply["vectors"]) {
            auto vec = unit(v.get<Vector>());
            std::size_t expected = dimension_.load();
            if (expected == 0) dimension_.compare_exchange_strong(expected, vec.size());
            if (dimension_.load() != vec.size()) throw ParseError("embedding dimension changed between replies");
            out.push_back(std::move(vec));
        }
        return out;
    }

    http::Url url_;
    HttpEmbeddingOptions options_;
    std::counting_semaphore<kMaxSlots> slots_;
    std::atomic<std::size_t> dimension_{0};
};

struct SimilarityReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double cosine = 0.0;
};

namespace detail {

inline std::string prepare(std::string_view input, const VariantTable* table) {
    if (text::trim(input).empty()) throw ValidationError("similarity inputs must be non-empty");
    if (!table) return std::string(input);
    return clean_and_normalize(input, CleaningConfig{}, *table);
}

inline double greedy_mean(std::span<const Vector> from, std::span<const Vector> to) {
    double sum = 0.0;
    for (const auto& a : from) {
        double best = -1.0;
        for (const auto& b : to) best = std::max(best, dot(a, b));
        sum += best;
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace detail

/// Greedy-matching precision/recall/F1 without IDF weighting. When `table`
/// is given both texts are cleaned and normalized before embedding.
inline SimilarityReport bertscore(std::string_view candidate, std::string_view reference,
                                  EmbeddingProvider& provider, const VariantTable* table = nullptr) {
    auto cand = provider.embed_tokens(detail::prepare(candidate, table));
    auto ref = provider.embed_tokens(detail::prepare(reference, table));
    if (cand.empty() || ref.empty()) throw ValidationError("similarity inputs must contain tokens");
    SimilarityReport r;
    r.precision = detail::greedy_mean(cand, ref);
    r.recall = detail::greedy_mean(ref, cand);
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

inline double cosine_similarity(std::string_view a, std::string_view b, EmbeddingProvider& provider,
                                const VariantTable* table = nullptr) {
    auto va = provider.embed_sentence(detail::prepare(a, table));
    auto vb = provider.embed_sentence(detail::prepare(b, table));
    return std::clamp(dot(va, vb), -1.0, 1.0);
}

inline SimilarityReport score_pair(std::string_view candidate, std::string_view reference,
                                   EmbeddingProvider& provider, const VariantTable* table = nullptr) {
    auto r = bertscore(candidate, reference, provider, table);
    r.cosine = cosine_similarity(candidate, reference, provider, table);
    return r;
}

}  // namespace hinglish
