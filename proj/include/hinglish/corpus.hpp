#pragma once

// Corpus data model: turns, dialogues, JSONL persistence, deterministic
// train/validation/test splitting and chat-format export.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Lowercase hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0F]);
    }
    return out;
}

enum class Role { user, assistant };

inline std::string_view to_string(Role r) noexcept {
    return r == Role::user ? "user" : "assistant";
}

inline std::optional<Role> parse_role(std::string_view s) noexcept {
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    return std::nullopt;
}

class Turn {
public:
    /// Throws ValidationError when `text` is blank.
    Turn(Role role, std::string text) : role_(role), text_(std::move(text)) {
        if (text::trim(text_).empty()) throw ValidationError("turn text must be non-empty");
        word_count_ = text::count_words(text_);
    }

    Role role() const noexcept { return role_; }
    const std::string& text() const noexcept { return text_; }
    std::size_t word_count() const noexcept { return word_count_; }

    friend bool operator==(const Turn&, const Turn&) = default;

private:
    Role role_;
    std::string text_;
    std::size_t word_count_ = 0;
};

using Meta = std::map<std::string, std::string>;

/// A validated multi-turn conversation. Immutable; the id is a digest of
/// topic, persona and turn texts.
class Dialogue {
public:
    static constexpr std::string_view kAlternationRule = "turns must alternate starting with user";
    static constexpr std::string_view kEvenRule = "turns must number at least 2 and be even";

    Dialogue(std::string topic, std::optional<std::string> persona, std::vector<Turn> turns,
             Meta meta = {})
        : topic_(std::move(topic)),
          persona_(std::move(persona)),
          turns_(std::move(turns)),
          meta_(std::move(meta)) {
        if (turns_.size() < 2 || turns_.size() % 2 != 0) throw ValidationError(std::string(kEvenRule));
        for (std::size_t i = 0; i < turns_.size(); ++i) {
            Role expected = i % 2 == 0 ? Role::user : Role::assistant;
            if (turns_[i].role() != expected) throw ValidationError(std::string(kAlternationRule));
        }
        id_ = compute_id(topic_, persona_, turns_);
    }

    static std::string compute_id(std::string_view topic, const std::optional<std::string>& persona,
                                  std::span<const Turn> turns) {
        constexpr char kUnit = '\x1f';
        std::string canon(topic);
        canon.push_back(kUnit);
        canon.append(persona ? "P" + *persona : std::string("N"));
        for (const auto& t : turns) {
            canon.push_back(kUnit);
            canon.append(t.text());
        }
        return sha256_hex(canon);
    }

    const std::string& id() const noexcept { return id_; }
    const std::string& topic() const noexcept { return topic_; }
    const std::optional<std::string>& persona() const noexcept { return persona_; }
    const std::vector<Turn>& turns() const noexcept { return turns_; }
    const Meta& meta() const noexcept { return meta_; }

    std::size_t word_count() const noexcept {
        std::size_t n = 0;
        for (const auto& t : turns_) n += t.word_count();
        return n;
    }

    /// Same content with a different meta map (id unchanged).
    Dialogue with_meta(Meta meta) const {
        Dialogue copy = *this;
        copy.meta_ = std::move(meta);
        return copy;
    }

    friend bool operator==(const Dialogue&, const Dialogue&) = default;

private:
    std::string id_;
    std::string topic_;
    std::optional<std::string> persona_;
    std::vector<Turn> turns_;
    Meta meta_;
};

inline ordered_json to_json(const Dialogue& d) {
    ordered_json j;
    j["id"] = d.id();
    j["topic"] = d.topic();
    j["persona"] = d.persona() ? ordered_json(*d.persona()) : ordered_json(nullptr);
    ordered_json turns = ordered_json::array();
    for (const auto& t : d.turns()) turns.push_back({{"role", to_string(t.role())}, {"text", t.text()}});
    j["turns"] = std::move(turns);
    j["meta"] = ordered_json::object();
    for (const auto& [k, v] : d.meta()) j["meta"][k] = v;
    return j;
}

/// Builds a Dialogue from a corpus record. When `check_id` is set, a stored
/// id that disagrees with the content digest is rejected.
inline Dialogue dialogue_from_json(const json& j, bool check_id = true) {
    if (!j.is_object()) throw ParseError("record is not a JSON object");
    if (!j.contains("topic") || !j["topic"].is_string()) throw ParseError("missing string field 'topic'");
    if (!j.contains("turns") || !j["turns"].is_array()) throw ParseError("missing array field 'turns'");
    std::optional<std::string> persona;
    if (j.contains("persona") && !j["persona"].is_null()) {
        if (!j["persona"].is_string()) throw ParseError("field 'persona' must be a string or null");
        persona = j["persona"].get<std::string>();
    }
    std::vector<Turn> turns;
    for (const auto& t : j["turns"]) {
        if (!t.is_object() || !t.contains("role") || !t.contains("text") || !t["role"].is_string() ||
            !t["text"].is_string()) {
            throw ParseError("turn must be an object with string 'role' and 'text'");
        }
        auto role = parse_role(t["role"].get<std::string>());
        if (!role) throw ValidationError("unknown role '" + t["role"].get<std::string>() + "'");
        turns.emplace_back(*role, t["text"].get<std::string>());
    }
    Meta meta;
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) throw ParseError("field 'meta' must be an object");
        for (const auto& [k, v] : j["meta"].items()) {
            if (!v.is_string()) throw ParseError("meta value for '" + k + "' must be a string");
            meta[k] = v.get<std::string>();
        }
    }
    Dialogue d(j["topic"].get<std::string>(), std::move(persona), std::move(turns), std::move(meta));
    if (check_id && j.contains("id")) {
        if (!j["id"].is_string()) throw ParseError("field 'id' must be a string");
        if (j["id"].get<std::string>() != d.id()) throw ValidationError("id does not match content digest");
    }
    return d;
}

struct LoadIssue {
    std::size_t line;  // 1-based
    std::string message;
};

struct LoadResult {
    std::vector<Dialogue> dialogues;
    std::vector<LoadIssue> errors;
};

/// Reads a JSONL corpus. Bad lines land in `errors`; blank lines are skipped.
inline LoadResult load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file '" + path + "'");
    LoadResult result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        try {
            result.dialogues.push_back(dialogue_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            result.errors.push_back({lineno, std::string("malformed JSON: ") + e.what()});
        } catch (const Error& e) {
            result.errors.push_back({lineno, e.what()});
        }
    }
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return result;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file '" + path + "'");
    return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace detail

inline void write_corpus(std::span<const Dialogue> dialogues, const std::string& path) {
    auto out = detail::open_for_write(path);
    for (const auto& d : dialogues) out << to_json(d).dump() << '\n';
    detail::finish_write(out, path);
}

/// Writes one {"messages": [...]} record per dialogue; returns the count.
inline std::size_t export_chat_format(std::span<const Dialogue> dialogues, const std::string& path) {
    auto out = detail::open_for_write(path);
    for (const auto& d : dialogues) {
        ordered_json messages = ordered_json::array();
        for (const auto& t : d.turns()) {
            messages.push_back({{"role", to_string(t.role())}, {"content", t.text()}});
        }
        ordered_json rec;
        rec["messages"] = std::move(messages);
        out << rec.dump() << '\n';
    }
    detail::finish_write(out, path);
    return dialogues.size();
}

inline std::uint64_t count_tokens(std::span<const Dialogue> dialogues) noexcept {
    std::uint64_t n = 0;
    for (const auto& d : dialogues) n += d.word_count();
    return n;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;

    double sum() const noexcept { return train + validation + test; }
};

struct SplitCounts {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

struct CorpusSplits {
    std::vector<Dialogue> train;
    std::vector<Dialogue> validation;
    std::vector<Dialogue> test;
};

struct CorpusManifest {
    SplitCounts counts;
    SplitRatios ratios;
    std::uint64_t token_total = 0;
    std::int64_t split_seed = 0;
};

inline void check_ratios(const SplitRatios& r) {
    if (r.train < 0 || r.validation < 0 || r.test < 0) throw ValidationError("split ratios must be non-negative");
    if (std::abs(r.sum() - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
}

/// ⌊n·ratio⌋ for validation and test; the remainder goes to train.
inline SplitCounts split_sizes(std::size_t n, const SplitRatios& r) {
    // The epsilon keeps products such as 30 * 0.1 from flooring one short.
    auto floor_of = [n](double ratio) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
    };
    SplitCounts c;
    c.validation = floor_of(r.validation);
    c.test = floor_of(r.test);
    c.train = n - c.validation - c.test;
    return c;
}

namespace detail {

inline void split_group(std::vector<const Dialogue*> group, const SplitRatios& ratios,
                        std::int64_t seed, CorpusSplits& out) {
    std::vector<std::pair<std::string, const Dialogue*>> keyed;
    keyed.reserve(group.size());
    for (const auto* d : group) {
        keyed.emplace_back(sha256_hex(d->id() + '\x1f' + std::to_string(seed)), d);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return to_json(*a.second).dump() < to_json(*b.second).dump();
    });
    auto sizes = split_sizes(keyed.size(), ratios);
    std::size_t i = 0;
    for (; i < sizes.train; ++i) out.train.push_back(*keyed[i].second);
    for (std::size_t k = 0; k < sizes.validation; ++k, ++i) out.validation.push_back(*keyed[i].second);
    for (std::size_t k = 0; k < sizes.test; ++k, ++i) out.test.push_back(*keyed[i].second);
}

}  // namespace detail

/// Partitions `dialogues` by a seeded digest of each id. Membership and order
/// within each split are independent of input order. With `stratify_by_topic`
/// the sizing rule is applied to each topic separately.
inline CorpusSplits split_corpus(std::span<const Dialogue> dialogues, const SplitRatios& ratios,
                                 std::int64_t seed, bool stratify_by_topic = false) {
    if (dialogues.empty()) throw ValidationError("cannot split an empty corpus");
    check_ratios(ratios);
    CorpusSplits out;
    if (!stratify_by_topic) {
        std::vector<const Dialogue*> all;
        for (const auto& d : dialogues) all.push_back(&d);
        detail::split_group(std::move(all), ratios, seed, out);
        return out;
    }
    std::map<std::string, std::vector<const Dialogue*>> by_topic;
    for (const auto& d : dialogues) by_topic[d.topic()].push_back(&d);
    for (auto& [topic, group] : by_topic) detail::split_group(std::move(group), ratios, seed, out);
    return out;
}

inline CorpusManifest make_manifest(const CorpusSplits& s, const SplitRatios& ratios, std::int64_t seed) {
    CorpusManifest m;
    m.counts = {s.train.size(), s.validation.size(), s.test.size()};
    m.ratios = ratios;
    m.token_total = count_tokens(s.train) + count_tokens(s.validation) + count_tokens(s.test);
    m.split_seed = seed;
    return m;
}

inline ordered_json to_json(const CorpusManifest& m) {
    ordered_json j;
    j["counts"] = {{"train", m.counts.train}, {"validation", m.counts.validation}, {"test", m.counts.test}};
    j["ratios"] = {{"train", m.ratios.train}, {"validation", m.ratios.validation}, {"test", m.ratios.test}};
    j["token_total"] = m.token_total;
    j["split_seed"] = m.split_seed;
    return j;
}

}  // namespace hinglish
