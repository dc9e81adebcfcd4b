#pragma once

// Code-mixing and surface metrics over tagged tokens and response text.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hinglish/corpus.hpp"
#include "hinglish/error.hpp"
#include "hinglish/langid.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

struct LangCounts {
    std::size_t hindi = 0;
    std::size_t english = 0;
    std::size_t other = 0;

    std::size_t total() const noexcept { return hindi + english + other; }
    std::size_t tagged() const noexcept { return hindi + english; }
};

inline LangCounts count_langs(std::span<const Lang> tags) noexcept {
    LangCounts c;
    for (Lang t : tags) {
        if (t == Lang::HI) ++c.hindi;
        else if (t == Lang::EN) ++c.english;
        else ++c.other;
    }
    return c;
}

inline std::vector<Lang> tags_of(std::span<const TaggedToken> tokens) {
    std::vector<Lang> tags;
    tags.reserve(tokens.size());
    for (const auto& t : tokens) tags.push_back(t.tag);
    return tags;
}

/// Utterance-level Code-Mixing Index, 1 − w_max / (N − U). Zero when there
/// are no language-tagged tokens.
inline double compute_cmi(std::span<const Lang> tags) noexcept {
    auto c = count_langs(tags);
    if (c.tagged() == 0) return 0.0;
    auto w_max = std::max(c.hindi, c.english);
    return 1.0 - static_cast<double>(w_max) / static_cast<double>(c.tagged());
}

inline double compute_cmi(std::span<const TaggedToken> tokens) { return compute_cmi(tags_of(tokens)); }

/// Fraction of adjacent language-tagged pairs (OTHER removed) that switch.
inline double compute_switch_index(std::span<const Lang> tags) noexcept {
    std::size_t tagged = 0;
    std::size_t switches = 0;
    Lang prev = Lang::OTHER;
    for (Lang t : tags) {
        if (t == Lang::OTHER) continue;
        if (tagged > 0 && t != prev) ++switches;
        prev = t;
        ++tagged;
    }
    if (tagged < 2) return 0.0;
    return static_cast<double>(switches) / static_cast<double>(tagged - 1);
}

inline double compute_switch_index(std::span<const TaggedToken> tokens) {
    return compute_switch_index(tags_of(tokens));
}

/// 1 − distinct/total over whitespace n-grams.
inline double compute_repetition(std::string_view input, std::size_t n = 3) {
    if (n == 0) throw ValidationError("n-gram size must be positive");
    auto tokens = text::split_whitespace(input);
    if (tokens.size() < n) return 0.0;
    std::size_t total = tokens.size() - n + 1;
    if (total <= 1) return 0.0;
    std::set<std::vector<std::string_view>> distinct;
    for (std::size_t i = 0; i < total; ++i) {
        distinct.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    return 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(total);
}

struct MetricReport {
    double cmi = 0.0;
    double switch_index = 0.0;
    double hindi_fraction = 0.0;
    double repetition = 0.0;
    double length_words = 0.0;  // integral for a single response, a mean once aggregated
    std::uint64_t n_tokens = 0;
    std::uint64_t n_other = 0;

    double english_fraction() const noexcept {
        return n_tokens > n_other ? 1.0 - hindi_fraction : 0.0;
    }
};

inline MetricReport measure_response(std::string_view response, const Lexicons& lex,
                                     std::size_t repetition_n = 3) {
    auto tokens = tag_tokens(response, lex);
    auto tags = tags_of(tokens);
    auto counts = count_langs(tags);
    MetricReport r;
    r.cmi = compute_cmi(tags);
    r.switch_index = compute_switch_index(tags);
    r.hindi_fraction = counts.tagged() ? static_cast<double>(counts.hindi) / counts.tagged() : 0.0;
    r.repetition = compute_repetition(response, repetition_n);
    r.length_words = static_cast<double>(text::count_words(response));
    r.n_tokens = counts.total();
    r.n_other = counts.other;
    return r;
}

/// Unweighted mean of the fractional fields and length; counts are summed.
inline MetricReport aggregate_corpus(std::span<const MetricReport> reports) {
    if (reports.empty()) throw ValidationError("cannot aggregate an empty report list");
    MetricReport out;
    for (const auto& r : reports) {
        out.cmi += r.cmi;
        out.switch_index += r.switch_index;
        out.hindi_fraction += r.hindi_fraction;
        out.repetition += r.repetition;
        out.length_words += r.length_words;
        out.n_tokens += r.n_tokens;
        out.n_other += r.n_other;
    }
    auto n = static_cast<double>(reports.size());
    out.cmi /= n;
    out.switch_index /= n;
    out.hindi_fraction /= n;
    out.repetition /= n;
    out.length_words /= n;
    return out;
}

inline double round_to(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["cmi"] = r.cmi;
    j["switch_index"] = r.switch_index;
    j["hindi_fraction"] = r.hindi_fraction;
    j["english_fraction"] = r.english_fraction();
    j["repetition"] = r.repetition;
    j["length_words"] = round_to(r.length_words, 1);
    j["n_tokens"] = r.n_tokens;
    j["n_other"] = r.n_other;
    return j;
}

/// Per-response reports for every assistant turn in `dialogues`.
inline std::vector<MetricReport> measure_assistant_turns(std::span<const Dialogue> dialogues,
                                                         const Lexicons& lex,
                                                         std::size_t repetition_n = 3) {
    std::vector<MetricReport> out;
    for (const auto& d : dialogues) {
        for (const auto& t : d.turns()) {
            if (t.role() == Role::assistant) out.push_back(measure_response(t.text(), lex, repetition_n));
        }
    }
    return out;
}

/// Mean CMI over all turns of one dialogue.
inline double dialogue_mean_cmi(std::span<const Turn> turns, const Lexicons& lex) {
    if (turns.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& t : turns) sum += compute_cmi(tag_tokens(t.text(), lex));
    return sum / static_cast<double>(turns.size());
}

}  // namespace hinglish
