#pragma once

// Selective spelling normalization for romanized Hindi and cleanup of
// generation noise (emoji, punctuation runs, control characters).

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

/// Lowercased variant → canonical mapping. Construction rejects chains,
/// so applying the table is idempotent.
class VariantTable {
public:
    VariantTable() = default;

    /// Throws ValidationError on conflicting duplicates, chains, or entries
    /// that are not single punctuation-free tokens.
    explicit VariantTable(const std::vector<std::pair<std::string, std::string>>& entries,
                          std::string source = {})
        : source_(std::move(source)) {
        for (const auto& [raw_variant, raw_canonical] : entries) {
            auto variant = text::to_lower_ascii(raw_variant);
            auto canonical = text::to_lower_ascii(raw_canonical);
            check_token(variant);
            check_token(canonical);
            auto [it, inserted] = entries_.emplace(variant, canonical);
            if (!inserted && it->second != canonical) {
                throw ValidationError("conflicting entries for '" + variant + "': '" + it->second +
                                      "' and '" + canonical + "'");
            }
        }
        for (const auto& [variant, canonical] : entries_) {
            auto next = entries_.find(canonical);
            if (next != entries_.end() && next->second != canonical) {
                throw ValidationError("chain detected: '" + variant + "' -> '" + canonical + "' and '" +
                                      canonical + "' -> '" + next->second + "'");
            }
        }
    }

    std::optional<std::string_view> lookup(std::string_view lowered) const {
        auto it = entries_.find(std::string(lowered));
        if (it == entries_.end()) return std::nullopt;
        return std::string_view(it->second);
    }

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    const std::string& source() const noexcept { return source_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    static void check_token(const std::string& tok) {
        if (tok.empty()) throw ValidationError("empty token in variant table");
        for (char c : tok) {
            if (text::is_space(c)) throw ValidationError("token '" + tok + "' contains whitespace");
        }
        auto split = text::split_edge_punct(tok);
        if (split.core != tok) throw ValidationError("token '" + tok + "' has leading or trailing punctuation");
    }

    std::map<std::string, std::string> entries_;
    std::string source_;
};

/// Reads a `variant<TAB>canonical` file; '#' starts a comment line.
inline VariantTable load_variant_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read variant table '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto tab = trimmed.find('\t');
        if (tab == std::string_view::npos || trimmed.find('\t', tab + 1) != std::string_view::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected variant<TAB>canonical");
        }
        entries.emplace_back(std::string(text::trim(trimmed.substr(0, tab))),
                             std::string(text::trim(trimmed.substr(tab + 1))));
    }
    try {
        return VariantTable(entries, path);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

/// Replaces every token whose punctuation-stripped, lowercased core is a
/// table key. Whitespace and edge punctuation are preserved byte-for-byte.
inline std::string normalize_text(std::string_view input, const VariantTable& table) {
    std::string out;
    out.reserve(input.size());
    std::size_t i = 0;
    while (i < input.size()) {
        if (text::is_space(input[i])) {
            out.push_back(input[i++]);
            continue;
        }
        std::size_t start = i;
        while (i < input.size() && !text::is_space(input[i])) ++i;
        auto token = input.substr(start, i - start);
        auto split = text::split_edge_punct(token);
        auto canonical = split.core.empty() ? std::nullopt : table.lookup(text::to_lower_ascii(split.core));
        if (canonical) {
            out.append(split.prefix);
            out.append(*canonical);
            out.append(split.suffix);
        } else {
            out.append(token);
        }
    }
    return out;
}

struct CleaningConfig {
    std::size_t collapse_punct_runs_to = 1;
    bool strip_emoji = true;
    bool strip_control_chars = true;
    bool collapse_whitespace = true;

    void validate() const {
        if (collapse_punct_runs_to < 1) throw ValidationError("collapse_punct_runs_to must be >= 1");
    }
};

/// Extended-pictographic code points that render as emoji.
constexpr bool is_emoji(char32_t c) noexcept {
    return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) ||
           c == 0x231A || c == 0x231B || c == 0x2328 || c == 0x23CF || (c >= 0x23E9 && c <= 0x23F3) ||
           (c >= 0x23F8 && c <= 0x23FA) || (c >= 0x2194 && c <= 0x2199) || c == 0x21A9 ||
           c == 0x21AA || c == 0x24C2 || (c >= 0x25AA && c <= 0x25AB) || c == 0x25B6 || c == 0x25C0 ||
           (c >= 0x25FB && c <= 0x25FE) || (c >= 0x2934 && c <= 0x2935) || (c >= 0x2B05 && c <= 0x2B07) ||
           c == 0x2B1B || c == 0x2B1C || c == 0x2B50 || c == 0x2B55 || c == 0x3030 || c == 0x303D ||
           c == 0x3297 || c == 0x3299;
}

/// Joiners, variation selectors, keycap marks and tag characters that only
/// make sense inside an emoji sequence.
constexpr bool is_emoji_component(char32_t c) noexcept {
    return c == 0x200D || c == 0xFE0E || c == 0xFE0F || c == 0x20E3 || (c >= 0xE0001 && c <= 0xE007F);
}

inline std::string clean_text(std::string_view input, const CleaningConfig& config = {}) {
    config.validate();
    auto cps = text::decode_utf8(input);
    std::vector<char32_t> seq;
    seq.reserve(cps.size());
    for (const auto& cp : cps) seq.push_back(cp.value);

    if (config.strip_emoji) {
        std::vector<bool> drop(seq.size(), false);
        for (std::size_t k = 0; k < seq.size(); ++k) drop[k] = is_emoji(seq[k]);
        // Spread removal through any component chain touching an emoji.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t k = 0; k < seq.size(); ++k) {
                if (drop[k] || !is_emoji_component(seq[k])) continue;
                if ((k > 0 && drop[k - 1]) || (k + 1 < seq.size() && drop[k + 1])) {
                    drop[k] = true;
                    changed = true;
                }
            }
        }
        std::vector<char32_t> kept;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            if (!drop[k]) kept.push_back(seq[k]);
        }
        seq = std::move(kept);
    }

    if (config.strip_control_chars) {
        std::vector<char32_t> kept;
        for (char32_t c : seq) {
            if (c == U'\n') {
                kept.push_back(c);
            } else if (c == U'\t' || c == U'\r' || c == U'\v' || c == U'\f') {
                kept.push_back(U' ');
            } else if (c < 0x20 || (c >= 0x7F && c <= 0x9F) || c == 0xFEFF) {
                continue;
            } else {
                kept.push_back(c);
            }
        }
        seq = std::move(kept);
    }

    {
        std::vector<char32_t> kept;
        std::size_t run = 0;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            char32_t c = seq[k];
            run = (k > 0 && seq[k - 1] == c) ? run + 1 : 1;
            if (text::is_punct(c) && run > config.collapse_punct_runs_to) continue;
            kept.push_back(c);
        }
        seq = std::move(kept);
    }

    auto is_ws = [](char32_t c) { return c < 0x80 && text::is_space(static_cast<char>(c)); };
    std::string out;
    out.reserve(input.size());
    std::size_t k = 0;
    while (k < seq.size()) {
        if (config.collapse_whitespace && is_ws(seq[k])) {
            bool newline = false;
            while (k < seq.size() && is_ws(seq[k])) newline |= seq[k++] == U'\n';
            out.push_back(newline ? '\n' : ' ');
            continue;
        }
        text::append_utf8(out, seq[k++]);
    }
    return std::string(text::trim(out));
}

/// Cleaning followed by variant normalization, the fixed pipeline order.
inline std::string clean_and_normalize(std::string_view input, const CleaningConfig& config,
                                       const VariantTable& table) {
    return normalize_text(clean_text(input, config), table);
}

}  // namespace hinglish
