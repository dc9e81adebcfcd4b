#pragma once

// Lexicon-based token language tagging over romanized Hindi-English text.

#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

enum class Lang { HI, EN, OTHER };

inline std::string_view to_string(Lang l) noexcept {
    switch (l) {
        case Lang::HI: return "HI";
        case Lang::EN: return "EN";
        default: return "OTHER";
    }
}

struct TaggedToken {
    std::string text;
    Lang tag;
    std::size_t position;
};

enum class Priority { hindi_wins, english_wins };

inline std::string_view to_string(Priority p) noexcept {
    return p == Priority::hindi_wins ? "hindi_wins" : "english_wins";
}

class Lexicons {
public:
    using WordSet = std::unordered_set<std::string>;

    /// Lowercases both sets; throws ValidationError if either is empty.
    Lexicons(const WordSet& hindi, const WordSet& english, Priority priority = Priority::hindi_wins)
        : priority_(priority) {
        for (const auto& w : hindi) hindi_.insert(text::to_lower_ascii(w));
        for (const auto& w : english) english_.insert(text::to_lower_ascii(w));
        if (hindi_.empty() || english_.empty()) throw ValidationError("empty lexicon");
    }

    bool is_hindi(std::string_view lowered) const { return hindi_.contains(std::string(lowered)); }
    bool is_english(std::string_view lowered) const { return english_.contains(std::string(lowered)); }
    Priority priority() const noexcept { return priority_; }
    const WordSet& hindi() const noexcept { return hindi_; }
    const WordSet& english() const noexcept { return english_; }

private:
    WordSet hindi_;
    WordSet english_;
    Priority priority_;
};

/// One lowercased word per line; '#' lines and blanks are ignored.
inline Lexicons::WordSet read_word_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read lexicon '" + path + "'");
    Lexicons::WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = text::trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.insert(text::to_lower_ascii(w));
    }
    if (words.empty()) throw ValidationError("empty lexicon: '" + path + "'");
    return words;
}

inline Lexicons load_lexicons(const std::string& hindi_path, const std::string& english_path,
                              Priority priority = Priority::hindi_wins) {
    return Lexicons(read_word_list(hindi_path), read_word_list(english_path), priority);
}

namespace detail {

inline bool is_numeric(std::string_view core) {
    bool digit = false;
    for (char c : core) {
        if (c >= '0' && c <= '9') {
            digit = true;
        } else if (c != '.' && c != ',' && c != ':' && c != '/' && c != '-' && c != '%') {
            return false;
        }
    }
    return digit;
}

inline bool is_artifact(std::string_view token, std::string_view core) {
    return token.find("://") != std::string_view::npos || core.starts_with("www.") ||
           token.starts_with('@') || token.starts_with('#');
}

}  // namespace detail

inline Lang tag_word(std::string_view token, const Lexicons& lex) {
    auto split = text::split_edge_punct(token);
    if (split.core.empty() || detail::is_numeric(split.core) || detail::is_artifact(token, split.core)) {
        return Lang::OTHER;
    }
    auto lowered = text::to_lower_ascii(split.core);
    bool hi = lex.is_hindi(lowered);
    bool en = lex.is_english(lowered);
    if (hi && en) return lex.priority() == Priority::hindi_wins ? Lang::HI : Lang::EN;
    if (hi) return Lang::HI;
    if (en) return Lang::EN;
    return Lang::OTHER;
}

/// Tags every whitespace token of `input`, in order.
inline std::vector<TaggedToken> tag_tokens(std::string_view input, const Lexicons& lex) {
    std::vector<TaggedToken> out;
    auto tokens = text::split_whitespace(input);
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out.push_back({std::string(tokens[i]), tag_word(tokens[i], lex), i});
    }
    return out;
}

}  // namespace hinglish
