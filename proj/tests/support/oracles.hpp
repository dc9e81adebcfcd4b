#pragma once

// Brute-force reference computations. Deliberately written without the
// library's helpers so they check the implementation independently.

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hinglish/langid.hpp"

namespace oracle {

/// CMI by direct counting: 1 - (largest language count) / (non-OTHER count).
inline double cmi(const std::vector<hinglish::Lang>& tags) {
    std::map<int, int> per_lang;
    int n = 0;
    int u = 0;
    for (auto t : tags) {
        ++n;
        if (t == hinglish::Lang::OTHER) ++u;
        else per_lang[static_cast<int>(t)] += 1;
    }
    if (n == u) return 0.0;
    int w_max = 0;
    for (auto& [lang, c] : per_lang) w_max = c > w_max ? c : w_max;
    return 1.0 - double(w_max) / double(n - u);
}

/// Switch index: copy the language tokens out, then count unequal neighbours.
inline double switch_index(const std::vector<hinglish::Lang>& tags) {
    std::vector<hinglish::Lang> kept;
    for (auto t : tags) {
        if (t != hinglish::Lang::OTHER) kept.push_back(t);
    }
    if (kept.size() < 2) return 0.0;
    int switches = 0;
    for (std::size_t i = 1; i < kept.size(); ++i) switches += kept[i] != kept[i - 1] ? 1 : 0;
    return double(switches) / double(kept.size() - 1);
}

/// Repetition with an O(n^2) duplicate scan over n-grams joined as strings.
inline double repetition(const std::string& text, std::size_t n) {
    std::istringstream in(text);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (words.size() < n) return 0.0;
    std::vector<std::string> grams;
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
        std::string g;
        for (std::size_t k = 0; k < n; ++k) g += words[i + k] + "\x01";
        grams.push_back(g);
    }
    if (grams.size() <= 1) return 0.0;
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < grams.size(); ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) first = first && grams[j] != grams[i];
        distinct += first ? 1 : 0;
    }
    return 1.0 - double(distinct) / double(grams.size());
}

/// Whitespace token count via stream extraction.
inline std::size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

inline double mean(const std::vector<double>& xs) {
    long double s = 0;
    for (double x : xs) s += x;
    return double(s / xs.size());
}

}  // namespace oracle
