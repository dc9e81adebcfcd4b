#pragma once

// Plain-text configuration: `key = value` lines, '#' comments, and
// `[section]` headers that prefix following keys with "section.".

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hinglish/client.hpp"
#include "hinglish/corpus.hpp"
#include "hinglish/error.hpp"
#include "hinglish/genpipe.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view content, std::string source = "<config>") {
        KeyValueConfig cfg;
        cfg.source_ = std::move(source);
        std::string section;
        std::size_t lineno = 0;
        std::istringstream in{std::string(content)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++lineno;
            auto line = text::trim(raw);
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError(cfg.where(lineno) + "unterminated section header");
                section = std::string(text::trim(line.substr(1, line.size() - 2)));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError(cfg.where(lineno) + "expected key = value");
            auto key = std::string(text::trim(line.substr(0, eq)));
            if (key.empty()) throw ParseError(cfg.where(lineno) + "empty key");
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = std::string(text::trim(line.substr(eq + 1)));
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        auto cfg = parse(ss.str(), path);
        cfg.base_dir_ = std::filesystem::path(path).parent_path();
        return cfg;
    }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ValidationError(source_ + ": missing required key '" + key + "'");
        return *v;
    }

    /// A path value, resolved relative to the config file's directory.
    std::optional<std::string> path(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        std::filesystem::path p(*v);
        if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
        return p.string();
    }

    std::optional<std::size_t> get_size(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        try {
            std::size_t pos = 0;
            if (v->empty() || !std::isdigit(static_cast<unsigned char>(v->front()))) throw std::invalid_argument(*v);
            auto n = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument(*v);
            return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
            throw ValidationError(source_ + ": '" + key + "' must be a non-negative integer");
        }
    }

    std::optional<double> get_double(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        try {
            std::size_t pos = 0;
            double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument(*v);
            return d;
        } catch (const std::exception&) {
            throw ValidationError(source_ + ": '" + key + "' must be a number");
        }
    }

    std::optional<bool> get_bool(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        auto s = text::to_lower_ascii(*v);
        if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
        if (s == "false" || s == "no" || s == "0" || s == "off") return false;
        throw ValidationError(source_ + ": '" + key + "' must be a boolean");
    }

    /// Comma-separated list with surrounding whitespace trimmed.
    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto v = get(key);
        if (!v) return out;
        std::size_t start = 0;
        for (;;) {
            auto comma = v->find(',', start);
            auto item = text::trim(std::string_view(*v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (!item.empty()) out.emplace_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    }

    bool has_section(const std::string& section) const {
        auto prefix = section + ".";
        for (const auto& [k, v] : values_) {
            if (k.starts_with(prefix)) return true;
        }
        return false;
    }

    const std::string& source() const noexcept { return source_; }

private:
    std::string where(std::size_t lineno) const { return source_ + ":" + std::to_string(lineno) + ": "; }

    std::map<std::string, std::string> values_;
    std::string source_;
    std::filesystem::path base_dir_;
};

/// Reads `<section>.url`, `.model`, `.keys` or `.key_file`, `.auth_header`,
/// `.auth_prefix`, `.timeout_ms`, `.temperature`. Keys in the environment
/// variable named by `key_env` replace any configured keys.
inline EndpointConfig endpoint_from_config(const KeyValueConfig& cfg, const std::string& section,
                                           const char* key_env = nullptr) {
    auto k = [&](const char* name) { return section + "." + name; };
    EndpointConfig e;
    e.url = cfg.require(k("url"));
    if (auto v = cfg.get(k("model"))) e.model = *v;
    e.keys = cfg.get_list(k("keys"));
    if (auto file = cfg.path(k("key_file"))) {
        std::ifstream in(*file);
        if (!in) throw IoError("cannot read key file '" + *file + "'");
        std::string line;
        while (std::getline(in, line)) {
            auto key = text::trim(line);
            if (!key.empty() && key.front() != '#') e.keys.emplace_back(key);
        }
    }
    if (key_env) {
        if (const char* env = std::getenv(key_env); env && *env) {
            e.keys = KeyValueConfig::parse(std::string("keys = ") + env).get_list("keys");
        }
    }
    if (auto v = cfg.get(k("auth_header"))) e.auth_header = *v;
    if (auto v = cfg.get(k("auth_prefix"))) e.auth_prefix = *v == "none" ? "" : *v + " ";
    if (auto v = cfg.get_size(k("timeout_ms"))) e.timeout = Millis{static_cast<Millis::rep>(*v)};
    if (auto v = cfg.get_double(k("temperature"))) e.temperature = *v;
    // An endpoint without credentials still needs one pool slot.
    if (e.keys.empty()) e.keys.emplace_back();
    return e;
}

/// Overrides GenerationConfig fields present under `generation.`.
inline void apply_generation_config(const KeyValueConfig& cfg, GenerationConfig& g) {
    if (auto v = cfg.get_size("generation.turns_per_dialogue")) g.turns_per_dialogue = *v;
    if (auto v = cfg.get_size("generation.words_min")) g.words_min = *v;
    if (auto v = cfg.get_size("generation.words_max")) g.words_max = *v;
    if (auto v = cfg.get_size("generation.accept_words_min")) g.accept_words_min = *v;
    if (auto v = cfg.get_size("generation.accept_words_max")) g.accept_words_max = *v;
    if (auto v = cfg.get_double("generation.min_dialogue_cmi")) g.min_dialogue_cmi = *v;
    if (auto v = cfg.get_size("generation.max_attempts")) g.max_attempts = *v;
    if (auto v = cfg.get_size("generation.batch_size")) g.batch_size = *v;
    if (auto v = cfg.get_size("generation.dialogues_per_topic")) g.dialogues_per_topic = *v;
    if (auto v = cfg.get_size("generation.seed")) g.seed = *v;
    if (auto v = cfg.get_size("generation.backoff_base_ms")) g.backoff_base = Millis{static_cast<Millis::rep>(*v)};
    if (auto v = cfg.get_size("generation.backoff_cap_ms")) g.backoff_cap = Millis{static_cast<Millis::rep>(*v)};
    if (auto v = cfg.get_double("generation.jitter_fraction")) g.jitter_fraction = *v;
    g.validate();
}

/// Parses "0.8,0.1,0.1".
inline SplitRatios parse_ratios(std::string_view s) {
    auto parts = KeyValueConfig::parse("r = " + std::string(s)).get_list("r");
    if (parts.size() != 3) throw ValidationError("ratios must be three comma-separated fractions");
    SplitRatios r;
    try {
        r = {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    } catch (const std::exception&) {
        throw ValidationError("ratios must be numbers: '" + std::string(s) + "'");
    }
    check_ratios(r);
    return r;
}

/// Shared settings for every subcommand.
struct PipelineConfig {
    std::optional<std::string> topics;
    std::optional<std::string> hindi_lexicon;
    std::optional<std::string> english_lexicon;
    std::optional<std::string> variant_table;
    std::optional<std::string> rubric;
    std::optional<std::string> corpus;
    std::optional<std::string> reports;
    std::optional<EndpointConfig> generator;
    std::optional<EndpointConfig> judge;
    std::optional<std::string> embedding_provider;
    GenerationConfig generation;
    SplitRatios ratios;
    std::int64_t split_seed = 0;
    Millis key_cooldown{60000};
};

/// Loads and checks a pipeline config; every referenced input file must exist.
inline PipelineConfig load_pipeline_config(const std::string& path) {
    auto cfg = KeyValueConfig::load(path);
    PipelineConfig p;
    auto existing = [&](const char* key) -> std::optional<std::string> {
        auto v = cfg.path(key);
        if (v && !std::filesystem::exists(*v)) throw ValidationError(path + ": '" + key + "' names missing file '" + *v + "'");
        return v;
    };
    p.topics = existing("paths.topics");
    p.hindi_lexicon = existing("paths.hindi_lexicon");
    p.english_lexicon = existing("paths.english_lexicon");
    p.variant_table = existing("paths.variant_table");
    p.rubric = existing("paths.rubric");
    p.corpus = cfg.path("paths.corpus");
    p.reports = cfg.path("paths.reports");
    if (cfg.has_section("generator")) p.generator = endpoint_from_config(cfg, "generator", "HINGLISH_GENERATOR_KEYS");
    if (cfg.has_section("judge")) p.judge = endpoint_from_config(cfg, "judge", "HINGLISH_JUDGE_KEYS");
    p.embedding_provider = cfg.get("embedding.provider");
    apply_generation_config(cfg, p.generation);
    if (auto v = cfg.get("split.ratios")) p.ratios = parse_ratios(*v);
    if (auto v = cfg.get_size("split.seed")) p.split_seed = static_cast<std::int64_t>(*v);
    if (auto v = cfg.get_size("generator.cooldown_ms")) p.key_cooldown = Millis{static_cast<Millis::rep>(*v)};
    return p;
}

}  // namespace hinglish
