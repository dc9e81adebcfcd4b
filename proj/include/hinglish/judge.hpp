#pragma once

// LLM-as-judge scoring on a five-dimension 1-5 rubric and base-vs-tuned
// comparison tables.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hinglish/client.hpp"
#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish {

enum class RubricDimension { hinglish_fluency, persona_adherence, gender_correctness, hindi_usage, coherence };

inline constexpr std::array<RubricDimension, 5> kAllDimensions = {
    RubricDimension::hinglish_fluency, RubricDimension::persona_adherence, RubricDimension::gender_correctness,
    RubricDimension::hindi_usage, RubricDimension::coherence};

inline std::string_view to_string(RubricDimension d) noexcept {
    switch (d) {
        case RubricDimension::hinglish_fluency: return "hinglish_fluency";
        case RubricDimension::persona_adherence: return "persona_adherence";
        case RubricDimension::gender_correctness: return "gender_correctness";
        case RubricDimension::hindi_usage: return "hindi_usage";
        default: return "coherence";
    }
}

inline std::string_view display_name(RubricDimension d) noexcept {
    switch (d) {
        case RubricDimension::hinglish_fluency: return "Hinglish Fluency";
        case RubricDimension::persona_adherence: return "Persona Adherence";
        case RubricDimension::gender_correctness: return "Gender Correctness";
        case RubricDimension::hindi_usage: return "Hindi Usage";
        default: return "Coherence";
    }
}

inline std::optional<RubricDimension> parse_dimension(std::string_view s) noexcept {
    for (auto d : kAllDimensions) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

/// Prompt wording, kept as data so it can be versioned apart from code.
struct JudgeRubric {
    std::string version = "1";
    std::string preamble =
        "You are an expert evaluator of Hinglish (romanized Hindi-English code-mixed) chat replies. "
        "Judge the response strictly and consistently.";
    std::map<RubricDimension, std::string> definitions = {
        {RubricDimension::hinglish_fluency,
         "how naturally the reply blends Hindi and English in casual, idiomatic code-switching, "
         "like \"haan yaar\" or \"oye sun\""},
        {RubricDimension::persona_adherence, "how well the reply keeps the assigned persona, tone and role"},
        {RubricDimension::gender_correctness,
         "whether gendered verb forms and references stay consistent with the speakers"},
        {RubricDimension::hindi_usage, "whether Hindi words are used correctly and in sufficient measure"},
        {RubricDimension::coherence, "logical flow and relevance to the conversation so far"},
    };
};

inline JudgeRubric load_rubric(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read rubric file '" + path + "'");
    JudgeRubric r;
    try {
        auto j = nlohmann::json::parse(in);
        r.version = j.at("version").get<std::string>();
        r.preamble = j.at("preamble").get<std::string>();
        for (const auto& [name, def] : j.at("dimensions").items()) {
            auto d = parse_dimension(name);
            if (!d) throw ValidationError("unknown rubric dimension '" + name + "'");
            r.definitions[*d] = def.get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return r;
}

inline std::string build_judge_prompt(std::string_view conversation_context, std::string_view response,
                                      std::span<const RubricDimension> dimensions,
                                      const JudgeRubric& rubric = {}) {
    if (text::trim(response).empty()) throw ValidationError("response to judge must be non-empty");
    std::ostringstream p;
    p << rubric.preamble << "\n\n";
    p << "Conversation so far:\n" << (text::trim(conversation_context).empty() ? "(none)" : conversation_context) << "\n\n";
    p << "Response to evaluate:\n" << response << "\n\n";
    p << "Score the response from 1 (poor) to 5 (excellent) on each dimension; whole or half points only.\n";
    for (auto d : dimensions) {
        auto it = rubric.definitions.find(d);
        p << "- " << to_string(d) << ": " << (it == rubric.definitions.end() ? std::string() : it->second) << "\n";
    }
    p << "\nReply with one JSON object and nothing else: {";
    for (auto d : dimensions) p << "\"" << to_string(d) << "\": <score>, ";
    p << "\"rationale\": \"<one line>\"}";
    return p.str();
}

struct JudgeVerdict {
    std::map<RubricDimension, double> scores;
    std::string rationale;
    std::string judge_model;
    std::string prompt_id;

    friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

namespace detail {

/// Byte range of the first balanced {...} that parses as a JSON object.
inline std::optional<nlohmann::json> first_json_object(std::string_view raw) {
    for (auto open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = open; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                try {
                    auto j = nlohmann::json::parse(raw.substr(open, i - open + 1));
                    if (j.is_object()) return j;
                } catch (const nlohmann::json::exception&) {
                }
                break;
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Extracts the first JSON object in `raw` and checks every requested
/// dimension is present with a half-step score in [1, 5].
inline JudgeVerdict parse_verdict(std::string_view raw,
                                  std::span<const RubricDimension> required = kAllDimensions) {
    auto obj = detail::first_json_object(raw);
    if (!obj) throw ParseError("no JSON object found in judge reply");
    JudgeVerdict v;
    for (auto d : required) {
        auto name = std::string(to_string(d));
        if (!obj->contains(name)) throw ParseError("missing dimension '" + name + "'");
        const auto& s = (*obj)[name];
        if (!s.is_number()) throw ParseError("score for '" + name + "' is not a number");
        double score = s.get<double>();
        if (!(score >= 1.0 && score <= 5.0)) {
            throw RangeError("score for '" + name + "' out of range [1, 5]: " + s.dump());
        }
        if (std::abs(score * 2.0 - std::round(score * 2.0)) > 1e-9) {
            throw RangeError("score for '" + name + "' is not a whole or half point: " + s.dump());
        }
        v.scores[d] = score;
    }
    if (obj->contains("rationale") && (*obj)["rationale"].is_string()) v.rationale = (*obj)["rationale"];
    return v;
}

/// The JSON reply a judge would produce for `v`; parse_verdict inverts it.
inline std::string render_verdict(const JudgeVerdict& v) {
    nlohmann::ordered_json j;
    for (const auto& [d, s] : v.scores) j[std::string(to_string(d))] = s;
    j["rationale"] = v.rationale;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Comparison

struct DimensionComparison {
    RubricDimension dimension;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double delta = 0.0;
    std::optional<double> percent_change;  // unset when mean_a is 0
};

struct ComparisonReport {
    std::string label_a = "Base";
    std::string label_b = "LoRA";
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::vector<DimensionComparison> rows;
};

/// "+41.4%" style, one decimal, explicit sign; negative zero prints as +0.0%.
inline std::string format_percent(double pct) {
    double rounded = std::round(pct * 10.0) / 10.0;
    if (rounded == 0.0) rounded = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.1f%%", rounded);
    return buf;
}

inline double percent_change(double a, double b) { return (b - a) / a * 100.0; }

inline ComparisonReport compare_systems(std::span<const JudgeVerdict> a, std::span<const JudgeVerdict> b,
                                        std::string label_a = "Base", std::string label_b = "LoRA") {
    if (a.empty() || b.empty()) throw ValidationError("both verdict lists must be non-empty");
    auto mean = [](std::span<const JudgeVerdict> vs, RubricDimension d) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& v : vs) {
            auto it = v.scores.find(d);
            if (it == v.scores.end()) continue;
            sum += it->second;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };
    ComparisonReport r{std::move(label_a), std::move(label_b), a.size(), b.size(), {}};
    for (auto d : kAllDimensions) {
        auto ma = mean(a, d);
        auto mb = mean(b, d);
        if (!ma || !mb) continue;
        DimensionComparison row{d, *ma, *mb, *mb - *ma, std::nullopt};
        if (*ma > 0.0) row.percent_change = std::round(percent_change(*ma, *mb) * 10.0) / 10.0;
        r.rows.push_back(row);
    }
    return r;
}

inline nlohmann::ordered_json to_json(const ComparisonReport& r) {
    nlohmann::ordered_json j;
    j["label_a"] = r.label_a;
    j["label_b"] = r.label_b;
    j["n_a"] = r.n_a;
    j["n_b"] = r.n_b;
    j["dimensions"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json o;
        o["dimension"] = to_string(row.dimension);
        o["mean_a"] = row.mean_a;
        o["mean_b"] = row.mean_b;
        o["delta"] = row.delta;
        o["percent_change"] = row.percent_change ? nlohmann::ordered_json(*row.percent_change) : nullptr;
        j["dimensions"].push_back(std::move(o));
    }
    return j;
}

inline ComparisonReport comparison_from_json(const nlohmann::json& j) {
    ComparisonReport r;
    try {
        r.label_a = j.at("label_a").get<std::string>();
        r.label_b = j.at("label_b").get<std::string>();
        r.n_a = j.at("n_a").get<std::size_t>();
        r.n_b = j.at("n_b").get<std::size_t>();
        for (const auto& o : j.at("dimensions")) {
            auto d = parse_dimension(o.at("dimension").get<std::string>());
            if (!d) throw ParseError("unknown dimension '" + o.at("dimension").get<std::string>() + "'");
            DimensionComparison row{*d, o.at("mean_a").get<double>(), o.at("mean_b").get<double>(),
                                    o.at("delta").get<double>(), std::nullopt};
            if (!o.at("percent_change").is_null()) row.percent_change = o["percent_change"].get<double>();
            r.rows.push_back(row);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad comparison report: ") + e.what());
    }
    return r;
}

/// Renders the report as a "Metric | base | tuned (+Δ%)" table using only
/// the stored values.
inline std::string render_table(const ComparisonReport& r) {
    std::vector<std::array<std::string, 3>> cells;
    cells.push_back({"Metric (Average)", r.label_a, r.label_b});
    char buf[64];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%.2f", row.mean_a);
        std::string a = buf;
        std::snprintf(buf, sizeof buf, "%.2f", row.mean_b);
        std::string b = buf;
        if (row.percent_change) b += " (" + format_percent(*row.percent_change) + ")";
        cells.push_back({std::string(display_name(row.dimension)), a, b});
    }
    std::array<std::size_t, 3> width{};
    for (const auto& c : cells) {
        for (std::size_t k = 0; k < 3; ++k) width[k] = std::max(width[k], c[k].size());
    }
    std::string out;
    auto line = [&](const std::array<std::string, 3>& c) {
        out += "|";
        for (std::size_t k = 0; k < 3; ++k) out += " " + c[k] + std::string(width[k] - c[k].size(), ' ') + " |";
        out += "\n";
    };
    line(cells[0]);
    out += "|";
    for (std::size_t k = 0; k < 3; ++k) out += std::string(width[k] + 2, '-') + "|";
    out += "\n";
    for (std::size_t i = 1; i < cells.size(); ++i) line(cells[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Running a judge

struct JudgeItem {
    std::string prompt_id;
    std::string context;
    std::string response;
};

struct JudgeRun {
    std::vector<JudgeVerdict> verdicts;
    std::vector<std::pair<std::string, std::string>> failures;  // prompt id, reason
    std::size_t endpoint_calls = 0;
};

/// Scores every item with up to `parallelism` judge calls in flight. A reply
/// that fails parse_verdict is re-prompted with the parse error appended.
inline JudgeRun run_judge(std::span<const JudgeItem> items, ChatClient& client, KeyPool& pool, Clock& clock,
                          const RetryPolicy& policy, std::uint64_t seed = 0, std::size_t parallelism = 4,
                          const JudgeRubric& rubric = {}) {
    struct Slot {
        std::optional<JudgeVerdict> verdict;
        std::string failure;
        std::size_t calls = 0;
    };
    std::vector<Slot> slots(items.size());
    auto score = [&](std::size_t i) {
        const auto& item = items[i];
        std::mt19937_64 rng(seed ^ text::fnv1a64(item.prompt_id));
        std::optional<JudgeVerdict> parsed;
        ReplyCheck check = [&](const std::string& reply) -> std::optional<std::string> {
            try {
                parsed = parse_verdict(reply);
                return std::nullopt;
            } catch (const Error& e) {
                return std::string("Your previous reply could not be used (") + e.what() +
                       "). Reply with only the JSON object.";
            }
        };
        auto prompt = build_judge_prompt(item.context, item.response, kAllDimensions, rubric);
        auto out = call_until_accepted(client, pool, clock, policy, rng, prompt, check);
        slots[i].calls = out.log.attempts;
        if (out.ok && parsed) {
            parsed->judge_model = client.model();
            parsed->prompt_id = item.prompt_id;
            slots[i].verdict = std::move(parsed);
        } else {
            slots[i].failure = out.failure;
        }
    };
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) score(i);
    };
    auto n_workers = std::min<std::size_t>(std::max<std::size_t>(parallelism, 1), items.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    }
    JudgeRun run;
    for (std::size_t i = 0; i < items.size(); ++i) {
        run.endpoint_calls += slots[i].calls;
        if (slots[i].verdict) run.verdicts.push_back(std::move(*slots[i].verdict));
        else run.failures.emplace_back(items[i].prompt_id, slots[i].failure);
    }
    return run;
}

}  // namespace hinglish
