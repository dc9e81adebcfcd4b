#pragma once

// Topic-driven synthetic dialogue generation: prompt templating, validation
// of model output, and the bounded-parallel re-prompting run loop.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinglish/client.hpp"
#include "hinglish/clock.hpp"
#include "hinglish/corpus.hpp"
#include "hinglish/error.hpp"
#include "hinglish/langid.hpp"
#include "hinglish/metrics.hpp"
#include "hinglish/normalize.hpp"

namespace hinglish {

struct TopicSpec {
    std::string id;
    std::string title;
    std::vector<std::string> keywords;
    std::optional<std::string> persona_hint;
};

inline TopicSpec topic_from_json(const json& j) {
    TopicSpec t;
    try {
        t.id = j.at("id").get<std::string>();
        t.title = j.at("title").get<std::string>();
        t.keywords = j.at("keywords").get<std::vector<std::string>>();
        if (j.contains("persona_hint") && !j["persona_hint"].is_null()) {
            t.persona_hint = j["persona_hint"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad topic record: ") + e.what());
    }
    if (t.keywords.empty()) throw ValidationError("topic '" + t.id + "' has no keywords");
    return t;
}

/// Reads a JSON array of topics; ids must be unique.
inline std::vector<TopicSpec> load_topics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read topic file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError(path + ": expected a JSON array of topics");
    std::vector<TopicSpec> topics;
    std::set<std::string> ids;
    for (const auto& j : doc) {
        auto t = topic_from_json(j);
        if (!ids.insert(t.id).second) throw ValidationError("duplicate topic id '" + t.id + "'");
        topics.push_back(std::move(t));
    }
    return topics;
}

struct GenerationConfig {
    std::size_t turns_per_dialogue = 8;
    std::size_t words_min = 40;
    std::size_t words_max = 50;
    std::size_t accept_words_min = 20;
    std::size_t accept_words_max = 80;
    double min_dialogue_cmi = 0.05;
    std::size_t max_attempts = 4;
    std::size_t batch_size = 4;
    std::size_t dialogues_per_topic = 1;
    std::uint64_t seed = 0;  // drives backoff jitter only
    Millis backoff_base{1000};
    Millis backoff_cap{60000};
    double jitter_fraction = 0.1;

    void validate() const {
        if (turns_per_dialogue < 2 || turns_per_dialogue % 2 != 0) {
            throw ValidationError("turns_per_dialogue must be an even number >= 2");
        }
        if (words_min > words_max) throw ValidationError("words_min must not exceed words_max");
        if (accept_words_min > words_min || accept_words_max < words_max) {
            throw ValidationError("acceptance word bounds must contain the target bounds");
        }
        if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
        if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
        if (dialogues_per_topic < 1) throw ValidationError("dialogues_per_topic must be >= 1");
    }

    RetryPolicy retry_policy() const { return {max_attempts, backoff_base, backoff_cap, jitter_fraction}; }
};

enum class Failure { parse_error, role_order, turn_count, word_bounds, insufficient_mixing, off_topic };

inline std::string_view to_string(Failure f) noexcept {
    switch (f) {
        case Failure::parse_error: return "parse_error";
        case Failure::role_order: return "role_order";
        case Failure::turn_count: return "turn_count";
        case Failure::word_bounds: return "word_bounds";
        case Failure::insufficient_mixing: return "insufficient_mixing";
        default: return "off_topic";
    }
}

struct ValidationVerdict {
    std::vector<Failure> failures;

    bool ok() const noexcept { return failures.empty(); }
    bool has(Failure f) const { return std::find(failures.begin(), failures.end(), f) != failures.end(); }
};

struct ValidatedDialogue {
    ValidationVerdict verdict;
    std::optional<Dialogue> dialogue;
};

/// Text cleanup applied to accepted turns.
struct TextPipeline {
    VariantTable table;
    CleaningConfig cleaning;

    std::string apply(std::string_view s) const { return clean_and_normalize(s, cleaning, table); }
};

/// Deterministic generation prompt. `variant` distinguishes the several
/// dialogues requested for one topic.
inline std::string build_prompt(const TopicSpec& topic, const GenerationConfig& config, std::size_t variant = 0) {
    std::ostringstream p;
    p << "Write a realistic chat conversation in Hinglish, the romanized code-mixed blend of Hindi "
         "and English used by young people in India.\n";
    p << "Topic: " << topic.title << "\n";
    p << "Keywords:";
    for (std::size_t i = 0; i < topic.keywords.size(); ++i) p << (i ? ", " : " ") << topic.keywords[i];
    p << "\n";
    if (topic.persona_hint) p << "Persona: the user is a " << *topic.persona_hint << ".\n";
    p << "Write exactly " << config.turns_per_dialogue
      << " turns that alternate between \"user\" and \"assistant\", starting with \"user\".\n";
    p << "Each turn must be " << config.words_min << "-" << config.words_max << " words long.\n";
    p << "Code-mix Hindi and English naturally inside every turn, writing Hindi in Latin script "
         "(for example \"yaar\", \"bahut\", \"tension mat lo\").\n";
    p << "Output only a JSON array of objects of the form {\"role\": \"user\" | \"assistant\", \"text\": \"...\"}"
         " with no other text.\n";
    p << "Conversation number: " << variant + 1 << " (keep it different from other conversations on this topic).";
    return p.str();
}

/// Corrective instruction appended to the prompt after a rejected reply.
inline std::string corrective_suffix(const ValidationVerdict& v, const GenerationConfig& config) {
    std::ostringstream s;
    s << "Your previous answer was rejected for:";
    for (auto f : v.failures) s << ' ' << to_string(f);
    s << ".";
    for (auto f : v.failures) {
        switch (f) {
            case Failure::parse_error: s << " Return only a valid JSON array."; break;
            case Failure::role_order: s << " Alternate user and assistant, starting with user."; break;
            case Failure::turn_count: s << " Write exactly " << config.turns_per_dialogue << " turns."; break;
            case Failure::word_bounds:
                s << " Keep every turn between " << config.words_min << " and " << config.words_max << " words.";
                break;
            case Failure::insufficient_mixing: s << " Use more Hindi words mixed with English."; break;
            case Failure::off_topic: s << " Stay on the topic and use its keywords."; break;
        }
    }
    return s.str();
}

namespace detail {

/// Pulls the JSON array out of a reply, tolerating code fences or prose.
inline std::optional<json> extract_turn_array(const std::string& raw) {
    auto try_parse = [](std::string_view s) -> std::optional<json> {
        try {
            auto j = json::parse(s);
            if (j.is_array()) return j;
            if (j.is_object() && j.contains("turns") && j["turns"].is_array()) return j["turns"];
            if (j.is_object() && j.contains("messages") && j["messages"].is_array()) return j["messages"];
        } catch (const json::exception&) {
        }
        return std::nullopt;
    };
    if (auto j = try_parse(raw)) return j;
    auto open = raw.find('[');
    auto close = raw.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
        return try_parse(std::string_view(raw).substr(open, close - open + 1));
    }
    return std::nullopt;
}

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || static_cast<unsigned char>(c) >= 0x80;
}

/// Whole-word, case-insensitive containment.
inline bool contains_phrase(const std::string& lowered_text, const std::string& phrase) {
    auto needle = text::to_lower_ascii(text::trim(phrase));
    if (needle.empty()) return false;
    for (auto pos = lowered_text.find(needle); pos != std::string::npos; pos = lowered_text.find(needle, pos + 1)) {
        bool left = pos == 0 || !is_word_char(lowered_text[pos - 1]);
        auto end = pos + needle.size();
        bool right = end >= lowered_text.size() || !is_word_char(lowered_text[end]);
        if (left && right) return true;
    }
    return false;
}

}  // namespace detail

/// Parses and checks one model reply. Turns are cleaned and normalized
/// before the word, mixing and keyword checks; failures are data.
inline ValidatedDialogue validate_dialogue(const std::string& raw, const TopicSpec& topic,
                                           const GenerationConfig& config, const Lexicons& lex,
                                           const TextPipeline& pipeline = {}) {
    ValidatedDialogue result;
    auto& failures = result.verdict.failures;
    auto array = detail::extract_turn_array(raw);
    if (!array) {
        failures.push_back(Failure::parse_error);
        return result;
    }
    std::vector<std::pair<std::optional<Role>, std::string>> turns;
    for (const auto& item : *array) {
        if (!item.is_object() || !item.contains("role") || !item["role"].is_string()) {
            failures.push_back(Failure::parse_error);
            return result;
        }
        const json* body = item.contains("text") ? &item["text"] : item.contains("content") ? &item["content"] : nullptr;
        if (!body || !body->is_string()) {
            failures.push_back(Failure::parse_error);
            return result;
        }
        turns.emplace_back(parse_role(item["role"].get<std::string>()), pipeline.apply(body->get<std::string>()));
    }

    bool alternating = !turns.empty();
    for (std::size_t i = 0; i < turns.size(); ++i) {
        Role expected = i % 2 == 0 ? Role::user : Role::assistant;
        if (turns[i].first != expected) alternating = false;
    }
    if (!alternating) failures.push_back(Failure::role_order);
    if (turns.size() != config.turns_per_dialogue) failures.push_back(Failure::turn_count);

    bool words_ok = true;
    double cmi_sum = 0.0;
    std::string all_text;
    for (const auto& [role, body] : turns) {
        auto n = text::count_words(body);
        if (n < config.accept_words_min || n > config.accept_words_max) words_ok = false;
        cmi_sum += compute_cmi(tag_tokens(body, lex));
        all_text += text::to_lower_ascii(body);
        all_text += '\n';
    }
    if (!words_ok || turns.empty()) failures.push_back(Failure::word_bounds);
    double mean_cmi = turns.empty() ? 0.0 : cmi_sum / static_cast<double>(turns.size());
    if (mean_cmi < config.min_dialogue_cmi) failures.push_back(Failure::insufficient_mixing);
    bool on_topic = std::any_of(topic.keywords.begin(), topic.keywords.end(),
                                [&](const std::string& k) { return detail::contains_phrase(all_text, k); });
    if (!on_topic) failures.push_back(Failure::off_topic);

    if (!failures.empty()) return result;
    std::vector<Turn> built;
    for (auto& [role, body] : turns) built.emplace_back(*role, std::move(body));
    result.dialogue.emplace(topic.id, topic.persona_hint, std::move(built));
    return result;
}

/// Renders a dialogue's turns in the reply format validate_dialogue accepts.
inline std::string dialogue_to_reply(const Dialogue& d) {
    json arr = json::array();
    for (const auto& t : d.turns()) arr.push_back({{"role", to_string(t.role())}, {"text", t.text()}});
    return arr.dump();
}

// ---------------------------------------------------------------------------
// Run loop

struct DialogueAttemptRecord {
    std::string topic_id;
    std::size_t index = 0;
    std::string status;  // "ok", "failed", "duplicate"
    std::size_t attempts = 0;
    std::vector<Millis> delays;
    std::vector<std::string> outcomes;
    std::string failure;
    std::string dialogue_id;
};

struct TopicSummary {
    std::string topic_id;
    std::size_t requested = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::size_t duplicates = 0;
    std::size_t attempts = 0;
    std::uint64_t tokens = 0;
};

struct RunReport {
    std::vector<TopicSummary> topics;
    std::vector<DialogueAttemptRecord> dialogues;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::size_t endpoint_calls = 0;
    std::uint64_t tokens = 0;
};

inline ordered_json to_json(const RunReport& r) {
    ordered_json j;
    j["succeeded"] = r.succeeded;
    j["failed"] = r.failed;
    j["endpoint_calls"] = r.endpoint_calls;
    j["tokens"] = r.tokens;
    j["topics"] = ordered_json::array();
    for (const auto& t : r.topics) {
        j["topics"].push_back({{"topic_id", t.topic_id}, {"requested", t.requested}, {"succeeded", t.succeeded},
                               {"failed", t.failed}, {"duplicates", t.duplicates}, {"attempts", t.attempts},
                               {"tokens", t.tokens}});
    }
    j["dialogues"] = ordered_json::array();
    for (const auto& d : r.dialogues) {
        ordered_json delays = ordered_json::array();
        for (auto ms : d.delays) delays.push_back(ms.count());
        ordered_json rec = {{"topic_id", d.topic_id}, {"index", d.index}, {"status", d.status},
                            {"attempts", d.attempts}, {"delays_ms", delays}, {"outcomes", d.outcomes}};
        if (!d.failure.empty()) rec["failure"] = d.failure;
        if (!d.dialogue_id.empty()) rec["dialogue_id"] = d.dialogue_id;
        j["dialogues"].push_back(std::move(rec));
    }
    return j;
}

struct GenerationResult {
    std::vector<Dialogue> dialogues;
    RunReport report;
};

/// Raised when a run ends without a single accepted dialogue.
class GenerationFailed : public Error {
public:
    explicit GenerationFailed(RunReport report)
        : Error("generation produced no valid dialogues"), report_(std::move(report)) {}
    const RunReport& report() const noexcept { return report_; }

private:
    RunReport report_;
};

/// Generates dialogues_per_topic dialogues for every topic with at most
/// batch_size in flight. Output order follows (topic, index) regardless of
/// scheduling; jitter is seeded per dialogue so runs are reproducible.
inline GenerationResult run_generation(const std::vector<TopicSpec>& topics, const GenerationConfig& config,
                                       ChatClient& client, KeyPool& pool, Clock& clock, const Lexicons& lex,
                                       const TextPipeline& pipeline = {}) {
    if (topics.empty()) throw ValidationError("no topics to generate");
    config.validate();

    struct Task {
        const TopicSpec* topic;
        std::size_t index;
    };
    struct TaskResult {
        CallOutcome call;
        std::optional<Dialogue> dialogue;
    };
    std::vector<Task> tasks;
    for (const auto& t : topics) {
        for (std::size_t k = 0; k < config.dialogues_per_topic; ++k) tasks.push_back({&t, k});
    }
    std::vector<TaskResult> results(tasks.size());
    const auto policy = config.retry_policy();

    auto run_task = [&](std::size_t i) {
        const auto& task = tasks[i];
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(text::fnv1a64(task.topic->id)),
                          static_cast<std::uint32_t>(task.index)};
        std::mt19937_64 rng(seq);
        std::optional<Dialogue> accepted;
        ReplyCheck check = [&](const std::string& reply) -> std::optional<std::string> {
            auto v = validate_dialogue(reply, *task.topic, config, lex, pipeline);
            if (!v.verdict.ok()) return corrective_suffix(v.verdict, config);
            accepted = std::move(v.dialogue);
            return std::nullopt;
        };
        auto call = call_until_accepted(client, pool, clock, policy, rng, build_prompt(*task.topic, config, task.index),
                                        check);
        results[i].call = std::move(call);
        if (results[i].call.ok) results[i].dialogue = std::move(accepted);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
    };
    std::size_t n_workers = std::min(config.batch_size, tasks.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    }

    GenerationResult out;
    std::map<std::string, TopicSummary> summaries;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& task = tasks[i];
        auto& res = results[i];
        auto& summary = summaries[task.topic->id];
        summary.topic_id = task.topic->id;
        ++summary.requested;
        summary.attempts += res.call.log.attempts;
        out.report.endpoint_calls += res.call.log.attempts;

        DialogueAttemptRecord rec{task.topic->id, task.index, "failed", res.call.log.attempts,
                                  res.call.log.delays, res.call.log.outcomes, res.call.failure, {}};
        if (res.dialogue) {
            Meta meta = {
                {"generator_model", client.model()},
                {"validation_attempts", std::to_string(res.call.log.attempts)},
                {"variant", std::to_string(task.index + 1)},
                {"words_target", std::to_string(config.words_min) + "-" + std::to_string(config.words_max)},
                {"words_accept", std::to_string(config.accept_words_min) + "-" + std::to_string(config.accept_words_max)},
            };
            auto d = res.dialogue->with_meta(std::move(meta));
            rec.dialogue_id = d.id();
            if (seen.insert(d.id()).second) {
                rec.status = "ok";
                ++summary.succeeded;
                summary.tokens += d.word_count();
                out.report.tokens += d.word_count();
                out.dialogues.push_back(std::move(d));
            } else {
                rec.status = "duplicate";
                ++summary.duplicates;
            }
        } else {
            ++summary.failed;
        }
        out.report.dialogues.push_back(std::move(rec));
    }
    for (const auto& t : topics) {
        auto it = summaries.find(t.id);
        if (it != summaries.end()) out.report.topics.push_back(it->second);
    }
    for (const auto& s : out.report.topics) {
        out.report.succeeded += s.succeeded;
        out.report.failed += s.failed;
    }
    if (out.dialogues.empty()) throw GenerationFailed(std::move(out.report));
    return out;
}

}  // namespace hinglish
