#pragma once

// In-process stand-ins for a chat-completion endpoint: a deterministic
// writer of plausible Hinglish dialogues and a scripted client that injects
// failures in call order.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinglish/client.hpp"
#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish::mock {

/// What the fields of a generation prompt asked for.
struct PromptRequest {
    std::string topic;
    std::vector<std::string> keywords;
    std::size_t turns = 8;
    std::size_t words_min = 40;
    std::size_t words_max = 50;
    std::size_t variant = 1;
};

inline PromptRequest parse_prompt(const std::string& prompt) {
    PromptRequest r;
    std::smatch m;
    if (std::regex_search(prompt, m, std::regex(R"(Topic: ([^\n]*))"))) r.topic = m[1];
    if (std::regex_search(prompt, m, std::regex(R"(Keywords: ([^\n]*))"))) {
        std::string list = m[1];
        std::size_t start = 0;
        while (start <= list.size()) {
            auto comma = list.find(',', start);
            auto item = text::trim(std::string_view(list).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (!item.empty()) r.keywords.emplace_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (std::regex_search(prompt, m, std::regex(R"(exactly (\d+) turns)"))) r.turns = std::stoul(m[1]);
    if (std::regex_search(prompt, m, std::regex(R"(must be (\d+)-(\d+) words)"))) {
        r.words_min = std::stoul(m[1]);
        r.words_max = std::stoul(m[2]);
    }
    if (std::regex_search(prompt, m, std::regex(R"(Conversation number: (\d+))"))) r.variant = std::stoul(m[1]);
    return r;
}

enum class Style { mixed, english_only, assistant_first, short_turns };

/// Deterministic writer: the same prompt always yields the same dialogue.
class SyntheticDialogueWriter {
public:
    std::string write(const std::string& prompt, Style style = Style::mixed) const {
        auto req = parse_prompt(base_of(prompt));
        std::mt19937_64 rng(text::fnv1a64(base_of(prompt)));
        nlohmann::json turns = nlohmann::json::array();
        for (std::size_t i = 0; i < req.turns; ++i) {
            bool user = i % 2 == 0;
            if (style == Style::assistant_first) user = !user;
            std::size_t target = style == Style::short_turns ? 5 : pick(rng, req.words_min, req.words_max);
            std::string body = turn_text(rng, req, i, target, style == Style::english_only);
            turns.push_back({{"role", user ? "user" : "assistant"}, {"text", body}});
        }
        return turns.dump();
    }

private:
    static std::string base_of(const std::string& prompt) {
        auto cut = prompt.find("\n\nYour previous answer");
        return cut == std::string::npos ? prompt : prompt.substr(0, cut);
    }

    static std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    }

    static std::string turn_text(std::mt19937_64& rng, const PromptRequest& req, std::size_t turn,
                                 std::size_t target, bool english_only) {
        static const std::vector<std::string> kHindi = {
            "yaar sach mein", "mujhe lagta hai", "bahut zyada", "kya karun", "tension mat lo",
            "sab theek ho jayega", "main samajh sakta hoon", "tum akela nahi ho", "thoda time do",
            "abhi bhi", "kabhi kabhi", "dil se bolun toh", "chalo dekhte hain", "koi baat nahi",
            "haan yaar", "mera matlab hai", "aur phir", "kuch din pehle", "mummy papa bhi", "bilkul sahi",
            "pata nahi kyun", "itna mat socho", "apna khayal rakhna", "dost log bhi",
        };
        static const std::vector<std::string> kEnglish = {
            "honestly", "I feel like", "the whole week", "it is really stressful", "you know what I mean",
            "just focus on", "one step at a time", "at the end of the day", "take a deep breath",
            "make a simple plan", "for real", "trust me", "it happens to everyone", "talk to your friends",
            "maybe tomorrow", "the main thing is", "I get it", "seriously", "that sounds hard", "no pressure",
        };
        std::vector<std::string> words;
        auto add = [&](const std::string& chunk) {
            for (auto w : text::split_whitespace(chunk)) words.emplace_back(w);
        };
        if (!req.keywords.empty()) {
            const auto& kw = req.keywords[(turn + req.variant) % req.keywords.size()];
            add(english_only ? "about " + kw : "yaar " + kw + " ke baare mein");
        }
        add(english_only ? "conversation " + std::to_string(req.variant) : "baat number " + std::to_string(req.variant));
        bool hindi_next = !english_only && rng() % 2 == 0;
        while (words.size() < target) {
            const auto& bank = hindi_next ? kHindi : kEnglish;
            add(bank[rng() % bank.size()]);
            if (!english_only) hindi_next = !hindi_next;
        }
        words.resize(target);
        words.back() += ".";
        return text::join(words, " ");
    }
};

enum class Action {
    ok,
    rate_limited,     // HTTP 429
    server_error,     // HTTP 503
    bad_request,      // HTTP 400
    malformed,        // not JSON
    assistant_first,  // role order violation
    english_only,     // insufficient mixing
    short_turns,      // word bounds violation
};

struct RecordedCall {
    std::string prompt;
    std::string key;
    Action action;
};

/// Chat client whose i-th call performs script[i]; calls past the end of
/// the script succeed. Thread-safe.
class MockChatClient final : public ChatClient {
public:
    explicit MockChatClient(std::vector<Action> script = {}, std::string model = "mock-generator")
        : script_(std::move(script)), model_(std::move(model)) {}

    std::string complete(const std::string& prompt, const std::string& api_key) override {
        Action action;
        {
            std::lock_guard lock(mu_);
            action = calls_.size() < script_.size() ? script_[calls_.size()] : Action::ok;
            calls_.push_back({prompt, api_key, action});
        }
        switch (action) {
            case Action::rate_limited: throw EndpointError(429, "mock: rate limited");
            case Action::server_error: throw EndpointError(503, "mock: unavailable");
            case Action::bad_request: throw EndpointError(400, "mock: bad request");
            case Action::malformed: return "Sure! Here is your conversation: {not json";
            case Action::assistant_first: return writer_.write(prompt, Style::assistant_first);
            case Action::english_only: return writer_.write(prompt, Style::english_only);
            case Action::short_turns: return writer_.write(prompt, Style::short_turns);
            case Action::ok: break;
        }
        return writer_.write(prompt);
    }

    std::string model() const override { return model_; }

    std::vector<RecordedCall> calls() const {
        std::lock_guard lock(mu_);
        return calls_;
    }

private:
    mutable std::mutex mu_;
    std::vector<Action> script_;
    std::vector<RecordedCall> calls_;
    std::string model_;
    SyntheticDialogueWriter writer_;
};

}  // namespace hinglish::mock
