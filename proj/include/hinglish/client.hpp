#pragma once

// Chat-completion access with key rotation, cooldowns and exponential
// backoff. Shared by dialogue generation and judging.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hinglish/clock.hpp"
#include "hinglish/error.hpp"
#include "hinglish/http_util.hpp"

namespace hinglish {

/// Thrown by KeyPool::next_key when every key is cooling down.
class NoKeyAvailable : public Error {
public:
    explicit NoKeyAvailable(Millis release_at)
        : Error("no available key until " + std::to_string(release_at.count()) + "ms"),
          release_at_(release_at) {}

    Millis release_at() const noexcept { return release_at_; }

private:
    Millis release_at_;
};

/// Round-robin credential rotation. A rate-limited key is skipped until its
/// cooldown expires. Thread-safe.
class KeyPool {
public:
    explicit KeyPool(std::vector<std::string> keys, Millis cooldown = Millis{60000})
        : keys_(std::move(keys)), not_before_(keys_.size(), Millis{0}), cooldown_(cooldown) {
        if (keys_.empty()) throw ValidationError("key pool needs at least one key");
    }

    std::string next_key(Millis now) {
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            std::size_t idx = (cursor_ + i) % keys_.size();
            if (not_before_[idx] <= now) {
                cursor_ = (idx + 1) % keys_.size();
                return keys_[idx];
            }
        }
        throw NoKeyAvailable(*std::min_element(not_before_.begin(), not_before_.end()));
    }

    /// Starts the configured cooldown for `key` at `now`.
    void mark_rate_limited(const std::string& key, Millis now) { cool_until(key, now + cooldown_); }

    void cool_until(const std::string& key, Millis until) {
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            if (keys_[i] == key) not_before_[i] = std::max(not_before_[i], until);
        }
    }

    bool cooling(const std::string& key, Millis now) const {
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            if (keys_[i] == key) return not_before_[i] > now;
        }
        return false;
    }

    std::size_t size() const noexcept { return keys_.size(); }
    Millis cooldown() const noexcept { return cooldown_; }

private:
    mutable std::mutex mu_;
    std::vector<std::string> keys_;
    std::vector<Millis> not_before_;
    std::size_t cursor_ = 0;
    Millis cooldown_;
};

/// min(base·2^attempt, cap) before jitter; non-decreasing in attempt.
inline Millis backoff_base_delay(std::size_t attempt, Millis base = Millis{1000}, Millis cap = Millis{60000}) {
    double raw = static_cast<double>(base.count()) * std::pow(2.0, static_cast<double>(std::min<std::size_t>(attempt, 62)));
    return Millis{static_cast<Millis::rep>(std::min(raw, static_cast<double>(cap.count())))};
}

/// Capped exponential delay with uniform ±jitter_fraction jitter.
template <class Rng>
Millis backoff_delay(std::size_t attempt, Rng& rng, Millis base = Millis{1000}, Millis cap = Millis{60000},
                     double jitter_fraction = 0.1) {
    auto d = static_cast<double>(backoff_base_delay(attempt, base, cap).count());
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    double jittered = d * (1.0 + jitter_fraction * (2.0 * u - 1.0));
    return Millis{static_cast<Millis::rep>(std::llround(std::max(0.0, jittered)))};
}

/// A single chat-completion call. Implementations throw EndpointError.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::string& prompt, const std::string& api_key) = 0;
    virtual std::string model() const = 0;
};

struct EndpointConfig {
    std::string url;
    std::string model = "default";
    std::vector<std::string> keys;
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    Millis timeout{60000};
    double temperature = 0.9;
};

/// Speaks the common chat-completions JSON shape: {"model", "messages"} in,
/// choices[0].message.content out.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config) : config_(std::move(config)), url_(http::parse_url(config_.url)) {}

    std::string complete(const std::string& prompt, const std::string& api_key) override {
        auto client = http::make_client(url_, config_.timeout);
        nlohmann::json body = {
            {"model", config_.model},
            {"temperature", config_.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        };
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace(config_.auth_header, config_.auth_prefix + api_key);
        auto res = client->Post(url_.path, headers, body.dump(), "application/json");
        if (!res) throw EndpointError(0, "chat request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) {
            throw EndpointError(res->status, "chat endpoint returned HTTP " + std::to_string(res->status));
        }
        try {
            auto reply = nlohmann::json::parse(res->body);
            if (reply.contains("choices")) return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            return reply.at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw EndpointError(res->status, std::string("unexpected chat reply shape: ") + e.what());
        }
    }

    std::string model() const override { return config_.model; }

private:
    EndpointConfig config_;
    http::Url url_;
};

struct RetryPolicy {
    std::size_t max_attempts = 4;
    Millis backoff_base{1000};
    Millis backoff_cap{60000};
    double jitter_fraction = 0.1;
};

/// What happened on each endpoint call of one logical request.
struct CallLog {
    std::size_t attempts = 0;
    std::vector<Millis> delays;
    std::vector<std::string> outcomes;  // "ok", "rejected", "http_429", "http_503", "transport", ...
};

struct CallOutcome {
    bool ok = false;
    std::string reply;
    std::string failure;
    CallLog log;
};

/// Returns std::nullopt to accept a reply, or a corrective instruction that
/// is appended to the base prompt for the next attempt.
using ReplyCheck = std::function<std::optional<std::string>(const std::string& reply)>;

/// Calls `client` until `check` accepts a reply or `policy.max_attempts`
/// calls have been made. Every call is one attempt. 429 cools the key;
/// 429, 5xx and transport errors are retried after a backoff delay; other
/// 4xx statuses end the request. Waiting for a cooling key is not an attempt.
template <class Rng>
CallOutcome call_until_accepted(ChatClient& client, KeyPool& pool, Clock& clock, const RetryPolicy& policy,
                                Rng& rng, const std::string& base_prompt, const ReplyCheck& check) {
    CallOutcome out;
    std::string prompt = base_prompt;
    auto wait = [&](std::size_t attempt) {
        if (attempt + 1 >= policy.max_attempts) return;
        auto d = backoff_delay(attempt, rng, policy.backoff_base, policy.backoff_cap, policy.jitter_fraction);
        out.log.delays.push_back(d);
        clock.sleep_for(d);
    };
    for (std::size_t attempt = 0; attempt < policy.max_attempts; ++attempt) {
        std::string key;
        for (;;) {
            try {
                key = pool.next_key(clock.now());
                break;
            } catch (const NoKeyAvailable& e) {
                clock.sleep_until(e.release_at());
            }
        }
        ++out.log.attempts;
        try {
            out.reply = client.complete(prompt, key);
        } catch (const EndpointError& e) {
            out.log.outcomes.push_back(e.status() == 0 ? "transport" : "http_" + std::to_string(e.status()));
            out.failure = e.what();
            if (e.status() == 429) pool.mark_rate_limited(key, clock.now());
            if (!e.retryable()) return out;
            wait(attempt);
            continue;
        }
        auto correction = check(out.reply);
        if (!correction) {
            out.log.outcomes.emplace_back("ok");
            out.ok = true;
            out.failure.clear();
            return out;
        }
        out.log.outcomes.emplace_back("rejected");
        out.failure = *correction;
        prompt = base_prompt + "\n\n" + *correction;
        wait(attempt);
    }
    return out;
}

}  // namespace hinglish
