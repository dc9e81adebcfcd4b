#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hinglish/hinglish.hpp"

namespace fixtures {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("hinglish-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(HINGLISH_DATA_DIR) + "/" + name; }

/// The shipped starter lexicons.
inline const hinglish::Lexicons& shipped_lexicons() {
    static const auto lex = hinglish::load_lexicons(data_path("lexicon_hi.txt"), data_path("lexicon_en.txt"));
    return lex;
}

inline const hinglish::VariantTable& shipped_variants() {
    static const auto table = hinglish::load_variant_table(data_path("variants.tsv"));
    return table;
}

inline hinglish::Dialogue make_dialogue(const std::string& topic, std::vector<std::string> texts,
                                        std::optional<std::string> persona = std::nullopt) {
    std::vector<hinglish::Turn> turns;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        turns.emplace_back(i % 2 == 0 ? hinglish::Role::user : hinglish::Role::assistant, std::move(texts[i]));
    }
    return hinglish::Dialogue(topic, std::move(persona), std::move(turns));
}

/// `n` distinct small dialogues over a handful of topics.
inline std::vector<hinglish::Dialogue> synthetic_corpus(std::size_t n, std::uint64_t seed = 1) {
    static const std::vector<std::string> words = {"yaar", "exam", "bahut", "tension", "hai", "kal",
                                                   "result", "the", "plan", "karo", "theek", "friend"};
    std::mt19937_64 rng(seed);
    std::vector<hinglish::Dialogue> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> texts;
        std::size_t turns = 2 * (1 + rng() % 3);
        for (std::size_t t = 0; t < turns; ++t) {
            std::string s = "d" + std::to_string(i);
            for (std::size_t w = 0, len = 1 + rng() % 12; w < len; ++w) s += " " + words[rng() % words.size()];
            texts.push_back(s);
        }
        out.push_back(make_dialogue("topic" + std::to_string(i % 4), texts));
    }
    return out;
}

/// Chat-completions endpoint over HTTP that delegates to a scripted
/// MockChatClient; EndpointErrors become HTTP statuses.
class MockChatServer {
public:
    explicit MockChatServer(std::vector<hinglish::mock::Action> script) : client_(std::move(script)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            auto prompt = body.at("messages").at(0).at("content").get<std::string>();
            std::string key = req.get_header_value("Authorization");
            if (key.starts_with("Bearer ")) key = key.substr(7);
            try {
                auto content = client_.complete(prompt, key);
                nlohmann::json reply = {
                    {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
                res.set_content(reply.dump(), "application/json");
            } catch (const hinglish::EndpointError& e) {
                res.status = e.status();
                res.set_content(R"({"error":"scripted"})", "application/json");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockChatServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    std::vector<hinglish::mock::RecordedCall> calls() const { return client_.calls(); }

private:
    hinglish::mock::MockChatClient client_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

/// POST /embed server returning hash-provider vectors; tracks the peak
/// number of concurrent requests.
class MockEmbedServer {
public:
    explicit MockEmbedServer(std::chrono::milliseconds delay = std::chrono::milliseconds{0}) : delay_(delay) {
        server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
        server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            int now = ++in_flight_;
            {
                std::lock_guard lock(mu_);
                peak_ = std::max(peak_, now);
                ++requests_;
            }
            std::this_thread::sleep_for(delay_);
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json vectors = nlohmann::json::array();
            for (const auto& t : body.at("texts")) vectors.push_back(provider_.token_vector(t.get<std::string>()));
            --in_flight_;
            res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockEmbedServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
    int peak_in_flight() const {
        std::lock_guard lock(mu_);
        return peak_;
    }
    int requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

private:
    hinglish::HashEmbeddingProvider provider_;
    std::chrono::milliseconds delay_;
    std::atomic<int> in_flight_{0};
    mutable std::mutex mu_;
    int peak_ = 0;
    int requests_ = 0;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace fixtures
