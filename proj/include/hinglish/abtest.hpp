#pragma once

// Blinded human A/B preference evaluation: item sets, sessions with
// randomized left/right assignment, an fsync'd append-only record log, and
// the REST service evaluators talk to.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hinglish/error.hpp"
#include "hinglish/text.hpp"

namespace hinglish::abtest {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Dimensions evaluators may rate alongside their choice.
inline const std::vector<std::string>& human_dimensions() {
    static const std::vector<std::string> dims = {"hinglish_fluency", "persona_adherence", "coherence",
                                                  "language_balance", "repetition"};
    return dims;
}

/// One prompt with responses from exactly two systems.
struct AbItem {
    std::string item_id;
    std::string prompt;
    std::array<std::string, 2> systems;
    std::array<std::string, 2> responses;
};

struct ItemSet {
    std::string id;
    std::vector<AbItem> items;
};

/// JSONL, one {"item_id", "prompt", "responses": {system: text, system: text}}
/// per line. The set id is the file stem.
inline ItemSet load_item_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read item set '" + path + "'");
    ItemSet set{std::filesystem::path(path).stem().string(), {}};
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        auto where = path + ":" + std::to_string(lineno) + ": ";
        AbItem item;
        try {
            auto j = json::parse(line);
            item.item_id = j.at("item_id").get<std::string>();
            item.prompt = j.at("prompt").get<std::string>();
            const auto& responses = j.at("responses");
            if (!responses.is_object() || responses.size() != 2) {
                throw ValidationError(where + "'responses' must map exactly two systems to texts");
            }
            std::size_t k = 0;
            for (const auto& [system, response] : responses.items()) {
                item.systems[k] = system;
                item.responses[k] = response.get<std::string>();
                ++k;
            }
        } catch (const json::exception& e) {
            throw ParseError(where + e.what());
        }
        if (!ids.insert(item.item_id).second) throw ValidationError(where + "duplicate item_id '" + item.item_id + "'");
        set.items.push_back(std::move(item));
    }
    if (set.items.empty()) throw ValidationError("item set '" + path + "' is empty");
    return set;
}

enum class Side { left, right };

inline std::string_view to_string(Side s) noexcept { return s == Side::left ? "left" : "right"; }

inline std::optional<Side> parse_side(std::string_view s) noexcept {
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    return std::nullopt;
}

/// Position of one item within a session.
struct Placement {
    std::size_t item_index;
    bool first_on_left;  // systems[0] shown on the left
};

/// Item order and left/right sides for a session, derived from `seed` alone.
inline std::vector<Placement> make_placements(std::size_t n_items, std::uint64_t seed) {
    if (n_items == 0) throw ValidationError("cannot create a session over zero items");
    std::mt19937_64 rng(seed);
    std::vector<Placement> out(n_items);
    for (std::size_t i = 0; i < n_items; ++i) out[i].item_index = i;
    for (std::size_t i = n_items - 1; i > 0; --i) {
        std::swap(out[i], out[static_cast<std::size_t>(rng() % (i + 1))]);
    }
    for (auto& p : out) p.first_on_left = (rng() >> 63) != 0;
    return out;
}

struct AbRecord {
    std::string record_id;  // session_id/item_id, unique
    std::string session_id;
    std::string item_id;
    Side choice = Side::left;
    std::string resolved_system;
    std::array<std::string, 2> compared;
    std::map<std::string, int> ratings;
    std::int64_t timestamp_ms = 0;
};

inline ordered_json to_json(const AbRecord& r) {
    ordered_json j;
    j["type"] = "record";
    j["record_id"] = r.record_id;
    j["session_id"] = r.session_id;
    j["item_id"] = r.item_id;
    j["choice"] = to_string(r.choice);
    j["resolved_system"] = r.resolved_system;
    j["compared"] = {r.compared[0], r.compared[1]};
    j["ratings"] = ordered_json::object();
    for (const auto& [k, v] : r.ratings) j["ratings"][k] = v;
    j["timestamp_ms"] = r.timestamp_ms;
    return j;
}

inline AbRecord record_from_json(const json& j) {
    AbRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    auto side = parse_side(j.at("choice").get<std::string>());
    if (!side) throw ParseError("bad choice in record");
    r.choice = *side;
    r.resolved_system = j.at("resolved_system").get<std::string>();
    r.compared = {j.at("compared").at(0).get<std::string>(), j.at("compared").at(1).get<std::string>()};
    for (const auto& [k, v] : j.at("ratings").items()) r.ratings[k] = v.get<int>();
    r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    return r;
}

// ---------------------------------------------------------------------------
// Aggregation

struct SystemStats {
    std::size_t wins = 0;
    std::size_t total = 0;

    double preference_rate() const noexcept {
        return total ? static_cast<double>(wins) / static_cast<double>(total) : 0.0;
    }
};

/// "87.8%": rate as a percentage to one decimal.
inline std::string format_rate(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
    return buf;
}

struct PreferenceSummary {
    std::size_t records = 0;
    std::map<std::string, SystemStats> systems;
    std::map<std::string, std::map<std::string, SystemStats>> items;
};

/// Counts a win for the chosen system and an appearance for both compared
/// systems of every record, overall and per item.
inline PreferenceSummary aggregate_preferences(std::span<const AbRecord> records) {
    PreferenceSummary s;
    s.records = records.size();
    for (const auto& r : records) {
        for (const auto& system : r.compared) {
            ++s.systems[system].total;
            ++s.items[r.item_id][system].total;
        }
        ++s.systems[r.resolved_system].wins;
        ++s.items[r.item_id][r.resolved_system].wins;
    }
    return s;
}

inline ordered_json to_json(const PreferenceSummary& s) {
    auto stats = [](const SystemStats& st) {
        ordered_json j;
        j["wins"] = st.wins;
        j["total"] = st.total;
        j["preference_rate"] = st.preference_rate();
        j["preference_percent"] = format_rate(st.preference_rate());
        return j;
    };
    ordered_json j;
    j["records"] = s.records;
    j["systems"] = ordered_json::object();
    for (const auto& [name, st] : s.systems) j["systems"][name] = stats(st);
    j["items"] = ordered_json::object();
    for (const auto& [item, per] : s.items) {
        j["items"][item] = ordered_json::object();
        for (const auto& [name, st] : per) j["items"][item][name] = stats(st);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Append-only log

/// O_APPEND file; each line is fsync'd before append() returns.
class AppendLog {
public:
    explicit AppendLog(const std::string& path) : path_(path) {
        fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot open log '" + path + "': " + std::strerror(errno));
    }
    AppendLog(const AppendLog&) = delete;
    AppendLog& operator=(const AppendLog&) = delete;
    ~AppendLog() {
        if (fd_ >= 0) ::close(fd_);
    }

    void append(std::string line) {
        line.push_back('\n');
        std::size_t off = 0;
        while (off < line.size()) {
            auto n = ::write(fd_, line.data() + off, line.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw IoError("write to '" + path_ + "' failed: " + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) throw IoError("fsync of '" + path_ + "' failed: " + std::strerror(errno));
    }

private:
    std::string path_;
    int fd_ = -1;
};

struct ServedItem {
    std::string item_id;
    std::string prompt;
    std::string left;
    std::string right;
    std::vector<std::string> dimensions;
};

/// The payload sent to evaluators; carries no system identifiers.
inline ordered_json to_json(const ServedItem& s) {
    ordered_json j;
    j["item_id"] = s.item_id;
    j["prompt"] = s.prompt;
    j["left"] = s.left;
    j["right"] = s.right;
    j["dimensions"] = s.dimensions;
    return j;
}

struct SessionInfo {
    std::string session_id;
    std::size_t n_items = 0;
};

struct StoreOptions {
    std::vector<std::string> dimensions = human_dimensions();
    std::function<std::uint64_t()> seed_source;       // defaults to std::random_device
    std::function<std::int64_t()> now_ms;              // defaults to the system clock
};

/// Sessions and records. The log holds both session-creation events (with
/// seeds) and records, so replaying it restores the full state; replay keeps
/// the first record per record id.
class AbStore {
public:
    AbStore(std::vector<ItemSet> item_sets, const std::string& log_path, StoreOptions options = {})
        : options_(std::move(options)) {
        for (auto& s : item_sets) {
            auto id = s.id;
            sets_.emplace(std::move(id), std::move(s));
        }
        if (!options_.seed_source) {
            options_.seed_source = [dev = std::make_shared<std::random_device>()] {
                return (static_cast<std::uint64_t>((*dev)()) << 32) | (*dev)();
            };
        }
        if (!options_.now_ms) {
            options_.now_ms = [] {
                return std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                    .count();
            };
        }
        replay(log_path);
        log_ = std::make_unique<AppendLog>(log_path);
    }

    SessionInfo create_session(const std::string& evaluator, const std::string& item_set_id) {
        if (text::trim(evaluator).empty()) throw ValidationError("evaluator label must be non-empty");
        std::lock_guard lock(mu_);
        auto set = sets_.find(item_set_id);
        if (set == sets_.end()) throw NotFoundError("unknown item set '" + item_set_id + "'");
        std::uint64_t seed = options_.seed_source();
        std::string id;
        do {
            char buf[24];
            std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(options_.seed_source()));
            id = buf;
        } while (sessions_.contains(id));
        ordered_json event;
        event["type"] = "session";
        event["session_id"] = id;
        event["evaluator"] = evaluator;
        event["item_set_id"] = item_set_id;
        event["seed"] = seed;
        log_->append(event.dump());
        auto& s = open_session(id, evaluator, item_set_id, seed);
        return {id, s.placements.size()};
    }

    /// First unanswered item in session order, or nullopt when done.
    std::optional<ServedItem> next_item(const std::string& session_id) const {
        std::lock_guard lock(mu_);
        const auto& s = session(session_id);
        const auto& items = sets_.at(s.item_set_id).items;
        for (const auto& p : s.placements) {
            const auto& item = items[p.item_index];
            if (s.answered.contains(item.item_id)) continue;
            ServedItem served{item.item_id, item.prompt, item.responses[p.first_on_left ? 0 : 1],
                              item.responses[p.first_on_left ? 1 : 0], options_.dimensions};
            return served;
        }
        return std::nullopt;
    }

    /// Validates, appends durably, then returns the record.
    AbRecord submit(const std::string& session_id, const std::string& item_id, Side choice,
                    const std::map<std::string, int>& ratings = {}) {
        std::lock_guard lock(mu_);
        auto& s = session(session_id);
        const auto& items = sets_.at(s.item_set_id).items;
        const Placement* placement = nullptr;
        for (const auto& p : s.placements) {
            if (items[p.item_index].item_id == item_id) placement = &p;
        }
        if (!placement) throw NotFoundError("unknown item '" + item_id + "' in session '" + session_id + "'");
        if (s.answered.contains(item_id)) throw ConflictError("item '" + item_id + "' already answered");
        if (!ratings.empty()) {
            for (const auto& d : options_.dimensions) {
                if (!ratings.contains(d)) throw ValidationError("missing rating for '" + d + "'");
            }
            for (const auto& [d, v] : ratings) {
                if (std::find(options_.dimensions.begin(), options_.dimensions.end(), d) == options_.dimensions.end()) {
                    throw ValidationError("unknown rating dimension '" + d + "'");
                }
                if (v < 1 || v > 5) throw ValidationError("rating for '" + d + "' must be in [1, 5]");
            }
        }
        const auto& item = items[placement->item_index];
        bool first = (choice == Side::left) == placement->first_on_left;
        AbRecord r;
        r.record_id = session_id + "/" + item_id;
        r.session_id = session_id;
        r.item_id = item_id;
        r.choice = choice;
        r.resolved_system = item.systems[first ? 0 : 1];
        r.compared = item.systems;
        r.ratings = ratings;
        r.timestamp_ms = options_.now_ms();
        log_->append(to_json(r).dump());
        s.answered.insert(item_id);
        records_.push_back(r);
        return r;
    }

    std::vector<AbRecord> records() const {
        std::lock_guard lock(mu_);
        return records_;
    }

    PreferenceSummary aggregate() const {
        std::lock_guard lock(mu_);
        return aggregate_preferences(records_);
    }

    std::size_t skipped_log_lines() const noexcept { return skipped_lines_; }
    const std::vector<std::string>& dimensions() const noexcept { return options_.dimensions; }

    std::vector<Placement> placements(const std::string& session_id) const {
        std::lock_guard lock(mu_);
        return session(session_id).placements;
    }

    /// The systems id strings of every loaded item set.
    std::set<std::string> system_ids() const {
        std::set<std::string> out;
        for (const auto& [id, set] : sets_) {
            for (const auto& item : set.items) out.insert(item.systems.begin(), item.systems.end());
        }
        return out;
    }

private:
    struct Session {
        std::string evaluator;
        std::string item_set_id;
        std::uint64_t seed = 0;
        std::vector<Placement> placements;
        std::set<std::string> answered;
    };

    Session& open_session(const std::string& id, const std::string& evaluator, const std::string& item_set_id,
                          std::uint64_t seed) {
        auto set = sets_.find(item_set_id);
        if (set == sets_.end()) throw NotFoundError("unknown item set '" + item_set_id + "'");
        Session s{evaluator, item_set_id, seed, make_placements(set->second.items.size(), seed), {}};
        return sessions_.insert_or_assign(id, std::move(s)).first->second;
    }

    Session& session(const std::string& id) {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
        return it->second;
    }
    const Session& session(const std::string& id) const { return const_cast<AbStore*>(this)->session(id); }

    void replay(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return;
        std::set<std::string> seen;
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            try {
                auto j = json::parse(line);
                auto type = j.at("type").get<std::string>();
                if (type == "session") {
                    open_session(j.at("session_id").get<std::string>(), j.at("evaluator").get<std::string>(),
                                 j.at("item_set_id").get<std::string>(), j.at("seed").get<std::uint64_t>());
                } else if (type == "record") {
                    auto r = record_from_json(j);
                    if (!seen.insert(r.record_id).second) continue;
                    auto it = sessions_.find(r.session_id);
                    if (it != sessions_.end()) it->second.answered.insert(r.item_id);
                    records_.push_back(std::move(r));
                } else {
                    ++skipped_lines_;
                }
            } catch (const std::exception&) {
                // A torn final line from a crash mid-append lands here.
                ++skipped_lines_;
            }
        }
    }

    mutable std::mutex mu_;
    StoreOptions options_;
    std::map<std::string, ItemSet> sets_;
    std::map<std::string, Session> sessions_;
    std::vector<AbRecord> records_;
    std::unique_ptr<AppendLog> log_;
    std::size_t skipped_lines_ = 0;
};

// ---------------------------------------------------------------------------
// HTTP service

/// REST front end over an AbStore:
///   POST /sessions                              {evaluator, item_set_id}
///   GET  /sessions/{id}/next                    item or 204
///   POST /sessions/{id}/items/{item_id}/choice  {choice, ratings?}
///   GET  /aggregate
class AbServer {
public:
    explicit AbServer(AbStore& store) : store_(store) { install_routes(); }
    AbServer(const AbServer&) = delete;
    AbServer& operator=(const AbServer&) = delete;
    ~AbServer() { stop(); }

    /// Binds and serves on a background thread; returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return bound;
    }

    /// Serves on the calling thread until stop().
    void run(const std::string& host, int port) {
        if (!server_.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

private:
    static void send_json(httplib::Response& res, int status, const ordered_json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, int status, const std::string& message) {
        send_json(res, status, ordered_json{{"error", message}});
    }

    template <class Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const NotFoundError& e) {
            send_error(res, 404, e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, e.what());
        } catch (const ValidationError& e) {
            send_error(res, 422, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("bad request body: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    }

    void install_routes() {
        server_.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        });
        server_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                auto body = json::parse(req.body);
                auto info = store_.create_session(body.at("evaluator").get<std::string>(),
                                                  body.at("item_set_id").get<std::string>());
                send_json(res, 200, ordered_json{{"session_id", info.session_id}, {"n_items", info.n_items}});
            });
        });

        server_.Get(R"(/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                auto item = store_.next_item(req.matches[1]);
                if (!item) {
                    res.status = 204;
                    return;
                }
                send_json(res, 200, to_json(*item));
            });
        });

        server_.Post(R"(/sessions/([^/]+)/items/([^/]+)/choice)",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         guarded(res, [&] {
                             auto body = json::parse(req.body);
                             auto side = parse_side(body.at("choice").get<std::string>());
                             if (!side) throw ValidationError("choice must be 'left' or 'right'");
                             std::map<std::string, int> ratings;
                             if (body.contains("ratings") && !body["ratings"].is_null()) {
                                 for (const auto& [k, v] : body["ratings"].items()) {
                                     if (!v.is_number_integer()) throw ValidationError("rating for '" + k + "' must be an integer");
                                     ratings[k] = v.get<int>();
                                 }
                             }
                             auto rec = store_.submit(req.matches[1], req.matches[2], *side, ratings);
                             send_json(res, 200, ordered_json{{"acknowledged", true}, {"record_id", rec.record_id}});
                         });
                     });

        server_.Get("/aggregate", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, to_json(store_.aggregate())); });
        });
    }

    AbStore& store_;
    httplib::Server server_;
    std::thread thread_;
};

}  // namespace hinglish::abtest
