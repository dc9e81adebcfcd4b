#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "hinglish/hinglish.hpp"

namespace hinglish::cli {
namespace {

namespace fs = std::filesystem;

const std::string kDataDir = HINGLISH_DEFAULT_DATA_DIR;

std::string data_file(const char* name) { return kDataDir + "/" + name; }

/// Loads --config if given; unset paths fall back to the shipped data files.
PipelineConfig load_config(const std::string& path) {
    PipelineConfig p = path.empty() ? PipelineConfig{} : load_pipeline_config(path);
    if (!p.topics) p.topics = data_file("topics.json");
    if (!p.hindi_lexicon) p.hindi_lexicon = data_file("lexicon_hi.txt");
    if (!p.english_lexicon) p.english_lexicon = data_file("lexicon_en.txt");
    if (!p.variant_table) p.variant_table = data_file("variants.tsv");
    if (!p.rubric) p.rubric = data_file("judge_rubric.json");
    return p;
}

Lexicons lexicons_of(const PipelineConfig& p) { return load_lexicons(*p.hindi_lexicon, *p.english_lexicon); }

void write_text(const std::string& path, const std::string& content) {
    auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("error while writing '" + path + "'");
}

void ensure_parent(const std::string& path) {
    auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file '" + path + "'");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

/// Input lines from --text or --in.
std::vector<std::string> input_lines(const std::string& text_arg, const std::string& in_path) {
    if (!text_arg.empty() && !in_path.empty()) throw ValidationError("use either --text or --in, not both");
    if (!text_arg.empty()) return {text_arg};
    if (in_path.empty()) throw ValidationError("one of --text or --in is required");
    return read_lines(in_path);
}

/// Loads a corpus, refusing files with invalid records.
std::vector<Dialogue> load_valid_corpus(const std::string& path, spdlog::logger& log) {
    auto res = load_corpus(path);
    for (const auto& e : res.errors) log.error("{}:{}: {}", path, e.line, e.message);
    if (!res.errors.empty()) {
        throw ValidationError(path + ": " + std::to_string(res.errors.size()) + " invalid record(s)");
    }
    return std::move(res.dialogues);
}

std::optional<mock::Action> parse_action(std::string_view s) {
    static const std::map<std::string_view, mock::Action> names = {
        {"ok", mock::Action::ok},
        {"rate_limited", mock::Action::rate_limited},
        {"server_error", mock::Action::server_error},
        {"bad_request", mock::Action::bad_request},
        {"malformed", mock::Action::malformed},
        {"assistant_first", mock::Action::assistant_first},
        {"english_only", mock::Action::english_only},
        {"short_turns", mock::Action::short_turns},
    };
    auto it = names.find(s);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

/// Offline judge: half-point scores derived from a hash of the prompt.
class MockJudgeClient final : public ChatClient {
public:
    std::string complete(const std::string& prompt, const std::string&) override {
        std::mt19937_64 rng(text::fnv1a64(prompt));
        JudgeVerdict v;
        for (auto d : kAllDimensions) v.scores[d] = 2.0 + 0.5 * static_cast<double>(rng() % 7);
        v.rationale = "mock judgement";
        return render_verdict(v);
    }
    std::string model() const override { return "mock-judge"; }
};

ordered_json verdict_to_json(const JudgeVerdict& v) {
    ordered_json j;
    j["prompt_id"] = v.prompt_id;
    j["judge_model"] = v.judge_model;
    j["scores"] = ordered_json::object();
    for (const auto& [d, s] : v.scores) j["scores"][std::string(to_string(d))] = s;
    j["rationale"] = v.rationale;
    return j;
}

/// Reads verdict JSONL; scores go through parse_verdict so range rules apply.
std::vector<JudgeVerdict> load_verdicts(const std::string& path) {
    std::vector<JudgeVerdict> out;
    std::size_t lineno = 0;
    for (const auto& line : read_lines(path)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            const auto& scores = j.at("scores");
            std::vector<RubricDimension> dims;
            for (const auto& [name, value] : scores.items()) {
                auto d = parse_dimension(name);
                if (!d) throw ParseError("unknown dimension '" + name + "'");
                dims.push_back(*d);
            }
            auto v = parse_verdict(scores.dump(), dims);
            v.prompt_id = j.value("prompt_id", "");
            v.judge_model = j.value("judge_model", "");
            v.rationale = j.value("rationale", "");
            out.push_back(std::move(v));
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError("no verdicts in '" + path + "'");
    return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec) {
    if (spec.empty() || spec == "hash") return std::make_unique<HashEmbeddingProvider>();
    if (spec.starts_with("http://")) return std::make_unique<HttpEmbeddingProvider>(spec);
    throw ValidationError("embedding provider must be 'hash' or an http:// URL, got '" + spec + "'");
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Shared {
    std::string config;
};

struct GenerateArgs {
    std::string out;
    std::string report;
    std::string topics;
    bool mock = false;
    std::string mock_script;
    std::optional<std::size_t> dialogues_per_topic;
    std::optional<std::size_t> max_topics;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const Shared& sh, const GenerateArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    auto topics = load_topics(a.topics.empty() ? *cfg.topics : a.topics);
    if (a.max_topics && *a.max_topics < topics.size()) topics.resize(*a.max_topics);
    auto gen = cfg.generation;
    if (a.dialogues_per_topic) gen.dialogues_per_topic = *a.dialogues_per_topic;
    if (a.seed) gen.seed = *a.seed;
    std::string out_path = a.out.empty() ? cfg.corpus.value_or("") : a.out;
    if (out_path.empty()) throw ValidationError("no output path: pass --out or set paths.corpus");
    auto lex = lexicons_of(cfg);
    TextPipeline pipeline{load_variant_table(*cfg.variant_table), {}};

    std::unique_ptr<ChatClient> client;
    std::unique_ptr<Clock> clock;
    std::vector<std::string> keys;
    if (a.mock) {
        std::vector<mock::Action> script;
        for (auto name : KeyValueConfig::parse("s = " + a.mock_script).get_list("s")) {
            auto action = parse_action(name);
            if (!action) throw ValidationError("unknown mock action '" + name + "'");
            script.push_back(*action);
        }
        client = std::make_unique<mock::MockChatClient>(std::move(script));
        clock = std::make_unique<VirtualClock>();
        keys = {"mock-key-1", "mock-key-2"};
    } else {
        if (!cfg.generator) throw ValidationError("no [generator] endpoint configured; pass --config or --mock");
        keys = cfg.generator->keys;
        client = std::make_unique<HttpChatClient>(*cfg.generator);
        clock = std::make_unique<SystemClock>();
    }
    KeyPool pool(keys, cfg.key_cooldown);
    log.info("generating {} dialogue(s) for each of {} topic(s) with {}", gen.dialogues_per_topic, topics.size(),
             client->model());

    std::string report_path = a.report.empty() ? out_path + ".report.json" : a.report;
    GenerationResult result;
    try {
        result = run_generation(topics, gen, *client, pool, *clock, lex, pipeline);
    } catch (const GenerationFailed& e) {
        write_text(report_path, to_json(e.report()).dump(2) + "\n");
        throw;
    }
    ensure_parent(out_path);
    write_corpus(result.dialogues, out_path);
    write_text(report_path, to_json(result.report).dump(2) + "\n");
    log.info("{} dialogue(s) accepted, {} failed, {} endpoint call(s), {} token(s)", result.report.succeeded,
             result.report.failed, result.report.endpoint_calls, result.report.tokens);
    ordered_json summary = {{"corpus", out_path},
                            {"report", report_path},
                            {"dialogues", result.dialogues.size()},
                            {"failed", result.report.failed},
                            {"endpoint_calls", result.report.endpoint_calls},
                            {"tokens", result.report.tokens}};
    out << summary.dump() << "\n";
    return 0;
}

struct TextArgs {
    std::string text;
    std::string in;
    std::string out;
    bool no_clean = false;
    bool corpus = false;
};

int cmd_normalize(const Shared& sh, const TextArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    auto table = load_variant_table(*cfg.variant_table);
    CleaningConfig cleaning;
    auto apply = [&](std::string_view s) {
        return a.no_clean ? normalize_text(s, table) : clean_and_normalize(s, cleaning, table);
    };
    if (a.corpus) {
        if (a.in.empty() || a.out.empty()) throw ValidationError("--corpus needs --in and --out");
        auto dialogues = load_valid_corpus(a.in, log);
        std::vector<Dialogue> cleaned;
        for (const auto& d : dialogues) {
            std::vector<Turn> turns;
            for (const auto& t : d.turns()) turns.emplace_back(t.role(), apply(t.text()));
            cleaned.emplace_back(d.topic(), d.persona(), std::move(turns), d.meta());
        }
        ensure_parent(a.out);
        write_corpus(cleaned, a.out);
        out << ordered_json{{"dialogues", cleaned.size()}, {"out", a.out}}.dump() << "\n";
        return 0;
    }
    std::vector<std::string> result;
    for (const auto& line : input_lines(a.text, a.in)) result.push_back(apply(line));
    if (a.out.empty()) out << join_lines(result);
    else write_text(a.out, join_lines(result));
    return 0;
}

int cmd_tag(const Shared& sh, const TextArgs& a, std::ostream& out, spdlog::logger&) {
    auto cfg = load_config(sh.config);
    auto lex = lexicons_of(cfg);
    std::vector<std::string> lines;
    for (const auto& line : input_lines(a.text, a.in)) {
        auto tokens = tag_tokens(line, lex);
        ordered_json j;
        j["text"] = line;
        j["tokens"] = ordered_json::array();
        for (const auto& t : tokens) j["tokens"].push_back({{"token", t.text}, {"tag", to_string(t.tag)}});
        j["cmi"] = compute_cmi(tokens);
        j["switch_index"] = compute_switch_index(tokens);
        lines.push_back(j.dump());
    }
    if (a.out.empty()) out << join_lines(lines);
    else write_text(a.out, join_lines(lines));
    return 0;
}

struct MetricsArgs {
    std::string in;
    std::string out;
    bool all_turns = false;
    std::size_t n = 3;
};

int cmd_metrics(const Shared& sh, const MetricsArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    auto lex = lexicons_of(cfg);
    auto dialogues = load_valid_corpus(a.in, log);
    std::vector<MetricReport> reports;
    if (a.all_turns) {
        for (const auto& d : dialogues) {
            for (const auto& t : d.turns()) reports.push_back(measure_response(t.text(), lex, a.n));
        }
    } else {
        reports = measure_assistant_turns(dialogues, lex, a.n);
    }
    auto agg = aggregate_corpus(reports);
    ordered_json j;
    j["corpus"] = a.in;
    j["dialogues"] = dialogues.size();
    j["responses"] = reports.size();
    j["scope"] = a.all_turns ? "all_turns" : "assistant_turns";
    j["repetition_n"] = a.n;
    j["tokens"] = count_tokens(dialogues);
    j["aggregate"] = to_json(agg);
    if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    log.info("cmi {:.3f}, switch index {:.3f}, mean length {:.1f} words over {} response(s)", agg.cmi,
             agg.switch_index, agg.length_words, reports.size());
    return 0;
}

struct SemsimArgs {
    std::string candidate;
    std::string reference;
    std::string pairs;
    std::string provider;
    std::string out;
    bool normalize = false;
};

int cmd_semsim(const Shared& sh, const SemsimArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    auto provider = make_provider(a.provider.empty() ? cfg.embedding_provider.value_or("hash") : a.provider);
    std::optional<VariantTable> table;
    if (a.normalize) table = load_variant_table(*cfg.variant_table);
    const VariantTable* tp = table ? &*table : nullptr;

    std::vector<std::pair<std::string, std::string>> pairs;
    if (!a.pairs.empty()) {
        std::size_t lineno = 0;
        for (const auto& line : read_lines(a.pairs)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            try {
                auto j = json::parse(line);
                pairs.emplace_back(j.at("candidate").get<std::string>(), j.at("reference").get<std::string>());
            } catch (const json::exception& e) {
                throw ParseError(a.pairs + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    } else {
        if (a.candidate.empty() || a.reference.empty()) {
            throw ValidationError("pass --candidate and --reference, or --pairs");
        }
        pairs.emplace_back(a.candidate, a.reference);
    }
    ordered_json results = ordered_json::array();
    double f1 = 0.0, cosine = 0.0;
    for (const auto& [c, r] : pairs) {
        auto s = score_pair(c, r, *provider, tp);
        results.push_back({{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"cosine", s.cosine}});
        f1 += s.f1;
        cosine += s.cosine;
    }
    ordered_json j;
    j["pairs"] = pairs.size();
    j["mean_f1"] = f1 / static_cast<double>(pairs.size());
    j["mean_cosine"] = cosine / static_cast<double>(pairs.size());
    j["results"] = results;
    if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    log.info("mean BERTScore F1 {:.3f} over {} pair(s)", j["mean_f1"].get<double>(), pairs.size());
    return 0;
}

struct SplitArgs {
    std::string in;
    std::string ratios;
    std::optional<std::int64_t> seed;
    std::string out_dir;
    bool stratify = false;
};

int cmd_split(const Shared& sh, const SplitArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    auto ratios = a.ratios.empty() ? cfg.ratios : parse_ratios(a.ratios);
    auto seed = a.seed.value_or(cfg.split_seed);
    auto dialogues = load_valid_corpus(a.in, log);
    auto splits = split_corpus(dialogues, ratios, seed, a.stratify);
    fs::path dir = a.out_dir.empty() ? fs::path(a.in).parent_path() : fs::path(a.out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    write_corpus(splits.train, (dir / "train.jsonl").string());
    write_corpus(splits.validation, (dir / "validation.jsonl").string());
    write_corpus(splits.test, (dir / "test.jsonl").string());
    auto manifest = to_json(make_manifest(splits, ratios, seed));
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    log.info("split {} dialogue(s) into {}/{}/{}", dialogues.size(), splits.train.size(), splits.validation.size(),
             splits.test.size());
    out << manifest.dump(2) << "\n";
    return 0;
}

struct ExportArgs {
    std::string in;
    std::string out;
};

int cmd_export(const Shared&, const ExportArgs& a, std::ostream& out, spdlog::logger& log) {
    auto dialogues = load_valid_corpus(a.in, log);
    ensure_parent(a.out);
    auto n = export_chat_format(dialogues, a.out);
    out << ordered_json{{"records", n}, {"out", a.out}}.dump() << "\n";
    return 0;
}

struct JudgeArgs {
    std::string items;
    std::vector<std::string> compare;
    std::string labels = "Base,LoRA";
    std::string out;
    bool mock = false;
    std::size_t parallel = 4;
    std::uint64_t seed = 0;
};

int cmd_judge(const Shared& sh, const JudgeArgs& a, std::ostream& out, spdlog::logger& log) {
    auto cfg = load_config(sh.config);
    if (!a.compare.empty()) {
        auto labels = KeyValueConfig::parse("l = " + a.labels).get_list("l");
        if (labels.size() != 2) throw ValidationError("--labels needs two comma-separated names");
        auto report = compare_systems(load_verdicts(a.compare[0]), load_verdicts(a.compare[1]), labels[0], labels[1]);
        if (!a.out.empty()) write_text(a.out, to_json(report).dump(2) + "\n");
        out << render_table(report);
        return 0;
    }
    if (a.items.empty()) throw ValidationError("pass --items to score or --compare A B to compare");
    if (a.out.empty()) throw ValidationError("--items needs --out");
    std::vector<JudgeItem> items;
    std::size_t lineno = 0;
    for (const auto& line : read_lines(a.items)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            items.push_back({j.at("prompt_id").get<std::string>(), j.value("context", ""),
                             j.at("response").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(a.items + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    auto rubric = load_rubric(*cfg.rubric);
    std::unique_ptr<ChatClient> client;
    std::unique_ptr<Clock> clock;
    std::vector<std::string> keys{""};
    if (a.mock) {
        client = std::make_unique<MockJudgeClient>();
        clock = std::make_unique<VirtualClock>();
    } else {
        if (!cfg.judge) throw ValidationError("no [judge] endpoint configured; pass --config or --mock");
        keys = cfg.judge->keys;
        client = std::make_unique<HttpChatClient>(*cfg.judge);
        clock = std::make_unique<SystemClock>();
    }
    KeyPool pool(keys, cfg.key_cooldown);
    auto run = run_judge(items, *client, pool, *clock, cfg.generation.retry_policy(), a.seed, a.parallel, rubric);
    std::vector<std::string> lines;
    for (const auto& v : run.verdicts) lines.push_back(verdict_to_json(v).dump());
    write_text(a.out, join_lines(lines));
    for (const auto& [id, why] : run.failures) log.warn("item {} not scored: {}", id, why);
    out << ordered_json{{"scored", run.verdicts.size()}, {"failed", run.failures.size()},
                        {"endpoint_calls", run.endpoint_calls}, {"out", a.out}}
               .dump()
        << "\n";
    return run.failures.empty() ? 0 : 1;
}

struct ServeArgs {
    std::vector<std::string> items;
    std::string log_path;
    std::string host = "127.0.0.1";
    int port = 8080;
};

int cmd_serve(const Shared&, const ServeArgs& a, std::ostream&, spdlog::logger& log) {
    std::vector<abtest::ItemSet> sets;
    for (const auto& path : a.items) sets.push_back(abtest::load_item_set(path));
    ensure_parent(a.log_path);
    abtest::AbStore store(std::move(sets), a.log_path);
    if (store.skipped_log_lines()) log.warn("skipped {} unreadable log line(s)", store.skipped_log_lines());
    log.info("restored {} record(s); serving on {}:{}", store.records().size(), a.host, a.port);
    abtest::AbServer server(store);
    server.run(a.host, a.port);
    return 0;
}

struct ReportArgs {
    std::string comparison;
    std::string abtest_log;
    std::string metrics;
};

int cmd_report(const Shared&, const ReportArgs& a, std::ostream& out, spdlog::logger&) {
    if (a.comparison.empty() && a.abtest_log.empty() && a.metrics.empty()) {
        throw ValidationError("pass at least one of --comparison, --abtest-log, --metrics");
    }
    auto read_json = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read file '" + path + "'");
        try {
            return json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
    };
    if (!a.comparison.empty()) out << render_table(comparison_from_json(read_json(a.comparison)));
    if (!a.metrics.empty()) {
        auto j = read_json(a.metrics);
        const auto& agg = j.at("aggregate");
        out << std::fixed << std::setprecision(3);
        out << "responses:        " << j.at("responses").get<std::size_t>() << "\n";
        out << "CMI:              " << agg.at("cmi").get<double>() << "\n";
        out << "switch index:     " << agg.at("switch_index").get<double>() << "\n";
        out << "hindi fraction:   " << agg.at("hindi_fraction").get<double>() << "\n";
        out << "repetition:       " << agg.at("repetition").get<double>() << "\n";
        out << std::setprecision(1);
        out << "length (words):   " << agg.at("length_words").get<double>() << "\n";
        out << std::defaultfloat;
    }
    if (!a.abtest_log.empty()) {
        std::vector<abtest::AbRecord> records;
        std::set<std::string> seen;
        for (const auto& line : read_lines(a.abtest_log)) {
            try {
                auto j = json::parse(line);
                if (j.value("type", "") != "record") continue;
                auto r = abtest::record_from_json(j);
                if (seen.insert(r.record_id).second) records.push_back(std::move(r));
            } catch (const std::exception&) {
            }
        }
        auto summary = abtest::aggregate_preferences(records);
        out << "records: " << summary.records << "\n";
        for (const auto& [name, st] : summary.systems) {
            out << name << ": " << st.wins << "/" << st.total << " preferred ("
                << abtest::format_rate(st.preference_rate()) << ")\n";
        }
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("hinglish", sink);
    log->set_pattern("%Y-%m-%dT%H:%M:%S [%l] %v");

    CLI::App app{"Hinglish corpus and evaluation toolkit", "hinglish"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    Shared sh;
    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", sh.config, "Pipeline config file")->check(CLI::ExistingFile);
        return sub;
    };

    GenerateArgs gen;
    auto* generate = with_config(app.add_subcommand("generate", "Generate dialogues for every topic"));
    generate->add_option("--out", gen.out, "Corpus JSONL to write (default paths.corpus)");
    generate->add_option("--report", gen.report, "Run report JSON (default <out>.report.json)");
    generate->add_option("--topics", gen.topics, "Topic file (default paths.topics)");
    generate->add_flag("--mock", gen.mock, "Use the built-in offline generator");
    generate->add_option("--mock-script", gen.mock_script, "Comma-separated mock actions for the first calls");
    generate->add_option("--dialogues-per-topic", gen.dialogues_per_topic);
    generate->add_option("--max-topics", gen.max_topics, "Use only the first N topics");
    generate->add_option("--seed", gen.seed, "Backoff jitter seed");

    TextArgs norm;
    auto* normalize = with_config(app.add_subcommand("normalize", "Clean text and map spelling variants"));
    normalize->add_option("--text", norm.text, "Text to normalize");
    normalize->add_option("--in", norm.in, "File of lines, or a corpus with --corpus");
    normalize->add_option("--out", norm.out, "Output file (default standard output)");
    normalize->add_flag("--no-clean", norm.no_clean, "Only map variants");
    normalize->add_flag("--corpus", norm.corpus, "Treat --in as a corpus JSONL and rewrite every turn");

    TextArgs tag_args;
    auto* tag = with_config(app.add_subcommand("tag", "Tag tokens as HI, EN or OTHER"));
    tag->add_option("--text", tag_args.text, "Text to tag");
    tag->add_option("--in", tag_args.in, "File of lines");
    tag->add_option("--out", tag_args.out, "Output JSONL (default standard output)");

    MetricsArgs met;
    auto* metrics = with_config(app.add_subcommand("metrics", "Code-mixing and repetition metrics for a corpus"));
    metrics->add_option("--in", met.in, "Corpus JSONL")->required();
    metrics->add_option("--out", met.out, "Metrics JSON to write");
    metrics->add_flag("--all-turns", met.all_turns, "Measure user turns too");
    metrics->add_option("-n,--ngram", met.n, "Repetition n-gram size")->check(CLI::PositiveNumber);

    SemsimArgs sem;
    auto* semsim = with_config(app.add_subcommand("semsim", "BERTScore and cosine similarity"));
    semsim->add_option("--candidate", sem.candidate);
    semsim->add_option("--reference", sem.reference);
    semsim->add_option("--pairs", sem.pairs, "JSONL of {candidate, reference}");
    semsim->add_option("--provider", sem.provider, "'hash' or an http:// embedding endpoint");
    semsim->add_option("--out", sem.out, "Result JSON to write");
    semsim->add_flag("--normalize", sem.normalize, "Clean and normalize both texts first");

    SplitArgs spl;
    auto* split = with_config(app.add_subcommand("split", "Deterministic train/validation/test split"));
    split->add_option("--in", spl.in, "Corpus JSONL")->required();
    split->add_option("--ratios", spl.ratios, "train,validation,test (default split.ratios)");
    split->add_option("--seed", spl.seed, "Split seed (default split.seed)");
    split->add_option("--out-dir", spl.out_dir, "Directory for the split files (default beside --in)");
    split->add_flag("--stratify", spl.stratify, "Apply the split within each topic");

    ExportArgs exp;
    auto* exporter = with_config(app.add_subcommand("export", "Write chat-format fine-tuning records"));
    exporter->add_option("--in", exp.in, "Corpus JSONL")->required();
    exporter->add_option("--out", exp.out, "Chat-format JSONL")->required();

    JudgeArgs jud;
    auto* judge = with_config(app.add_subcommand("judge", "Score responses with a judge model or compare verdicts"));
    judge->add_option("--items", jud.items, "JSONL of {prompt_id, context, response} to score");
    judge->add_option("--compare", jud.compare, "Two verdict files: baseline then candidate")->expected(2);
    judge->add_option("--labels", jud.labels, "Names for the compared systems");
    judge->add_option("--out", jud.out, "Verdict JSONL or comparison JSON to write");
    judge->add_flag("--mock", jud.mock, "Use the built-in offline judge");
    judge->add_option("--parallel", jud.parallel, "Judge calls in flight")->check(CLI::PositiveNumber);
    judge->add_option("--seed", jud.seed, "Backoff jitter seed");

    ServeArgs srv;
    auto* serve = with_config(app.add_subcommand("serve-abtest", "Serve blind A/B preference sessions over HTTP"));
    serve->add_option("--items", srv.items, "Item set JSONL files")->required()->check(CLI::ExistingFile);
    serve->add_option("--log", srv.log_path, "Append-only record log")->required();
    serve->add_option("--host", srv.host);
    serve->add_option("--port", srv.port);

    ReportArgs rep;
    auto* report = with_config(app.add_subcommand("report", "Render stored results as tables"));
    report->add_option("--comparison", rep.comparison, "comparison.json from judge --compare");
    report->add_option("--metrics", rep.metrics, "Metrics JSON from metrics --out");
    report->add_option("--abtest-log", rep.abtest_log, "Record log from serve-abtest");

    if (args.empty()) {
        out << app.help();
        return 2;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (app.exit(e, out, err) == 0) return 0;
        out << app.help();
        return 2;
    }

    try {
        if (*generate) return cmd_generate(sh, gen, out, *log);
        if (*normalize) return cmd_normalize(sh, norm, out, *log);
        if (*tag) return cmd_tag(sh, tag_args, out, *log);
        if (*metrics) return cmd_metrics(sh, met, out, *log);
        if (*semsim) return cmd_semsim(sh, sem, out, *log);
        if (*split) return cmd_split(sh, spl, out, *log);
        if (*exporter) return cmd_export(sh, exp, out, *log);
        if (*judge) return cmd_judge(sh, jud, out, *log);
        if (*serve) return cmd_serve(sh, srv, out, *log);
        if (*report) return cmd_report(sh, rep, out, *log);
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        log->flush();
        return 1;
    }
    return 2;
}

}  // namespace hinglish::cli
