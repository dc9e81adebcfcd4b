#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "support/fixtures.hpp"

using namespace hinglish;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, NoArgumentsPrintsHelpAndExitsTwo) {
    auto r = run({});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("generate"), std::string::npos);
    EXPECT_NE(r.out.find("serve-abtest"), std::string::npos);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
    auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MetricsOnMissingFileNamesPath) {
    auto r = run({"metrics", "--in", "/nonexistent/corpus.jsonl"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/nonexistent/corpus.jsonl"), std::string::npos);
}

TEST(Cli, SplitWritesThreeFilesAndManifest) {
    fixtures::TempDir dir;
    write_corpus(fixtures::synthetic_corpus(10), dir.file("c.jsonl"));
    auto r = run({"split", "--in", dir.file("c.jsonl"), "--ratios", "0.8,0.1,0.1", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"train.jsonl", "validation.jsonl", "test.jsonl", "manifest.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir.file(f))) << f;
    }
    auto manifest = json::parse(fixtures::read_file(dir.file("manifest.json")));
    EXPECT_EQ(manifest["counts"]["train"], 8);
    EXPECT_EQ(manifest["split_seed"], 7);
    auto first = fixtures::read_file(dir.file("train.jsonl"));
    ASSERT_EQ(run({"split", "--in", dir.file("c.jsonl"), "--ratios", "0.8,0.1,0.1", "--seed", "7"}).code, 0);
    EXPECT_EQ(fixtures::read_file(dir.file("train.jsonl")), first);
}

TEST(Cli, SplitRejectsBadRatios) {
    fixtures::TempDir dir;
    write_corpus(fixtures::synthetic_corpus(10), dir.file("c.jsonl"));
    EXPECT_EQ(run({"split", "--in", dir.file("c.jsonl"), "--ratios", "0.5,0.1,0.1"}).code, 1);
}

TEST(Cli, GenerateMockIsReproducibleAndFeedsDownstream) {
    fixtures::TempDir dir;
    std::vector<std::string> args = {"generate", "--mock", "--max-topics", "3", "--dialogues-per-topic", "2",
                                     "--mock-script", "english_only,rate_limited", "--out", dir.file("a.jsonl")};
    auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    args.back() = dir.file("b.jsonl");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(fixtures::read_file(dir.file("a.jsonl")), fixtures::read_file(dir.file("b.jsonl")));
    EXPECT_EQ(fixtures::read_file(dir.file("a.jsonl.report.json")), fixtures::read_file(dir.file("b.jsonl.report.json")));
    EXPECT_EQ(load_corpus(dir.file("a.jsonl")).dialogues.size(), 6u);

    auto m = run({"metrics", "--in", dir.file("a.jsonl"), "--out", dir.file("m.json")});
    ASSERT_EQ(m.code, 0) << m.err;
    auto mj = json::parse(fixtures::read_file(dir.file("m.json")));
    EXPECT_EQ(mj["responses"], 24);
    EXPECT_GT(mj["aggregate"]["cmi"].get<double>(), 0.05);
    EXPECT_EQ(run({"report", "--metrics", dir.file("m.json")}).code, 0);

    auto e = run({"export", "--in", dir.file("a.jsonl"), "--out", dir.file("chat.jsonl")});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("\"records\":6"), std::string::npos);
}

TEST(Cli, NormalizeAndTag) {
    auto n = run({"normalize", "--text", "Bhot, bhot!!!! 😂"});
    ASSERT_EQ(n.code, 0) << n.err;
    EXPECT_EQ(n.out, "bahut, bahut!\n");
    auto t = run({"tag", "--text", "kya scene hai 123"});
    ASSERT_EQ(t.code, 0) << t.err;
    auto j = json::parse(t.out);
    EXPECT_EQ(j["tokens"][1]["tag"], "EN");
    EXPECT_EQ(j["tokens"][3]["tag"], "OTHER");
    EXPECT_EQ(run({"normalize"}).code, 1);
}

TEST(Cli, Semsim) {
    auto r = run({"semsim", "--candidate", "kal milte hai", "--reference", "kal milte hai"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["mean_f1"].get<double>(), 1.0);
    auto n = run({"semsim", "--candidate", "bhot accha", "--reference", "bahut accha", "--normalize"});
    EXPECT_EQ(json::parse(n.out)["mean_f1"].get<double>(), 1.0);
    EXPECT_EQ(run({"semsim", "--candidate", "x", "--reference", "y", "--provider", "ftp://x"}).code, 1);
}

TEST(Cli, JudgeScoreCompareAndReport) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("items.jsonl"),
                         R"({"prompt_id":"p1","context":"user: hi","response":"haan yaar bolo"})" "\n"
                         R"({"prompt_id":"p2","context":"user: exam","response":"tension mat lo"})" "\n");
    auto s = run({"judge", "--mock", "--items", dir.file("items.jsonl"), "--out", dir.file("a.jsonl")});
    ASSERT_EQ(s.code, 0) << s.err;

    fixtures::write_file(dir.file("base.jsonl"),
                         R"({"prompt_id":"p1","scores":{"hinglish_fluency":3}})" "\n"
                         R"({"prompt_id":"p2","scores":{"hinglish_fluency":2.5}})" "\n");
    fixtures::write_file(dir.file("lora.jsonl"),
                         R"({"prompt_id":"p1","scores":{"hinglish_fluency":4}})" "\n"
                         R"({"prompt_id":"p2","scores":{"hinglish_fluency":4.5}})" "\n");
    auto c = run({"judge", "--compare", dir.file("base.jsonl"), dir.file("lora.jsonl"), "--out", dir.file("cmp.json")});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(c.out.find("4.25 (+54.5%)"), std::string::npos) << c.out;
    auto r = run({"report", "--comparison", dir.file("cmp.json")});
    EXPECT_EQ(r.out, c.out);

    fixtures::write_file(dir.file("bad.jsonl"), R"({"scores":{"hinglish_fluency":9}})" "\n");
    EXPECT_EQ(run({"judge", "--compare", dir.file("bad.jsonl"), dir.file("lora.jsonl")}).code, 1);
}

TEST(Cli, ReportAbtestLog) {
    fixtures::TempDir dir;
    std::string rec = R"({"type":"record","record_id":"s/i","session_id":"s","item_id":"i","choice":"left",)"
                      R"("resolved_system":"lora","compared":["base","lora"],"ratings":{},"timestamp_ms":0})";
    fixtures::write_file(dir.file("log.jsonl"), rec + "\n" + rec + "\n{\"type\":\"rec");
    auto r = run({"report", "--abtest-log", dir.file("log.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("lora: 1/1 preferred (100.0%)"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("base: 0/1 preferred (0.0%)"), std::string::npos) << r.out;
}

TEST(Cli, ConfigFlagIsValidated) {
    EXPECT_EQ(run({"metrics", "--in", "x", "--config", "/nonexistent.conf"}).code, 2);
}
