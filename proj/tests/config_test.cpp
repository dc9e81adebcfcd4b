#include <gtest/gtest.h>

#include <cstdlib>

#include "hinglish/config.hpp"
#include "support/fixtures.hpp"

using namespace hinglish;

TEST(KeyValueConfig, SectionsCommentsAndTypes) {
    auto cfg = KeyValueConfig::parse("# c\n; c\ntop = 1\n[gen]\nn = 4\nx = 0.5\nflag = true\nlist = a, b ,c\n");
    EXPECT_EQ(cfg.get("top"), "1");
    EXPECT_EQ(cfg.get_size("gen.n"), 4u);
    EXPECT_EQ(cfg.get_double("gen.x"), 0.5);
    EXPECT_EQ(cfg.get_bool("gen.flag"), true);
    EXPECT_EQ(cfg.get_list("gen.list"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(cfg.has_section("gen"));
    EXPECT_FALSE(cfg.get("missing"));
    EXPECT_THROW(cfg.require("missing"), ValidationError);
    EXPECT_THROW(KeyValueConfig::parse("[open\n"), ParseError);
    EXPECT_THROW(KeyValueConfig::parse("novalue\n"), ParseError);
    EXPECT_THROW(KeyValueConfig::parse("n = -3").get_size("n"), ValidationError);
}

TEST(ParseRatios, Checks) {
    auto r = parse_ratios("0.8,0.1,0.1");
    EXPECT_EQ(r.train, 0.8);
    EXPECT_THROW(parse_ratios("0.8,0.1"), ValidationError);
    EXPECT_THROW(parse_ratios("0.8,0.1,0.3"), ValidationError);
    EXPECT_THROW(parse_ratios("a,b,c"), ValidationError);
}

TEST(PipelineConfig, ResolvesRelativePathsAndChecksExistence) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("topics.json"), "[]");
    fixtures::write_file(dir.file("hinglish.conf"),
                         "[paths]\ntopics = topics.json\ncorpus = out/corpus.jsonl\n"
                         "[generator]\nurl = http://localhost:9/v1/chat/completions\nmodel = gen\nkeys = k1,k2\n"
                         "cooldown_ms = 500\n"
                         "[generation]\ndialogues_per_topic = 3\n[split]\nratios = 0.7,0.2,0.1\nseed = 11\n");
    ::unsetenv("HINGLISH_GENERATOR_KEYS");
    auto p = load_pipeline_config(dir.file("hinglish.conf"));
    EXPECT_EQ(*p.topics, dir.file("topics.json"));
    EXPECT_EQ(*p.corpus, dir.file("out/corpus.jsonl"));
    ASSERT_TRUE(p.generator);
    EXPECT_EQ(p.generator->keys, (std::vector<std::string>{"k1", "k2"}));
    EXPECT_EQ(p.generator->model, "gen");
    EXPECT_EQ(p.generation.dialogues_per_topic, 3u);
    EXPECT_EQ(p.ratios.validation, 0.2);
    EXPECT_EQ(p.split_seed, 11);
    EXPECT_EQ(p.key_cooldown, Millis{500});
    EXPECT_FALSE(p.judge);

    ::setenv("HINGLISH_GENERATOR_KEYS", "e1,e2,e3", 1);
    EXPECT_EQ(load_pipeline_config(dir.file("hinglish.conf")).generator->keys.size(), 3u);
    ::unsetenv("HINGLISH_GENERATOR_KEYS");

    fixtures::write_file(dir.file("bad.conf"), "[paths]\ntopics = nowhere.json\n");
    EXPECT_THROW(load_pipeline_config(dir.file("bad.conf")), ValidationError);
    EXPECT_THROW(load_pipeline_config(dir.file("absent.conf")), IoError);
}

TEST(PipelineConfig, ShippedExampleConfigLoads) {
    auto p = load_pipeline_config(fixtures::data_path("hinglish.conf"));
    EXPECT_TRUE(p.topics);
    EXPECT_TRUE(p.hindi_lexicon);
    EXPECT_TRUE(p.variant_table);
}
