#include <gtest/gtest.h>

#include <random>

#include "hinglish/normalize.hpp"
#include "support/fixtures.hpp"

using namespace hinglish;
using Entries = std::vector<std::pair<std::string, std::string>>;

namespace {

VariantTable bahut_table() { return VariantTable(Entries{{"bhot", "bahut"}, {"bahout", "bahut"}}); }

/// Random strings mixing ASCII words, punctuation runs, emoji, control
/// characters and multi-byte letters.
std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "bhot", "Bhot", "bahout", "BAHOUT", "bahut", "yaar", "kya", "scene", "hai", "!", "!!!", "?", "...", ",",
        " ", "  ", "\t", "\n", "\r\n", "😂", "👍🏽", "👨‍👩‍👧", "❤️", "\x01", "\x7f", "ü", "नमस्ते", "।",
        "‍", "️", "(", ")", "\"", "nhi", "kyu", "#tag", "@user", "123", "\xff", "\xe2\x82"};
    std::string s;
    std::size_t n = rng() % 20;
    for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
    return s;
}

}  // namespace

TEST(NormalizeText, VariantTriple) {
    auto t = bahut_table();
    EXPECT_EQ(normalize_text("bhot accha yaar", t), "bahut accha yaar");
    EXPECT_EQ(normalize_text("bahout accha yaar", t), "bahut accha yaar");
    EXPECT_EQ(normalize_text("bahut accha", t), "bahut accha");
}

TEST(NormalizeText, PunctuationAdjacentAndCasing) {
    auto t = bahut_table();
    EXPECT_EQ(normalize_text("Bhot, bhot!", t), "bahut, bahut!");
    EXPECT_EQ(normalize_text("(BHOT)...", t), "(bahut)...");
    // Internal punctuation is part of the token.
    EXPECT_EQ(normalize_text("bhot-bhot", t), "bhot-bhot");
}

TEST(NormalizeText, PreservesSpacingExactly) {
    auto t = bahut_table();
    EXPECT_EQ(normalize_text("  bhot\t\tbahout \n", t), "  bahut\t\tbahut \n");
}

TEST(VariantTable, RejectsChainsAndConflicts) {
    EXPECT_THROW(VariantTable(Entries{{"a", "b"}, {"b", "c"}}), ValidationError);
    EXPECT_THROW(VariantTable(Entries{{"bhot", "bahut"}, {"bhot", "bohot"}}), ValidationError);
    EXPECT_THROW(VariantTable(Entries{{"two words", "x"}}), ValidationError);
    EXPECT_THROW(VariantTable(Entries{{"bhot!", "bahut"}}), ValidationError);
    EXPECT_NO_THROW(VariantTable(Entries{{"bahut", "bahut"}, {"bhot", "bahut"}}));
}

TEST(LoadVariantTable, ParsesTsvWithComments) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("v.tsv"), "# header\nbhot\tbahut\n\nbahout\tbahut\n");
    auto t = load_variant_table(dir.file("v.tsv"));
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(*t.lookup("bhot"), "bahut");
}

TEST(LoadVariantTable, ChainNamesBothEntries) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("v.tsv"), "a\tb\nb\tc\n");
    try {
        load_variant_table(dir.file("v.tsv"));
        FAIL();
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("'a' -> 'b'"), std::string::npos) << msg;
        EXPECT_NE(msg.find("'b' -> 'c'"), std::string::npos) << msg;
    }
}

TEST(LoadVariantTable, IdenticalDuplicatesCollapse) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("v.tsv"), "bhot\tbahut\nbhot\tbahut\n");
    EXPECT_EQ(load_variant_table(dir.file("v.tsv")).size(), 1u);
}

TEST(LoadVariantTable, MalformedLineAndMissingFile) {
    fixtures::TempDir dir;
    fixtures::write_file(dir.file("v.tsv"), "bhot bahut\n");
    EXPECT_THROW(load_variant_table(dir.file("v.tsv")), ParseError);
    EXPECT_THROW(load_variant_table(dir.file("missing.tsv")), IoError);
}

TEST(LoadVariantTable, ShippedTableIsLargeAndHasTriple) {
    const auto& t = fixtures::shipped_variants();
    EXPECT_GE(t.size(), 50u);
    EXPECT_EQ(*t.lookup("bhot"), "bahut");
    EXPECT_EQ(*t.lookup("bahout"), "bahut");
    EXPECT_FALSE(t.lookup("bahut").has_value());
}

TEST(CleanText, CollapsesPunctuationRuns) {
    EXPECT_EQ(clean_text("kya scene hai!!!!"), "kya scene hai!");
    EXPECT_EQ(clean_text("what?!?!"), "what?!?!");
    CleaningConfig two;
    two.collapse_punct_runs_to = 2;
    EXPECT_EQ(clean_text("arre.....", two), "arre..");
}

TEST(CleanText, StripsEmojiIncludingSequences) {
    EXPECT_EQ(clean_text("thik hai 😂😂"), "thik hai");
    EXPECT_EQ(clean_text("family 👨‍👩‍👧 time"), "family time");
    EXPECT_EQ(clean_text("love ❤️ you"), "love you");
    EXPECT_EQ(clean_text("ok 👍🏽!"), "ok !");
    CleaningConfig keep;
    keep.strip_emoji = false;
    EXPECT_EQ(clean_text("thik 😂", keep), "thik 😂");
}

TEST(CleanText, ControlCharsAndWhitespace) {
    EXPECT_EQ(clean_text("a\x01" "b\tc  d\r\ne"), "ab c d\ne");
    EXPECT_EQ(clean_text("  already clean  "), "already clean");
    EXPECT_EQ(clean_text("already clean"), "already clean");
    EXPECT_EQ(clean_text("line one\n\n\nline two"), "line one\nline two");
}

TEST(CleanText, InvalidConfig) {
    CleaningConfig bad;
    bad.collapse_punct_runs_to = 0;
    EXPECT_THROW(clean_text("x", bad), ValidationError);
}

TEST(NormalizeProperties, IdempotentAndTokenCountPreserving) {
    std::mt19937_64 rng(2024);
    const auto& table = fixtures::shipped_variants();
    for (int i = 0; i < 10000; ++i) {
        auto s = random_text(rng);
        auto once = normalize_text(s, table);
        ASSERT_EQ(normalize_text(once, table), once) << s;
        ASSERT_EQ(text::split_whitespace(once).size(), text::split_whitespace(s).size()) << s;
    }
}

TEST(CleanProperties, IdempotentAndNeverLonger) {
    std::mt19937_64 rng(77);
    std::vector<CleaningConfig> configs(3);
    configs[1].collapse_punct_runs_to = 2;
    configs[2].strip_emoji = false;
    configs[2].collapse_whitespace = false;
    for (const auto& cfg : configs) {
        for (int i = 0; i < 5000; ++i) {
            auto s = random_text(rng);
            auto once = clean_text(s, cfg);
            ASSERT_EQ(clean_text(once, cfg), once) << s;
            ASSERT_LE(once.size(), s.size()) << s;
        }
    }
}

TEST(PipelineProperties, CleanThenNormalizeIsStable) {
    std::mt19937_64 rng(99);
    const auto& table = fixtures::shipped_variants();
    CleaningConfig cfg;
    for (int i = 0; i < 5000; ++i) {
        auto s = random_text(rng);
        auto once = clean_and_normalize(s, cfg, table);
        ASSERT_EQ(clean_and_normalize(once, cfg, table), once) << s;
    }
}
