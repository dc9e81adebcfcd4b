#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hinglish/judge.hpp"
#include "hinglish/mock.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace hinglish;
using D = RubricDimension;

namespace {

/// Ten whole-point scores whose mean is exactly `mean` (a multiple of 0.1).
std::vector<double> scores_with_mean(double mean) {
    auto sum = static_cast<int>(std::lround(mean * 10.0));
    int q = sum / 10;
    int r = sum % 10;
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(i < r ? q + 1 : q);
    return out;
}

std::vector<JudgeVerdict> verdicts_for(const std::map<D, double>& means) {
    std::vector<JudgeVerdict> out(10);
    for (const auto& [d, m] : means) {
        auto s = scores_with_mean(m);
        for (std::size_t i = 0; i < 10; ++i) out[i].scores[d] = s[i];
    }
    return out;
}

std::string all_five(double v) {
    std::string s = "{";
    for (auto d : kAllDimensions) s += "\"" + std::string(to_string(d)) + "\": " + std::to_string(v) + ", ";
    return s + "\"rationale\": \"ok\"}";
}

struct TableRow {
    D dim;
    double a, b;
    const char* cell;
};

}  // namespace

TEST(JudgePrompt, ListsRequestedDimensions) {
    auto p = build_judge_prompt("user: kya hua?", "kuch nahi yaar", kAllDimensions);
    for (auto d : kAllDimensions) EXPECT_NE(p.find(to_string(d)), std::string::npos);
    std::array<D, 2> two{D::coherence, D::hindi_usage};
    auto q = build_judge_prompt("ctx", "resp", two);
    EXPECT_NE(q.find("coherence"), std::string::npos);
    EXPECT_NE(q.find("hindi_usage"), std::string::npos);
    EXPECT_EQ(q.find("hinglish_fluency"), std::string::npos);
    EXPECT_EQ(q.find("gender_correctness"), std::string::npos);
    EXPECT_EQ(p, build_judge_prompt("user: kya hua?", "kuch nahi yaar", kAllDimensions));
    EXPECT_THROW(build_judge_prompt("ctx", "  ", kAllDimensions), ValidationError);
}

TEST(JudgePrompt, ShippedRubricMatchesDefault) {
    auto r = load_rubric(fixtures::data_path("judge_rubric.json"));
    JudgeRubric def;
    EXPECT_EQ(r.preamble, def.preamble);
    EXPECT_EQ(r.definitions, def.definitions);
}

TEST(ParseVerdict, AllFive) {
    auto v = parse_verdict(all_five(4));
    EXPECT_EQ(v.scores.size(), 5u);
    for (auto d : kAllDimensions) EXPECT_EQ(v.scores.at(d), 4.0);
    EXPECT_EQ(v.rationale, "ok");
}

TEST(ParseVerdict, RangeAndMissing) {
    EXPECT_THROW(parse_verdict(all_five(7)), RangeError);
    EXPECT_THROW(parse_verdict(all_five(0.5)), RangeError);
    EXPECT_THROW(parse_verdict(all_five(3.3)), RangeError);
    EXPECT_NO_THROW(parse_verdict(all_five(3.5)));
    try {
        parse_verdict(R"({"hinglish_fluency": 4})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("persona_adherence"), std::string::npos);
    }
    EXPECT_THROW(parse_verdict("no json here"), ParseError);
}

TEST(ParseVerdict, WrappedInProse) {
    auto raw = "Sure, here is my evaluation {not json} :\n" + all_five(3) + "\nHope that helps {";
    EXPECT_EQ(parse_verdict(raw).scores.at(D::coherence), 3.0);
}

TEST(ParseVerdict, RenderRoundTrip) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        JudgeVerdict v;
        for (auto d : kAllDimensions) v.scores[d] = 1.0 + 0.5 * static_cast<double>(rng() % 9);
        v.rationale = "r\"" + std::to_string(i);
        auto back = parse_verdict(render_verdict(v));
        EXPECT_EQ(back.scores, v.scores);
        EXPECT_EQ(back.rationale, v.rationale);
    }
}

TEST(CompareSystems, FluencyPlus414) {
    auto a = verdicts_for({{D::hinglish_fluency, 2.90}});
    auto b = verdicts_for({{D::hinglish_fluency, 4.10}});
    auto r = compare_systems(a, b);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_NEAR(r.rows[0].mean_a, 2.90, 1e-12);
    EXPECT_NEAR(r.rows[0].mean_b, 4.10, 1e-12);
    EXPECT_EQ(format_percent(*r.rows[0].percent_change), "+41.4%");
    EXPECT_NE(render_table(r).find("4.10 (+41.4%)"), std::string::npos);
}

TEST(CompareSystems, ReportedTablesRecompute) {
    const std::vector<std::vector<TableRow>> tables = {
        {{D::hinglish_fluency, 2.90, 4.10, "4.10 (+41.4%)"},
         {D::persona_adherence, 3.20, 4.10, "4.10 (+28.1%)"},
         {D::gender_correctness, 4.50, 4.90, "4.90 (+8.9%)"},
         {D::hindi_usage, 3.00, 3.60, "3.60 (+20.0%)"},
         {D::coherence, 3.30, 4.70, "4.70 (+42.4%)"}},
        {{D::hinglish_fluency, 3.20, 3.90, "3.90 (+21.9%)"},
         {D::persona_adherence, 3.70, 3.80, "3.80 (+2.7%)"},
         {D::gender_correctness, 4.60, 5.00, "5.00 (+8.7%)"},
         {D::hindi_usage, 3.10, 3.20, "3.20 (+3.2%)"},
         {D::coherence, 4.30, 4.60, "4.60 (+7.0%)"}},
    };
    for (const auto& table : tables) {
        std::map<D, double> ma, mb;
        for (const auto& row : table) {
            ma[row.dim] = row.a;
            mb[row.dim] = row.b;
        }
        auto r = compare_systems(verdicts_for(ma), verdicts_for(mb));
        auto rendered = render_table(r);
        ASSERT_EQ(r.rows.size(), 5u);
        for (const auto& row : table) {
            EXPECT_NE(rendered.find(row.cell), std::string::npos) << row.cell << "\n" << rendered;
        }
        // Percent fields recompute from the reported means to one decimal.
        for (const auto& row : r.rows) {
            double expected = std::round((row.mean_b - row.mean_a) / row.mean_a * 1000.0) / 10.0;
            EXPECT_DOUBLE_EQ(*row.percent_change, expected);
        }
    }
}

TEST(CompareSystems, IdenticalVerdictsGiveZero) {
    auto a = verdicts_for({{D::coherence, 3.3}, {D::hindi_usage, 4.0}});
    auto r = compare_systems(a, a);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.delta, 0.0);
        EXPECT_EQ(format_percent(*row.percent_change), "+0.0%");
    }
    EXPECT_THROW(compare_systems(std::vector<JudgeVerdict>{}, a), ValidationError);
}

TEST(CompareSystems, MeansMatchOracle) {
    std::mt19937_64 rng(21);
    std::vector<JudgeVerdict> a(4), b(4);
    for (auto* set : {&a, &b}) {
        for (auto& v : *set) {
            for (auto d : kAllDimensions) v.scores[d] = 1.0 + 0.5 * static_cast<double>(rng() % 9);
        }
    }
    auto r = compare_systems(a, b);
    for (const auto& row : r.rows) {
        std::vector<double> xa, xb;
        for (const auto& v : a) xa.push_back(v.scores.at(row.dimension));
        for (const auto& v : b) xb.push_back(v.scores.at(row.dimension));
        EXPECT_NEAR(row.mean_a, oracle::mean(xa), 1e-12);
        EXPECT_NEAR(row.mean_b, oracle::mean(xb), 1e-12);
    }
}

TEST(CompareSystems, JsonRoundTripRendersIdentically) {
    auto r = compare_systems(verdicts_for({{D::hinglish_fluency, 2.9}, {D::coherence, 3.3}}),
                             verdicts_for({{D::hinglish_fluency, 4.1}, {D::coherence, 4.7}}));
    auto back = comparison_from_json(json::parse(to_json(r).dump()));
    EXPECT_EQ(render_table(back), render_table(r));
}

namespace {

class ScriptedJudge final : public ChatClient {
public:
    explicit ScriptedJudge(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const std::string&, const std::string&) override {
        std::lock_guard lock(mu_);
        return replies_.at(std::min(calls_++, replies_.size() - 1));
    }
    std::string model() const override { return "judge-mock"; }

private:
    std::mutex mu_;
    std::vector<std::string> replies_;
    std::size_t calls_ = 0;
};

}  // namespace

TEST(RunJudge, RepromptsUnparseableReplies) {
    ScriptedJudge judge({"I think it's great!", all_five(4)});
    KeyPool pool({"k"});
    VirtualClock clock;
    std::vector<JudgeItem> items{{"p1", "ctx", "response"}};
    auto run = run_judge(items, judge, pool, clock, RetryPolicy{}, 0, 1);
    ASSERT_EQ(run.verdicts.size(), 1u);
    EXPECT_EQ(run.endpoint_calls, 2u);
    EXPECT_EQ(run.verdicts[0].judge_model, "judge-mock");
    EXPECT_EQ(run.verdicts[0].prompt_id, "p1");
}

TEST(RunJudge, KeepsItemOrderUnderParallelism) {
    ScriptedJudge judge({all_five(5)});
    KeyPool pool({"k1", "k2"});
    VirtualClock clock;
    std::vector<JudgeItem> items;
    for (int i = 0; i < 20; ++i) items.push_back({"p" + std::to_string(i), "ctx", "resp"});
    auto run = run_judge(items, judge, pool, clock, RetryPolicy{}, 0, 4);
    ASSERT_EQ(run.verdicts.size(), 20u);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(run.verdicts[i].prompt_id, "p" + std::to_string(i));
}
