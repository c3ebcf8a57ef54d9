#include "vassforge/pvass.hpp"

#include <gtest/gtest.h>

using namespace vassforge;

TEST(Val, CountsSymbols) {
    ValMap m{{"a"}, {"b'", "c'"}};
    auto v = val(m, Valuation{{"a", 2}}, {"b'", "c'", "c'"});
    EXPECT_EQ(v["b'"], 1u);
    EXPECT_EQ(v["c'"], 2u);
    EXPECT_EQ(v["a"], 2u);
    auto empty = val(m, Valuation{{"a", 0}}, {});
    EXPECT_EQ(empty["b'"], 0u);
    EXPECT_EQ(empty["c'"], 0u);
    EXPECT_EQ(val(m, Valuation{}, {"c'", "b'", "c'"}), val(m, Valuation{}, {"c'", "c'", "b'"}));
}

TEST(Val, RejectsOverlap) {
    ValMap m{{"a", "b'"}, {"b'"}};
    EXPECT_THROW(m.validate(), ProgramError);
}

TEST(Q1, ShapeOfTheListing) {
    auto q = gen_Q1();
    EXPECT_EQ(q.counters().size(), 4u);
    EXPECT_EQ(q.delegated, (std::vector<std::string>{"b'", "c'"}));
    std::string text = pretty_print(q.program);
    std::string eight;
    for (int i = 0; i < 8; ++i) eight += "pop c'; ";
    EXPECT_NE(text.find("movek t c 8; " + eight), std::string::npos);
}

TEST(Q1, LineCorrespondence) {
    auto r = check_line_correspondence(gen_Q1());
    EXPECT_EQ(r.verdict, Verdict::Verified);
    EXPECT_TRUE(r.mismatches.empty());
    EXPECT_GT(r.steps, 0u);
}

TEST(Lifts, BarThenTilde) {
    auto q1 = gen_Q1();
    EXPECT_THROW(lift_tilde(q1), ProgramError);
    auto qb = lift_bar(q1);
    EXPECT_EQ(qb.counters().size(), 5u);
    EXPECT_TRUE(qb.delegates("b''"));
    EXPECT_FALSE(qb.delegates("c''"));
    std::string text = pretty_print(qb.program);
    EXPECT_NE(text.find("dec c; sub c'' 3; push c'"), std::string::npos);
    auto qt = lift_tilde(qb);
    EXPECT_EQ(qt.counters().size(), 5u);
    EXPECT_TRUE(qt.delegates("b'''"));
    EXPECT_TRUE(qt.delegates("c'''"));
    EXPECT_NE(pretty_print(qt.program).find("dec b; push b''"), std::string::npos);
}

TEST(Qd, CountsAndSchedule) {
    for (unsigned d = 1; d <= 6; ++d) {
        auto q = gen_Qd(d);
        EXPECT_EQ(q.counters().size(), d / 2 + 4) << d;
        EXPECT_EQ(q.end_counters().size(), d / 2) << d;
        EXPECT_EQ(q.depth, d);
        auto lines = check_line_correspondence(q);
        EXPECT_EQ(lines.verdict, Verdict::Verified) << d;
    }
    EXPECT_EQ(gen_Qd(4).schedule, (std::vector<std::string>{"bar", "tilde", "bar"}));
}

TEST(Simulation, Q1AgainstP1) {
    auto r = check_simulation(gen_Q1(), gen_P1(), {{1, 1}, {4, 2}}, Budget{});
    EXPECT_EQ(r.verdict, Verdict::Verified);
    ASSERT_EQ(r.cases.size(), 2u);
    for (const auto& c : r.cases) {
        EXPECT_TRUE(c.witness_ok) << c.detail;
        EXPECT_FALSE(c.forward.empty());
    }
    const auto& c42 = r.cases[1];
    ASSERT_TRUE(c42.q_witness);
    auto q = gen_Q1();
    Compiled cp = q.compile();
    auto end = val(ValMap::of(cp), cp, c42.q_witness->configs.back());
    EXPECT_EQ(end["a"], 1u);
    EXPECT_EQ(end["b"], 3u);
    EXPECT_EQ(end["c"], 63u);
    EXPECT_EQ(end["c'"], 0u);
}

TEST(Simulation, WrongOrderStackStillMapsForward) {
    auto q = gen_Q1();
    Compiled cp = q.compile();
    // b' on top of the c' the first rounds need: every halting q-run still maps to a P1 run.
    auto init = q_input_configuration(q, cp, 1, 1, {"c'", "c'", "c'", "b'"});
    auto f = check_forward(q, init, Budget{});
    EXPECT_EQ(f.unmatched, 0u);
    EXPECT_EQ(f.verdict, Verdict::Verified) << f.detail;
}

TEST(Shuffle, AllOrderingsOfTwoAndFour) {
    auto r = check_shuffle(2, 4);
    EXPECT_EQ(r.expected, 15u);
    EXPECT_EQ(r.produced, 15u);
    EXPECT_TRUE(r.missing.empty());
    EXPECT_TRUE(r.unexpected.empty());
    EXPECT_EQ(r.verdict, Verdict::Verified);
}
