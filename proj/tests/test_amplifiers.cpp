#include "vassforge/amplifiers.hpp"

#include <gtest/gtest.h>

using namespace vassforge;

namespace {

bool increments(const Program& flat, const std::string& counter) {
    for (const auto& s : flat.body)
        for (const auto& c : std::get<Line>(s.node).commands)
            for (const auto& a : expand_atoms(c))
                if (auto* i = std::get_if<Inc>(&a); i && i->counter == counter) return true;
    return false;
}

}  // namespace

TEST(P1, ShapeOfTheListing) {
    auto p1 = gen_P1();
    EXPECT_EQ(p1.counters().size(), 6u);
    EXPECT_EQ(p1.Z, std::vector<std::string>{"c'"});
    EXPECT_FALSE(increments(desugar(p1.program, p1.library), "b'"));
    EXPECT_NE(pretty_print(p1.program).find("movek t c 8"), std::string::npos);
}

TEST(Lift, CountersAndRoles) {
    auto p2 = lift(gen_P1());
    EXPECT_EQ(p2.counters().size(), 8u);
    EXPECT_EQ(p2.Z.size(), 2u);
    EXPECT_EQ(p2.a, "a");
    EXPECT_EQ(p2.in_b, "b''");
    EXPECT_EQ(p2.in_c, "c''");
    EXPECT_EQ(p2.depth, 2u);
}

TEST(Pd, DepthOneIsP1) {
    auto p1 = gen_P1();
    auto pd = gen_Pd(1);
    EXPECT_EQ(pd.program, p1.program);
    EXPECT_EQ(pd.Z, p1.Z);
}

TEST(Pd, CountsAndLinearSize) {
    std::vector<std::int64_t> sizes;
    for (unsigned d = 1; d <= 6; ++d) {
        auto s = gen_Pd(d);
        EXPECT_EQ(s.counters().size(), 2 * d + 4) << d;
        EXPECT_EQ(s.Z.size(), d) << d;
        sizes.push_back(static_cast<std::int64_t>(s.instruction_count()));
    }
    for (std::size_t i = 2; i < sizes.size(); ++i) EXPECT_EQ(sizes[i] - 2 * sizes[i - 1] + sizes[i - 2], 0) << i;
    EXPECT_EQ(gen_Pd(3).counters().size(), 10u);
}

TEST(Conservation, TotalsAndCaps) {
    EXPECT_EQ(conserved_total(16, 3), 1024u);
    EXPECT_EQ(conserved_total(4, 2), 64u);
    EXPECT_GE(amplifier_counter_cap(4, 2), conserved_total(4, 2));
}

TEST(VerifyAmplifier, P1Cases) {
    auto p1 = gen_P1();
    auto r = verify_amplifier(p1, {{16, 3}, {3, 2}}, Budget{});
    ASSERT_EQ(r.cases.size(), 2u);
    EXPECT_EQ(r.verdict, Verdict::Verified);
    Compiled cp = p1.compile();
    const auto& yes = r.cases[0];
    ASSERT_EQ(yes.result.kind, ZComputeResult::Kind::UniqueRun);
    auto v = valuation_of(cp, yes.result.finals.at(0));
    EXPECT_EQ(v["a"], 1u);
    EXPECT_EQ(v["b"], 5u);
    EXPECT_EQ(v["c"], 1023u);
    ASSERT_TRUE(yes.strong);
    EXPECT_TRUE(yes.strong->sum_preserved);
    EXPECT_EQ(r.cases[1].result.kind, ZComputeResult::Kind::Nothing);
}

TEST(VerifyAmplifier, P2FromOneTwo) {
    auto p2 = gen_Pd(2);
    auto r = verify_amplifier(p2, {{1, 2}}, Budget{});
    EXPECT_EQ(r.verdict, Verdict::Verified) << r.cases[0].detail;
    Compiled cp = p2.compile();
    ASSERT_EQ(r.cases[0].result.kind, ZComputeResult::Kind::UniqueRun);
    auto v = valuation_of(cp, r.cases[0].result.finals.at(0));
    EXPECT_EQ(v["a"], 4u);
    EXPECT_EQ(v["b"], 1u);
    EXPECT_EQ(v["c"], 12u);
    for (const auto& z : p2.Z) EXPECT_EQ(v[z], 0u) << z;
    EXPECT_EQ(v["c''"], 0u);
}

TEST(ExpectedOutput, DivisibilityDecides) {
    auto F1 = [](const BigNat& n) { return F(1, n); };
    auto e = expected_output(16, 3, F1);
    EXPECT_TRUE(e.produces);
    EXPECT_EQ(e.a_out, 1);
    EXPECT_EQ(e.b_out, 5);
    EXPECT_FALSE(expected_output(8, 3, F1).produces);
}

TEST(Checkpoints, P2FromOneTwo) {
    auto r = checkpoint_trace(gen_Pd(2), 1, 2, Budget{});
    EXPECT_EQ(r.verdict, Verdict::Verified) << r.detail;
    ASSERT_FALSE(r.rows.empty());
    for (const auto& row : r.rows) EXPECT_TRUE(row.match) << to_string(row.kind) << row.index << " " << row.detail;

    const auto& w0 = r.rows.front();
    EXPECT_EQ(w0.kind, Checkpoint::Kind::W0);
    EXPECT_EQ(w0.actual.at("a"), 1u);
    EXPECT_EQ(w0.actual.at("b''"), 2u);
    EXPECT_EQ(w0.actual.at("c''"), 15u);
    EXPECT_EQ(w0.actual.at("b"), 0u);

    auto y0 = std::find_if(r.rows.begin(), r.rows.end(), [](const Checkpoint& c) { return c.kind == Checkpoint::Kind::Y; });
    ASSERT_NE(y0, r.rows.end());
    EXPECT_EQ(y0->actual.at("a"), 4u);
    EXPECT_EQ(y0->actual.at("b'"), 1u);
    EXPECT_EQ(y0->actual.at("c'"), 12u);
    ASSERT_TRUE(r.run_class);
    EXPECT_TRUE(r.run_class->good);
}

TEST(LiftClaims, P2FromOneTwo) {
    auto r = check_lift_claims(gen_Pd(2), 1, 2, Budget{}, 5000);
    EXPECT_EQ(r.verdict, Verdict::Verified) << r.detail;
    EXPECT_TRUE(r.good_run_claim);
    EXPECT_TRUE(r.bad_run_claim);
    EXPECT_TRUE(r.sum_static);
    EXPECT_EQ(r.sum_violations, 0u);
    EXPECT_GT(r.non_good, 0u);
}

TEST(ClassifyLift, UnderIteratedInnerCallIsNotZeroing) {
    auto p2 = gen_Pd(2);
    Compiled cp = p2.compile();
    Budget b;
    b.max_counter_value = amplifier_counter_cap(1, 2);
    b.max_enumerated_runs = 20000;
    bool found = false;
    enumerate_runs(cp, input_configuration(p2, cp, 1, 2), b, [&](const vassforge::Run& r) {
        if (!r.complete()) return true;
        auto cls = classify_lift_run(p2, cp, r, 2);
        if (!cls.calls_zeroing) {
            found = true;
            EXPECT_FALSE(cls.good);
            EXPECT_FALSE(cls.zeroing);
            return false;
        }
        return true;
    });
    EXPECT_TRUE(found);
}
