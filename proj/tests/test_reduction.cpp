#include "vassforge/reduction.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace vassforge;

namespace {

Program load(const std::string& name) {
    std::ifstream in(std::string(VASSFORGE_PROGRAMS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

ReductionOptions unoptimized() {
    ReductionOptions o;
    o.unroll_bprime = false;
    o.reuse_counters = false;
    return o;
}

ReductionOptions unroll_only() {
    ReductionOptions o;
    o.reuse_counters = false;
    return o;
}

std::size_t counters_of(const ReductionInstance& i) { return compile(i.program).counters.size(); }

}  // namespace

TEST(BuildPpp, CounterCounts) {
    Program p = load("single_test.vp");
    for (unsigned d = 1; d <= 4; ++d) {
        EXPECT_EQ(counters_of(build_Ppp(p, 1, d, unoptimized())), 2 * d + 7) << d;
        EXPECT_EQ(counters_of(build_Ppp(p, 1, d, unroll_only())), 2 * d + 6) << d;
    }
    // Reuse needs three free counters of P_d, which exist from d = 3 on.
    EXPECT_EQ(counters_of(build_Ppp(p, 1, 1)), 7u);
    EXPECT_EQ(counters_of(build_Ppp(p, 1, 2)), 8u);
    EXPECT_EQ(counters_of(build_Ppp(p, 1, 3)), 9u);
    EXPECT_EQ(counters_of(build_Ppp(p, 1, 4)), 11u);
}

TEST(BuildPpp, ReuseMapIsDeterministic) {
    Program p = load("single_test.vp");
    EXPECT_EQ(build_Ppp(p, 1, 1).reuse, (std::map<std::string, std::string>{{"x", "t"}}));
    EXPECT_EQ(build_Ppp(p, 1, 3).reuse,
              (std::map<std::string, std::string>{{"t0", "t"}, {"x", "b'"}, {"y", "b''"}}));
}

TEST(BuildPpp, ReuseRequiresUnroll) {
    ReductionOptions o;
    o.unroll_bprime = false;
    EXPECT_THROW(build_Ppp(load("single_test.vp"), 1, 1, o), ProgramError);
}

TEST(BuildPpp, SizeGrowsLinearlyInProgramAndDepth) {
    Program p = load("toy3tests.vp");
    auto size = [](const ReductionInstance& i) { return i.program.line_count(); };
    std::vector<std::int64_t> by_d;
    for (unsigned d = 1; d <= 5; ++d) by_d.push_back(static_cast<std::int64_t>(size(build_Ppp(p, 1, d, unoptimized()))));
    for (std::size_t i = 2; i < by_d.size(); ++i) EXPECT_EQ(by_d[i] - 2 * by_d[i - 1] + by_d[i - 2], 0);
}

TEST(BuildPpp, RejectsThreeCounterSources) {
    EXPECT_THROW(build_Ppp(parse("counters: x y z\nzero? z"), 1, 1), ProgramError);
}

TEST(UnrollCounter, MakesOneCopyPerValue) {
    Program flat = desugar(parse("counters: b c\nloop { dec b; inc c }"));
    Program u = unroll_counter(flat, "b", 2);
    EXPECT_FALSE(u.has_counter("b"));
    // Values 0..2 plus a dead copy that absorbs an overflowing increment.
    EXPECT_EQ(u.line_count(), 4 * flat.line_count());
}

TEST(BuildQpp, CounterCounts) {
    Program p = load("single_test.vp");
    for (unsigned d = 1; d <= 4; ++d) EXPECT_EQ(counters_of(build_Qpp(p, 1, d)), d / 2 + 6) << d;
}

TEST(Prelude, TriplesForEveryScale) {
    Program p = load("single_test.vp");
    for (std::uint64_t n = 1; n <= 2; ++n) {
        auto inst = build_Ppp(p, n, 1, unoptimized());
        auto outs = prelude_outcomes(inst, 4, Budget{});
        ASSERT_EQ(outs.size(), 5u);
        for (const auto& o : outs) {
            std::uint64_t m = (std::uint64_t(1) << (2 * n)) - 1;
            EXPECT_EQ(o.values.at("a"), o.A);
            EXPECT_EQ(o.values.at("b'"), n);
            EXPECT_EQ(o.values.at("c'"), o.A * m);
            for (const auto& [k, v] : o.values)
                if (k != "a" && k != "b'" && k != "c'") EXPECT_EQ(v, 0u) << k;
        }
    }
}

TEST(Prelude, EvenDepthPushesTheExponent) {
    auto outs = prelude_outcomes(build_Qpp(load("single_test.vp"), 2, 2), 2, Budget{});
    ASSERT_EQ(outs.size(), 3u);
    for (const auto& o : outs) {
        EXPECT_EQ(o.stack, "b''b''");
        EXPECT_EQ(o.values.at("c''"), o.A * 15);
    }
}

TEST(Prelude, OddDepthAdmitsEveryInterleaving) {
    auto outs = prelude_outcomes(build_Qpp(load("single_test.vp"), 1, 1), 1, Budget{});
    std::set<std::string> stacks;
    for (const auto& o : outs)
        if (o.A == 1) stacks.insert(o.stack);
    EXPECT_EQ(stacks, (std::set<std::string>{"b'c'c'c'", "c'b'c'c'", "c'c'b'c'", "c'c'c'b'"}));
}

TEST(VerifyReduction, AgreesOnToysInBothOptionModes) {
    struct Case {
        const char* file;
        std::uint64_t n;
        bool accept;
    };
    for (const auto& opts : {ReductionOptions{}, unoptimized()})
        for (const Case& c : {Case{"single_test.vp", 1, true}, Case{"toy3tests.vp", 2, true}, Case{"toy2tests.vp", 2, false}}) {
            auto r = verify_reduction(load(c.file), c.n, 1, Budget{}, opts);
            EXPECT_EQ(r.verdict, Verdict::Verified) << c.file << " " << r.detail;
            EXPECT_EQ(r.lhs, c.accept) << c.file;
            EXPECT_EQ(r.rhs, c.accept) << c.file;
            EXPECT_EQ(r.lhs_positive, c.accept) << c.file;
            if (c.accept) {
                ASSERT_TRUE(r.phases) << c.file;
                EXPECT_TRUE(r.phases->ok()) << c.file;
                EXPECT_GE(r.witness_A.value_or(0), 1u);
            }
        }
}

TEST(VerifyReduction, PushdownSingleTest) {
    ReductionOptions o = unoptimized();
    o.target = ReductionOptions::Target::Pushdown;
    for (unsigned d : {1u, 2u}) {
        auto r = verify_reduction(load("single_test.vp"), 1, d, Budget{}, o);
        EXPECT_EQ(r.verdict, Verdict::Verified) << d << " " << r.detail;
        EXPECT_TRUE(r.lhs_positive);
        EXPECT_EQ(r.mode, "pvass");
    }
}

TEST(VerifyReduction, ReportCarriesTraces) {
    auto r = verify_reduction(load("single_test.vp"), 1, 1, Budget{});
    auto j = r.to_json(true);
    EXPECT_TRUE(j.contains("positive_witness"));
    EXPECT_TRUE(j.contains("rhs_witness"));
    EXPECT_FALSE(r.to_json().contains("positive_witness"));
    EXPECT_EQ(j["target_zero_tests"], "1");
}
