#include "vassforge/oracle.hpp"
#include "vassforge/zeroelim.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace vassforge;

namespace {

Program load(const std::string& name) {
    std::ifstream in(std::string(VASSFORGE_PROGRAMS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// Goto program over x, y with zero tests.
Program random_zero_test_program(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t lines = 3 + rng() % 6;
    std::ostringstream os;
    os << "counters: x y\n";
    for (std::size_t l = 1; l <= lines; ++l) {
        const char* ctr = rng() % 2 ? "x" : "y";
        switch (rng() % 5) {
        case 0: os << "inc " << ctr << "\n"; break;
        case 1: os << "dec " << ctr << "\n"; break;
        case 2: os << "zero? " << ctr << "\n"; break;
        case 3: os << "inc " << ctr << "; dec " << (ctr[0] == 'x' ? "y" : "x") << "\n"; break;
        default: os << "goto " << 1 + rng() % (lines + 1) << " " << 1 + rng() % (lines + 1) << "\n"; break;
        }
    }
    return parse(os.str());
}

}  // namespace

TEST(Gadget, TracedRunFromAHoldingStart) {
    ZeroElimContext ctx;
    Program g = gen_zero_gadget("x", ctx);
    Compiled cp = compile(g);
    Valuation start{{"a", 1}, {"x", 0}, {"y", 1}, {"t", 0}, {"b", 1}, {"c", 6}};
    ASSERT_EQ(eval_invariant(ctx.invariant(), start), InvariantStatus::Holds);
    Valuation expected{{"a", 7}, {"x", 0}, {"y", 1}, {"t", 0}, {"b", 0}, {"c", 0}};

    std::vector<Valuation> holding;
    enumerate_runs(cp, make_configuration(cp, start), Budget{}, [&](const vassforge::Run& r) {
        if (r.complete()) {
            auto v = valuation_of(cp, r.configs.back());
            if (eval_invariant(ctx.invariant(), v) == InvariantStatus::Holds) holding.push_back(v);
        }
        return true;
    });
    ASSERT_EQ(holding.size(), 1u);
    EXPECT_EQ(holding[0], expected);

    auto finals = oracle::oracle_finals(g, oracle::from_engine(cp, make_configuration(cp, start)), Budget{});
    std::vector<Valuation> oracle_holding;
    for (const auto& c : finals.finals) {
        Valuation v(c.values.begin(), c.values.end());
        if (eval_invariant(ctx.invariant(), v) == InvariantStatus::Holds) oracle_holding.push_back(v);
    }
    EXPECT_EQ(oracle_holding, std::vector<Valuation>{expected});
}

TEST(Gadget, HoldingStartWithNonzeroTargetEndsBroken) {
    ZeroElimContext ctx;
    Compiled cp = compile(gen_zero_gadget("x", ctx));
    Valuation start{{"a", 1}, {"x", 1}, {"y", 0}, {"t", 0}, {"b", 1}, {"c", 6}};
    ASSERT_EQ(eval_invariant(ctx.invariant(), start), InvariantStatus::Holds);
    std::uint64_t complete = 0;
    enumerate_runs(cp, make_configuration(cp, start), Budget{}, [&](const vassforge::Run& r) {
        if (!r.complete()) return true;
        ++complete;
        EXPECT_EQ(eval_invariant(ctx.invariant(), valuation_of(cp, r.configs.back())), InvariantStatus::Broken);
        return true;
    });
    EXPECT_GT(complete, 0u);
}

TEST(Gadget, LemmaHoldsExhaustively) {
    for (const char* target : {"x", "y"}) {
        auto r = check_gadget_lemma(target, 5, 2);
        EXPECT_EQ(r.verdict, Verdict::Verified) << target;
        EXPECT_EQ(r.failures, 0u);
        EXPECT_GT(r.good_starts, 0u);
        EXPECT_GT(r.broken_starts, 0u);
    }
}

TEST(Eliminate, BalancesUpdatesWithA) {
    Program pp = eliminate_zero_tests(parse("counters: x y\ninc x"));
    ASSERT_EQ(pp.body.size(), 1u);
    const auto& cmds = std::get<Line>(pp.body[0].node).commands;
    ASSERT_EQ(cmds.size(), 2u);
    EXPECT_EQ(to_string(cmds[0]), "inc x");
    EXPECT_EQ(to_string(cmds[1]), "dec a");
}

TEST(Eliminate, ZeroTestBecomesTheGadget) {
    Program g = gen_zero_gadget("x");
    EXPECT_EQ(g.body.size(), 5u);
    Program pp = eliminate_zero_tests(parse("counters: x y\nzero? x"));
    EXPECT_EQ(pp.body, g.body);
    EXPECT_FALSE(pp.has_zero_tests());
}

TEST(Eliminate, SizeRatioIsBoundedByTheGadget) {
    const double bound = static_cast<double>(atom_count(eliminate_zero_tests(parse("counters: x y\nzero? x"))));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Program p = random_zero_test_program(seed);
        Program pp = eliminate_zero_tests(p);
        EXPECT_FALSE(pp.has_zero_tests());
        double ratio = static_cast<double>(atom_count(pp)) / static_cast<double>(atom_count(p));
        EXPECT_LE(ratio, bound) << pretty_print(p);
    }
}

TEST(Eliminate, RejectsThirdCounter) {
    EXPECT_THROW(eliminate_zero_tests(parse("counters: x y z\ninc z")), ProgramError);
}

TEST(VerifyZeroElim, ThreeTestToy) {
    Program p = load("toy3tests.vp");
    auto yes = verify_zeroelim(p, 3, 0, Budget{});
    EXPECT_EQ(yes.verdict, Verdict::Verified) << yes.detail;
    EXPECT_TRUE(yes.lhs);
    EXPECT_TRUE(yes.witness_A);
    EXPECT_TRUE(yes.witness_maps_back);
    EXPECT_EQ(yes.gadget_visits, 3u);

    auto no = verify_zeroelim(p, 2, 0, Budget{});
    EXPECT_EQ(no.verdict, Verdict::Verified) << no.detail;
    EXPECT_FALSE(no.lhs);
    EXPECT_FALSE(no.witness_A);
}

TEST(VerifyZeroElim, SingleTest) {
    auto r = verify_zeroelim(load("single_test.vp"), 1, 0, Budget{});
    EXPECT_EQ(r.verdict, Verdict::Verified);
    EXPECT_EQ(r.witness_A, std::optional<std::uint64_t>(1));
    EXPECT_EQ(r.gadget_visits, 1u);
}

TEST(SourceRun, CountsZeroTests) {
    Program p = load("toy2tests.vp");
    EXPECT_TRUE(find_source_run(p, 2, 64, Budget{}).found);
    EXPECT_FALSE(find_source_run(p, 3, 64, Budget{}).found);
}
