#include "vassforge/amplifiers.hpp"
#include "vassforge/oracle.hpp"
#include "vassforge/relax.hpp"

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

using Triple3 = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;

std::set<Triple3> complete_endpoints(const Compiled& cp, const Valuation& init, const Budget& b = {}) {
    std::set<Triple3> out;
    enumerate_runs(cp, make_configuration(cp, init), b, [&](const vassforge::Run& r) {
        if (r.complete()) {
            auto v = valuation_of(cp, r.configs.back());
            out.insert({v["x"], v["y"], v["z"]});
        }
        return true;
    });
    return out;
}

}  // namespace

TEST(Step, DecrementAtZeroBlocks) {
    Compiled cp = compile(parse("counters: x\ndec x"));
    EXPECT_TRUE(step(cp, make_configuration(cp, {})).successors.empty());
    EXPECT_EQ(step(cp, make_configuration(cp, {{"x", 1}})).successors.size(), 1u);
}

TEST(Step, DuplicateGotoTargetsCollapse) {
    Compiled cp = compile(parse("counters: x\ngoto 1 1"));
    EXPECT_EQ(step(cp, make_configuration(cp, {})).successors.size(), 1u);
}

TEST(Step, PopOnEmptyStackBlocks) {
    Compiled cp = compile(parse("counters: x\nstack: s\npop s"));
    EXPECT_TRUE(step(cp, make_configuration(cp, {})).successors.empty());
    EXPECT_EQ(step(cp, make_configuration(cp, {}, {"s"})).successors.size(), 1u);
}

TEST(Step, PopChecksTheTopSymbol) {
    Compiled cp = compile(parse("counters: x\nstack: s t\npop s"));
    EXPECT_TRUE(step(cp, make_configuration(cp, {}, {"s", "t"})).successors.empty());
    EXPECT_EQ(step(cp, make_configuration(cp, {}, {"t", "s"})).successors.size(), 1u);
}

TEST(Step, AtomsRunLeftToRight) {
    Compiled cp = compile(parse("counters: x y\ndec x; inc x"));
    EXPECT_TRUE(step(cp, make_configuration(cp, {})).successors.empty());
    Compiled cq = compile(parse("counters: x y\ninc x; dec x"));
    EXPECT_EQ(step(cq, make_configuration(cq, {})).successors.size(), 1u);
}

TEST(Step, ZeroTest) {
    Compiled cp = compile(parse("counters: x\nzero? x"));
    EXPECT_EQ(step(cp, make_configuration(cp, {})).successors.size(), 1u);
    EXPECT_TRUE(step(cp, make_configuration(cp, {{"x", 1}})).successors.empty());
}

TEST(Step, IncrementBeyondCapTruncates) {
    Compiled cp = compile(parse("counters: x\ninc x"));
    Budget b;
    b.max_counter_value = 3;
    auto r = step(cp, make_configuration(cp, {{"x", 3}}), b);
    EXPECT_TRUE(r.successors.empty());
    EXPECT_TRUE(r.truncated);
}

TEST(EnumerateRuns, ExampleOneEndpointsFromTwo) {
    const std::set<Triple3> expected{{2, 0, 1}, {1, 1, 3}, {0, 2, 5}};
    for (const char* f : {"example1_goto.vp", "example1_loop.vp", "example1_compact.vp"}) {
        Program p = load(f);
        Compiled cp = compile(p);
        auto engine = complete_endpoints(cp, {{"x", 2}});
        EXPECT_EQ(engine, expected) << f;

        auto src = oracle::from_engine(cp, make_configuration(cp, {{"x", 2}}));
        auto finals = oracle::oracle_finals(p, src, Budget{});
        std::set<Triple3> from_oracle;
        for (const auto& c : finals.finals) from_oracle.insert({c.values.at("x"), c.values.at("y"), c.values.at("z")});
        EXPECT_EQ(from_oracle, expected) << f;
    }
}

TEST(EnumerateRuns, EmptyProgramHasOneCompleteRun) {
    Compiled cp = compile(Program{});
    std::uint64_t complete = 0;
    auto rep = enumerate_runs(cp, make_configuration(cp, {}), Budget{}, [&](const vassforge::Run& r) {
        complete += r.complete();
        return true;
    });
    EXPECT_EQ(rep.runs, 1u);
    EXPECT_EQ(complete, 1u);
}

TEST(EnumerateRuns, UnboundedLoopIsTruncated) {
    Compiled cp = compile(parse("counters: x\nloop { inc x }\nloop { sub x 7 }"));
    Budget b;
    b.max_steps = 10;
    auto rep = enumerate_runs(cp, make_configuration(cp, {}), b, [](const vassforge::Run&) { return true; });
    EXPECT_TRUE(rep.truncation.fired());
}

TEST(Search, FindsWitnessAndRespectsGoal) {
    Compiled cp = compile(load("example1_goto.vp"));
    SearchOptions so;
    so.goal = goal_zeroing(cp, {"x"});
    so.goal->exact.push_back({static_cast<std::uint32_t>(cp.counter_index("z")), 5});
    so.stop_at_goal = true;
    auto r = search(cp, make_configuration(cp, {{"x", 2}}), Budget{}, so);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(r.witness->configs.back().values, (std::vector<std::uint64_t>{0, 2, 5}));

    so.goal->exact.back().second = 4;
    EXPECT_FALSE(search(cp, make_configuration(cp, {{"x", 2}}), Budget{}, so).witness);
}

TEST(Search, EmptyStackGoalOnStacklessProgram) {
    // Regression: the packed goal check read past the state when there is no stack slot.
    Compiled cp = compile(parse("counters: x y\nloop { inc x }\nloop { dec x; inc y }\nloop { dec y }"));
    for (unsigned w : {1u, 4u}) {
        SearchOptions so;
        so.goal = goal_zeroing(cp, cp.counters, true);
        so.workers = w;
        Budget b;
        b.max_counter_value = 600;
        auto r = search(cp, make_configuration(cp, {}), b, so);
        EXPECT_EQ(r.finals.size(), 1u) << w;
    }
}

TEST(Search, WorkersGiveTheSameFinals) {
    Compiled cp = compile(parse("counters: x y z\nloop { inc x; inc y }\nloop { dec x; add z 2 }\nloop { dec y; inc z }"));
    Budget b;
    b.max_counter_value = 300;
    std::vector<Configuration> base;
    for (unsigned w : {1u, 2u, 8u}) {
        SearchOptions so;
        so.workers = w;
        auto r = search(cp, make_configuration(cp, {}), b, so);
        if (base.empty()) base = r.finals;
        EXPECT_EQ(r.finals, base) << w;
    }
    EXPECT_FALSE(base.empty());
}

TEST(Search, PruningKeepsGoalFinals) {
    Compiled cp = compile(parse("counters: x y\nloop { inc x; inc y }\nloop { dec x }\nloop { dec y }"));
    Budget b;
    b.max_counter_value = 40;
    for (bool prune : {false, true}) {
        SearchOptions so;
        so.goal = goal_zeroing(cp, cp.counters);
        so.prune = prune;
        auto r = search(cp, make_configuration(cp, {}), b, so);
        EXPECT_EQ(r.finals.size(), 1u);
    }
}

TEST(ZCompute, P1FromFourTwo) {
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    Budget b;
    b.max_counter_value = amplifier_counter_cap(4, 2);
    auto r = z_compute(cp, input_configuration(p1, cp, 4, 2), p1.Z, b);
    ASSERT_EQ(r.kind, ZComputeResult::Kind::UniqueRun);
    auto v = valuation_of(cp, r.finals.at(0));
    EXPECT_EQ(v["a"], 1u);
    EXPECT_EQ(v["b"], 3u);
    EXPECT_EQ(v["c"], 63u);
}

TEST(ZCompute, P1FromTwoTwoIsNothing) {
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    Budget b;
    b.max_counter_value = amplifier_counter_cap(2, 2);
    EXPECT_EQ(z_compute(cp, input_configuration(p1, cp, 2, 2), p1.Z, b).kind, ZComputeResult::Kind::Nothing);
}

TEST(ZCompute, InfiniteLoopWithTinyBudgetIsInconclusive) {
    Compiled cp = compile(parse("counters: x\nloop { inc x }\nloop { sub x 7 }"));
    Budget b;
    b.max_counter_value = 5;
    b.max_steps = 20;
    EXPECT_EQ(z_compute(cp, make_configuration(cp, {}), {"x"}, b).kind, ZComputeResult::Kind::Inconclusive);
}

TEST(ClassifyRun, MaximalAndNonMaximalIterations) {
    Compiled cp = compile(load("example1_loop.vp"));
    std::optional<vassforge::Run> full, one;
    enumerate_runs(cp, make_configuration(cp, {{"x", 2}}), Budget{}, [&](const vassforge::Run& r) {
        if (!r.complete()) return true;
        auto x = r.configs.back().values[0];
        if (x == 0) full = r;
        if (x == 1) one = r;
        return true;
    });
    ASSERT_TRUE(full && one);
    auto a = classify_run(cp, *full);
    ASSERT_EQ(a.loops.size(), 1u);
    EXPECT_EQ(a.loops[0].iterations, 2u);
    EXPECT_EQ(a.loops[0].maximal, std::optional<bool>(true));
    auto b = classify_run(cp, *one);
    EXPECT_EQ(b.loops[0].maximal, std::optional<bool>(false));
    EXPECT_FALSE(b.all_flat_loops_maximal());
}

TEST(Budget, EnvironmentOverride) {
    ::setenv("VASSFORGE_BUDGET", R"({"max_steps": 77, "workers": 3})", 1);
    Budget b = Budget::from_env();
    ::unsetenv("VASSFORGE_BUDGET");
    EXPECT_EQ(b.max_steps, 77u);
    EXPECT_EQ(b.workers, 3u);
    EXPECT_EQ(b.max_states, Budget{}.max_states);
    Budget zero;
    zero.max_states = 0;
    EXPECT_THROW(zero.validate(), ProgramError);
}

TEST(Relaxation, ProvesSimpleUnreachability) {
    // x ends at 2 whatever the loop does, so x = 0 at halt is impossible.
    Compiled cp = compile(parse("counters: x y\nloop { inc y }\ninc x; inc x"));
    RelaxationPruner pr(cp, goal_zeroing(cp, {"x"}));
    ASSERT_TRUE(pr.applicable());
    EXPECT_FALSE(pr.may_reach(make_configuration(cp, {})));
    RelaxationPruner ok(cp, goal_zeroing(cp, {"y"}));
    EXPECT_TRUE(ok.may_reach(make_configuration(cp, {})));
}
