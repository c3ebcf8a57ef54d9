#include "vassforge/amplifiers.hpp"
#include "vassforge/export.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace vassforge;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result cli(const std::string& args) {
    std::string cmd = std::string(VASSFORGE_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), f)) r.out.append(buf.data(), n);
    int st = pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string prog(const std::string& name) { return std::string(VASSFORGE_PROGRAMS_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / ("vassforge_cli_" + name);
    std::ofstream(path) << text;
    return path.string();
}

}  // namespace

TEST(Cli, UnknownVerbIsUsageError) { EXPECT_EQ(cli("frobnicate").code, 3); }

TEST(Cli, ParseErrorIsUsageError) {
    auto bad = write_temp("bad.vp", "counters: x\nincc x\n");
    EXPECT_EQ(cli("parse " + bad).code, 3);
}

TEST(Cli, ParseJson) {
    auto r = cli("parse --json " + prog("example1_goto.vp"));
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["counters"], (json{"x", "y", "z"}));
}

TEST(Cli, SearchExactValue) {
    auto yes = cli("search " + prog("example1_goto.vp") + " --init x=2 --exact z=5");
    ASSERT_EQ(yes.code, 0);
    EXPECT_TRUE(json::parse(yes.out)["reachable"].get<bool>());
    auto no = cli("search " + prog("example1_goto.vp") + " --init x=2 --exact z=4");
    EXPECT_FALSE(json::parse(no.out)["reachable"].get<bool>());
}

TEST(Cli, AmplifierVerify) {
    auto r = cli("amp verify --d 1 --A 16 --B 3");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("1023"), std::string::npos);
}

TEST(Cli, HierarchyF) {
    auto r = cli("hierarchy F --i 1 --n 3");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["value"], "5");
}

TEST(Cli, ReduceRejectsToyTwo) {
    auto r = cli("reduce verify --n 2 --d 1 --in " + prog("toy2tests.vp"));
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_FALSE(j["lhs"].get<bool>());
    EXPECT_FALSE(j["rhs"].get<bool>());
}

TEST(Cli, OracleDifferentialAndSelfTest) {
    EXPECT_EQ(cli("oracle diff --count 10").code, 0);
    EXPECT_EQ(cli("oracle diff --count 10 --corrupt-engine").code, 1);
}

TEST(Cli, BudgetJsonOverride) {
    auto r = cli("--budget '{\"max_steps\": 1}' run " + prog("example1_goto.vp") + " --init x=2");
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, ExportZeroTestedProgramFails) { EXPECT_EQ(cli("export to " + prog("single_test.vp")).code, 3); }

TEST(Cli, ExportImportRoundTrip) {
    auto r = cli("export roundtrip " + prog("example1_goto.vp") + " --box 3");
    ASSERT_EQ(r.code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["mismatches"], 0);
    EXPECT_EQ(j["starts"], 64);
}

TEST(Export, SingleIncrement) {
    auto v = export_vass(parse("counters: x\ninc x"));
    EXPECT_EQ(v.dimension(), 1u);
    EXPECT_FALSE(v.pushdown());
    ASSERT_EQ(v.transitions.size(), 1u);
    EXPECT_EQ(v.transitions[0].delta, std::vector<std::int64_t>{1});
    EXPECT_EQ(v.states[v.transitions[0].to], "halt");
    EXPECT_EQ(ExportedVASS::from_json(v.to_json()).to_json(), v.to_json());
}

TEST(Export, AmplifierDimension) {
    auto p2 = gen_Pd(2);
    auto v = export_vass(p2.program, p2.library);
    EXPECT_EQ(v.dimension(), 8u);
    EXPECT_NE(v.to_dot().find("digraph"), std::string::npos);
}

TEST(Export, Guards) {
    EXPECT_THROW(export_vass(parse("counters: x\nzero? x")), ProgramError);
    Program s = parse("counters: x\nstack: s\npush s; inc x\npop s");
    EXPECT_THROW(export_vass(s), ProgramError);
    auto v = export_vass(s, {}, true);
    EXPECT_TRUE(v.pushdown());
    EXPECT_EQ(v.to_json()["kind"], "pvass");
    EXPECT_THROW(ExportedVASS::from_json(json{{"format_version", 1}}), std::exception);
}

TEST(Export, RoundTripPreservesHaltingValuations) {
    std::ifstream in(prog("example1_goto.vp"));
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = check_round_trip(parse(ss.str()), 3, Budget{});
    EXPECT_EQ(r.verdict, Verdict::Verified);
    EXPECT_EQ(r.starts, 64u);
    EXPECT_EQ(r.mismatches, 0u);

    Budget small;
    small.max_counter_value = 8;
    small.max_stack_height = 8;
    auto s = check_round_trip(parse("counters: x\nstack: s\npush s; inc x\ngoto 1 3\npop s"), 2, small);
    EXPECT_EQ(s.mismatches, 0u);
}
