#include "vassforge/program.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace vassforge;

namespace {

std::string program_text(const std::string& name) {
    std::ifstream in(std::string(VASSFORGE_PROGRAMS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Parse, SmallestProgram) {
    Program p = parse("inc x");
    EXPECT_EQ(p.counters, std::vector<std::string>{"x"});
    EXPECT_EQ(p.line_count(), 1u);
}

TEST(Parse, GotoPresentationOfExampleOne) {
    Program p = parse(program_text("example1_goto.vp"));
    EXPECT_EQ(p.line_count(), 6u);
    EXPECT_EQ(p.counters, (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_TRUE(p.has_gotos());
}

TEST(Parse, UndeclaredStackSymbolIsRejected) {
    EXPECT_THROW(parse("counters: x\npop s"), ProgramError);
}

TEST(Parse, ErrorsCarryPosition) {
    try {
        parse("counters: x\nfrobnicate x");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2u);
    }
}

TEST(Parse, PrettyPrintRoundTrip) {
    for (const char* f : {"example1_goto.vp", "example1_loop.vp", "example1_compact.vp", "toy3tests.vp"}) {
        Program p = parse(program_text(f));
        EXPECT_EQ(parse(pretty_print(p)), p) << f;
    }
}

TEST(Parse, JsonRoundTrip) {
    Program p = parse(program_text("example1_loop.vp"));
    auto j = to_json(p);
    EXPECT_EQ(j["format_version"], kFormatVersion);
    EXPECT_EQ(program_from_json(j), p);
    j["format_version"] = 99;
    EXPECT_THROW(program_from_json(j), ProgramError);
}

TEST(Desugar, LoopFormMatchesGotoFormLineForLine) {
    Program loop = desugar(parse(program_text("example1_loop.vp")));
    Program gotos = desugar(parse(program_text("example1_goto.vp")));
    EXPECT_EQ(loop, gotos);
}

TEST(Desugar, CompactFormFoldsTheLoopBodyIntoOneLine) {
    EXPECT_EQ(pretty_print(desugar(parse(program_text("example1_compact.vp")))),
              "counters: x y z\ngoto 2 4\ndec x; inc y; inc z; inc z\ngoto 1 1\ninc z\n");
}

TEST(Desugar, AddUnfoldsToIncrements) {
    Program p = desugar(parse("add z 2"));
    ASSERT_EQ(p.body.size(), 1u);
    const auto& cmds = std::get<Line>(p.body[0].node).commands;
    ASSERT_EQ(cmds.size(), 2u);
    EXPECT_EQ(to_string(cmds[0]), "inc z");
    EXPECT_EQ(to_string(cmds[1]), "inc z");
}

TEST(Desugar, MoveKUnfoldsToUnitSteps) {
    auto atoms = expand_atoms(MoveK{"t", "c", 8});
    EXPECT_EQ(atoms.size(), 16u);
}

TEST(Desugar, LayoutRecordsLoops) {
    auto fp = desugar_with_layout(parse(program_text("example1_loop.vp")));
    ASSERT_EQ(fp.layout.loops.size(), 1u);
    EXPECT_EQ(fp.layout.loops[0].entry, 1u);
    EXPECT_EQ(fp.layout.loops[0].exit, 6u);
    EXPECT_TRUE(fp.layout.loops[0].flat);
    EXPECT_EQ(detect_loops(fp.program).size(), 1u);
}

TEST(Desugar, CallsAreInlined) {
    Library lib{{"inner", parse("counters: u\ninc u\ndec u")}};
    Program p = parse("counters: u\ninc u\ncall inner");
    Program flat = desugar(p, lib);
    EXPECT_EQ(flat.body.size(), 3u);
    EXPECT_THROW(desugar(parse("call missing"), lib), ProgramError);
}

TEST(Compose, EmptyIsIdentity) {
    Program p = desugar(parse(program_text("example1_goto.vp")));
    EXPECT_EQ(compose(p, Program{}), p);
}

TEST(Compose, LineCountsAddAndGotosShift) {
    Program p = desugar(parse(program_text("example1_goto.vp")));
    Program q = parse("counters: x\ngoto 1 1");
    Program pq = compose(p, q);
    EXPECT_EQ(pq.line_count(), p.line_count() + q.line_count());
    Program back = parse(pretty_print(pq));
    const auto& last = std::get<Line>(back.body.back().node).commands;
    ASSERT_EQ(last.size(), 1u);
    EXPECT_EQ(std::get<Goto>(last[0]).first, 7u);
    EXPECT_EQ(std::get<Goto>(last[0]).second, 7u);
}
