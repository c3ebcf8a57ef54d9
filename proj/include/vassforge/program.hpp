#pragma once

#include <cstdint>
#include <map>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace vassforge {

using LineNo = std::uint32_t;  // 1-based; #lines+1 is halt

struct Inc { std::string counter; };
struct Dec { std::string counter; };
struct ZeroTest { std::string counter; };
struct Push { std::string symbol; };
struct Pop { std::string symbol; };
struct Goto { LineNo first = 0; LineNo second = 0; };
struct Add { std::string counter; std::uint32_t amount = 0; };
struct Sub { std::string counter; std::uint32_t amount = 0; };
struct Move { std::string from, to; };
struct MoveK { std::string from, to; std::uint32_t amount = 0; };

bool operator==(const Inc&, const Inc&);
bool operator==(const Dec&, const Dec&);
bool operator==(const ZeroTest&, const ZeroTest&);
bool operator==(const Push&, const Push&);
bool operator==(const Pop&, const Pop&);
bool operator==(const Goto&, const Goto&);
bool operator==(const Add&, const Add&);
bool operator==(const Sub&, const Sub&);
bool operator==(const Move&, const Move&);
bool operator==(const MoveK&, const MoveK&);

using Command = std::variant<Inc, Dec, ZeroTest, Push, Pop, Goto, Add, Sub, Move, MoveK>;

bool is_atomic(const Command& c);
std::string to_string(const Command& c);
// Unfolds add/sub/move/movek into unit commands; atomic commands are returned as is.
std::vector<Command> expand_atoms(const Command& c);

struct Statement;

struct Line { std::vector<Command> commands; };
struct Loop { std::vector<Statement> body; };
struct Call { std::string name; };

struct Statement {
    std::variant<Line, Loop, Call> node;
};

bool operator==(const Line&, const Line&);
bool operator==(const Loop&, const Loop&);
bool operator==(const Call&, const Call&);
bool operator==(const Statement&, const Statement&);

struct Program {
    std::vector<std::string> counters;  // declaration order
    std::vector<std::string> alphabet;
    std::vector<Statement> body;

    bool has_counter(const std::string& n) const;
    bool has_symbol(const std::string& n) const;
    bool is_flat() const;         // only atomic lines
    bool has_gotos() const;
    bool has_zero_tests() const;
    std::size_t line_count() const;  // lines after desugaring, calls excluded
};

bool operator==(const Program&, const Program&);

using Library = std::map<std::string, Program>;

class ProgramError : public std::runtime_error {
  public:
    explicit ProgramError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public ProgramError {
  public:
    ParseError(std::size_t line, std::size_t column, const std::string& msg);
    std::size_t line, column;
};

// Layout recorded while desugaring; line numbers refer to the flat program.
struct LoopInfo {
    LineNo entry = 0, back = 0, exit = 0;
    bool flat = false;
};

struct CallInfo {
    std::string name;
    LineNo begin = 0, end = 0;  // [begin, end)
    int depth = 0;
};

struct Layout {
    std::vector<LoopInfo> loops;
    std::vector<CallInfo> calls;
    std::vector<std::pair<LineNo, LineNo>> top_level;  // [begin, end) per top-level statement
};

struct FlatProgram {
    Program program;
    Layout layout;
};

Program parse(const std::string& text);
std::string pretty_print(const Program& p);

Program desugar(const Program& p, const Library& lib = {});
FlatProgram desugar_with_layout(const Program& p, const Library& lib = {});

// Loops recognised from the goto pattern of a flat program.
std::vector<LoopInfo> detect_loops(const Program& flat);

Program compose(const Program& p, const Program& q, const Library& lib = {});

// Declares every counter used but not declared, in order of appearance.
void declare_used(Program& p);

nlohmann::json to_json(const Program& p);
Program program_from_json(const nlohmann::json& j);

inline constexpr int kFormatVersion = 1;

}  // namespace vassforge
