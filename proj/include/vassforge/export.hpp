#pragma once

#include "vassforge/semantics.hpp"
#include "vassforge/verdict.hpp"

namespace vassforge {

struct StackOp {
    enum class Kind { Push, Pop } kind = Kind::Push;
    std::string symbol;
    bool operator==(const StackOp&) const = default;
};

struct VassTransition {
    std::size_t from = 0, to = 0;     // state indices
    std::vector<std::int64_t> delta;  // one entry per counter
    std::optional<StackOp> stack;
    bool operator==(const VassTransition&) const = default;
};

// One state per line plus halt; a line with k > 1 atoms adds k-1 intermediate states.
struct ExportedVASS {
    std::vector<std::string> counters, alphabet;
    std::vector<std::string> states;  // "L<line>", "L<line>.<i>", "halt"
    std::size_t initial = 0, halt = 0;
    std::vector<VassTransition> transitions;

    std::size_t dimension() const { return counters.size(); }
    bool pushdown() const { return !alphabet.empty(); }
    nlohmann::json to_json() const;
    static ExportedVASS from_json(const nlohmann::json& j);
    std::string to_dot() const;
};

// Throws ProgramError on zero tests, and on stack commands unless allow_stack.
ExportedVASS export_vass(const Program& p, const Library& lib = {}, bool allow_stack = false);

// Flat program with the same complete runs: per state a goto chain over its transitions.
Program import_vass(const ExportedVASS& v);

struct RoundTripReport {
    std::uint64_t box = 0, starts = 0, mismatches = 0;
    std::vector<std::string> examples;
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::json to_json() const;
};

// Compares halting valuations of p and import_vass(export_vass(p)) from every start valuation in [0, box]^k.
RoundTripReport check_round_trip(const Program& p, std::uint64_t box, const Budget& b, const Library& lib = {});

}  // namespace vassforge
