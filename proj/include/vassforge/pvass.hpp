#pragma once

#include "vassforge/amplifiers.hpp"
#include "vassforge/oracle.hpp"

namespace vassforge {

// Correspondence of one line of a pushdown amplifier to its counterpart.
struct LineLink {
    enum class Kind {
        Control,         // goto with corresponding targets
        Step,            // same effect under val
        Partial,         // shuffle line: part of the counterpart line's effect
        ShuffleControl,  // goto inside the shuffle block
    } kind = Kind::Control;
    LineNo p_line = 0;
};

std::string to_string(LineLink::Kind k);

struct PushdownAmplifierSpec {
    std::string name;
    Program program;  // structured, with stack
    Library library;
    std::string a = "a", b = "b", c = "c", t = "t";
    std::string in_b = "b'", in_c = "c'";
    std::vector<std::string> Z;          // end counters of the counterpart, delegated or not
    std::vector<std::string> delegated;  // realized as stack symbols
    unsigned depth = 1;
    std::string lineage;
    std::vector<std::string> schedule;  // "bar" / "tilde", innermost first
    AmplifierSpec counterpart;
    std::vector<LineLink> line_map;  // indexed by flat line - 1

    Compiled compile() const { return vassforge::compile(program, library); }
    bool delegates(const std::string& x) const;
    std::vector<std::string> counters() const;
    std::vector<std::string> end_counters() const;  // Z without the delegated ones
    nlohmann::json to_json() const;
};

struct ValMap {
    std::vector<std::string> X, S;
    void validate() const;  // X and S disjoint
    static ValMap of(const Compiled& cp);
};

// Copies X and counts the occurrences of every symbol of S.
Valuation val(const ValMap& m, const Compiled& cp, const Configuration& c);
Valuation val(const ValMap& m, const Valuation& x, const std::vector<std::string>& stack);

PushdownAmplifierSpec gen_Q1();
// Requires q to delegate its input b but not its input c.
PushdownAmplifierSpec lift_tilde(const PushdownAmplifierSpec& q);
// Requires q to delegate both inputs.
PushdownAmplifierSpec lift_bar(const PushdownAmplifierSpec& q);
PushdownAmplifierSpec gen_Qd(unsigned d);

// The interleaving block of lift_bar, pushing b-units as in_b and c-units as four in_c each.
std::string shuffle_block(const std::string& b, const std::string& c, const std::string& c_src,
                          const std::string& in_b, const std::string& in_c, const std::string& indent);

struct LineCorrespondenceReport {
    std::uint64_t steps = 0, partial = 0, control = 0, shuffle_control = 0;
    std::vector<std::string> mismatches;
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::json to_json() const;
};

LineCorrespondenceReport check_line_correspondence(const PushdownAmplifierSpec& q);

// Non-delegated inputs from T[A,B]; stack bottom first.
Configuration q_input_configuration(const PushdownAmplifierSpec& q, const Compiled& cp, std::uint64_t A,
                                    std::uint64_t B, const std::vector<std::string>& stack);

struct ForwardCheck {
    std::string stack;  // initial word
    std::uint64_t q_finals = 0, p_finals = 0, unmatched = 0;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    nlohmann::json to_json() const;
};

// Every halting q-configuration reachable from init has a p-run between the val-images (oracle).
ForwardCheck check_forward(const PushdownAmplifierSpec& q, const Configuration& init, const Budget& b);

struct SimulationCase {
    std::uint64_t A = 0, B = 0;
    ContractExpectation expected;
    std::vector<std::string> witness_stack;  // bottom first
    std::optional<Run> q_witness;
    bool witness_ok = false;
    std::vector<ForwardCheck> forward;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
};

struct SimulationReport {
    std::string q, p;
    LineCorrespondenceReport lines;
    std::vector<SimulationCase> cases;
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::json to_json(const Compiled& qcp) const;
};

SimulationReport check_simulation(const PushdownAmplifierSpec& q, const AmplifierSpec& p,
                                  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cases,
                                  const Budget& b);

struct ShuffleReport {
    std::uint64_t b_units = 0, c_symbols = 0;
    std::uint64_t expected = 0, produced = 0;
    std::vector<std::string> missing, unexpected;
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::json to_json() const;
};

// Exhaustive: every ordering of b_units b'-pushes among c_symbols c'-pushes (c_symbols divisible by 4).
ShuffleReport check_shuffle(std::uint64_t b_units, std::uint64_t c_symbols, const Budget& b = {});

}  // namespace vassforge
