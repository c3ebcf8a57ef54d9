#pragma once

#include "vassforge/invariants.hpp"
#include "vassforge/verdict.hpp"

namespace vassforge {

struct ZeroElimContext {
    std::string x = "x", y = "y";
    std::string a = "a", b = "b", c = "c";
    std::string t = "t";
    void validate() const;  // six distinct names
    std::vector<std::string> counters() const;
    InvariantSpec invariant() const;
};

// target is ctx.x or ctx.y.
Program gen_zero_gadget(const std::string& target, const ZeroElimContext& ctx = {});

// Balances every x/y update with the opposite update of a and replaces each zero test by a gadget.
// Structured programs stay structured; programs with gotos are rewritten line by line.
Program eliminate_zero_tests(const Program& p, const ZeroElimContext& ctx = {});

// Atomic commands after desugaring.
std::size_t atom_count(const Program& p);

// Adds a fresh counter incremented after every zero test.
Program instrument_zero_tests(const Program& p, const std::string& counter);

struct SourceRunResult {
    bool found = false;
    std::optional<Run> witness;  // over p with the zero_tests counter added
    std::uint64_t excursion = 0; // largest x+y on the witness
    Truncation truncation;
};

// All-zero to all-zero complete run of p with exactly B zero tests, x+y <= xy_cap throughout.
SourceRunResult find_source_run(const Program& p, std::uint64_t B, std::uint64_t xy_cap, const Budget& b,
                                const ZeroElimContext& ctx = {});

struct ZeroElimReport {
    std::uint64_t B = 0, A_max = 0;
    bool lhs = false;                       // p has an all-zero to all-zero run with exactly B tests
    std::optional<std::uint64_t> witness_A; // smallest A whose triple reaches "all but a zero"
    std::optional<Run> p_witness, pp_witness;
    std::uint64_t gadget_visits = 0;        // on the P' witness
    bool witness_maps_back = false;         // B gadget visits and x=y=0 at the end
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    Truncation truncation;
    nlohmann::json to_json(const Compiled& p, const Compiled& pp) const;
};

// A_max = 0 selects 4^B times the largest x+y on the shortest p witness (at least 1).
ZeroElimReport verify_zeroelim(const Program& p, std::uint64_t B, std::uint64_t A_max, const Budget& b,
                               const ZeroElimContext& ctx = {});

struct GadgetLemmaReport {
    std::uint64_t starts = 0, good_starts = 0, broken_starts = 0, violating_starts = 0, exhausted_b_starts = 0;
    std::uint64_t neither_starts = 0;          // no claim: the invariant does not hold at the start
    std::uint64_t neither_reaching_holds = 0;  // informational
    std::uint64_t failures = 0;
    std::vector<nlohmann::json> counterexamples;  // first few
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::json to_json() const;
};

// Exhaustive over a+x+y+t <= max_sum, b <= max_b, c <= c_max (0 selects max_sum*(4^max_b-1)+1).
GadgetLemmaReport check_gadget_lemma(const std::string& target, std::uint64_t max_sum, std::uint64_t max_b,
                                     std::uint64_t c_max = 0, const ZeroElimContext& ctx = {});

}  // namespace vassforge
