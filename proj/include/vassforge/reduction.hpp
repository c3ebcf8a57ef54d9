#pragma once

#include "vassforge/pvass.hpp"
#include "vassforge/zeroelim.hpp"

#include <memory>

namespace vassforge {

struct ReductionOptions {
    bool unroll_bprime = true;   // n copies of P_d instead of the counter b'
    bool reuse_counters = true;  // P' runs on counters of P_d that are zero after it
    enum class Target { CounterOnly, Pushdown } target = Target::CounterOnly;
    void validate() const;       // reuse requires unroll
};

struct PhaseRanges {
    std::pair<LineNo, LineNo> prelude, amplifier, simulation, drain;  // [begin, end)
    nlohmann::json to_json() const;
};

struct ReductionInstance {
    Program program;  // flat
    ReductionOptions options;
    std::uint64_t n = 0;
    unsigned d = 0;
    PhaseRanges phases;
    std::string a, in_b, in_c, out_b, out_c;  // roles; in_b is empty once unrolled
    std::vector<std::string> end_counters;   // of the amplifier, under their final names
    std::map<std::string, std::string> reuse;  // P' counter -> amplifier counter
    std::string stack_counter;                 // P' counter kept on the stack (pushdown target)
    ZeroElimContext context;                   // names used by P' before any renaming
    nlohmann::json to_json(bool with_program = false) const;
};

// Counter-only instance: prelude, P_d (or its unrolled copies), P', drain of a.
ReductionInstance build_Ppp(const Program& p, std::uint64_t n, unsigned d, const ReductionOptions& opts = {});
// Pushdown instance with Q_d; for odd d the prelude pushes b' and c' symbols in every interleaving.
ReductionInstance build_Qpp(const Program& p, std::uint64_t n, unsigned d);

// Replaces the counter b' of a flat amplifier by n+1 copies indexed by its value.
Program unroll_counter(const Program& flat, const std::string& counter, std::uint64_t n);

struct PreludeOutcome {
    std::uint64_t A = 0;
    Valuation values;
    std::string stack;
    auto operator<=>(const PreludeOutcome&) const = default;
};

// Configurations on entry to the amplifier phase with a <= A_max.
std::vector<PreludeOutcome> prelude_outcomes(const ReductionInstance& inst, std::uint64_t A_max, const Budget& b);

struct PhaseCheck {
    bool prelude_triple = false;  // triple on the amplifier inputs
    bool amplifier_zeroing = false;  // end counters zero, output triple with b = F_d(n)
    bool simulation_zeroing = false; // everything but a zero before the drain
    bool ok() const { return prelude_triple && amplifier_zeroing && simulation_zeroing; }
    nlohmann::json to_json() const;
};

struct ReductionReport {
    std::string mode;
    std::uint64_t n = 0;
    unsigned d = 0;
    BigNat target_tests = 0;  // F_d(n)
    std::string function_note;
    std::uint64_t A_max = 0;
    std::size_t counters = 0, size = 0;
    bool lhs = false;  // instance has an all-zero to all-zero run (a <= A_max)
    bool lhs_positive = false;  // the same with at least one prelude iteration
    bool rhs = false;  // p has a run with exactly F_d(n) zero tests
    std::optional<Run> lhs_witness, positive_witness, rhs_witness;
    std::optional<std::uint64_t> witness_A;  // prelude iterations on the positive witness
    std::optional<PhaseCheck> phases;  // on the positive witness
    std::uint64_t states = 0;
    Truncation truncation;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    std::shared_ptr<const Compiled> instance, source;  // for rendering the witnesses
    nlohmann::json to_json(bool with_traces = false) const;
};

// A_max = 0 selects 4^(F_d(n)-n) times the rhs excursion (at least 1).
ReductionReport verify_reduction(const Program& p, std::uint64_t n, unsigned d, const Budget& b,
                                 const ReductionOptions& opts = {}, std::uint64_t A_max = 0);

}  // namespace vassforge
