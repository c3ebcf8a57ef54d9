#pragma once

#include "vassforge/amplifier_spec.hpp"
#include "vassforge/hierarchy.hpp"
#include "vassforge/invariants.hpp"
#include "vassforge/verdict.hpp"

namespace vassforge {

AmplifierSpec gen_P1();
// Adds fresh input counters b''/c'' (one more prime than the inner inputs) and calls the inner program.
AmplifierSpec lift(const AmplifierSpec& inner);
AmplifierSpec gen_Pd(unsigned d);

// A*4^B, the value of a+c+t+sum(Z)+c_in along every run from T[A,B].
std::uint64_t conserved_total(std::uint64_t A, std::uint64_t B);
// Counter cap that is exact for runs from T[A,B].
std::uint64_t amplifier_counter_cap(std::uint64_t A, std::uint64_t B);

TripleRoles input_roles(const AmplifierSpec& amp, const Compiled& cp);
TripleRoles output_roles(const AmplifierSpec& amp, const Compiled& cp);
Configuration input_configuration(const AmplifierSpec& amp, const Compiled& cp, std::uint64_t A, std::uint64_t B);

using NatFunction = std::function<BigNat(const BigNat&)>;

// Literal F_depth.
NatFunction declared_function(const AmplifierSpec& amp);

struct ContractExpectation {
    bool produces = false;     // 4^{max(0,F(B)-B)} divides A
    std::uint64_t divisibility_exp = 0;
    BigNat F_B = 0;
    BigNat a_out = 0, b_out = 0;  // when produces
    nlohmann::json to_json() const;
};

ContractExpectation expected_output(std::uint64_t A, std::uint64_t B, const NatFunction& F);

struct AmplifierCase {
    std::uint64_t A = 0, B = 0;
    ContractExpectation expected;
    ZComputeResult result;
    std::optional<StrongReport> strong;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
};

struct AmplifierReport {
    std::string name;
    std::vector<AmplifierCase> cases;
    Verdict verdict = Verdict::Verified;
    nlohmann::json to_json(const Compiled& cp) const;
};

AmplifierReport verify_amplifier(const AmplifierSpec& amp, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cases,
                                 const Budget& b, const NatFunction& F = {});

// Classification of a run of a lifted amplifier.
struct LiftRunClass {
    std::uint64_t iterations = 0;
    bool complete = false;
    bool loops_maximal = true;  // flat loops of the outer program
    bool calls_zeroing = true;  // every call to the inner program finished Z-zeroing
    bool good = false;          // B-1 iterations, loops maximal, calls zeroing
    bool zeroing = false;       // complete and every end counter zero
    nlohmann::json to_json() const;
};

LiftRunClass classify_lift_run(const AmplifierSpec& amp, const Compiled& cp, const Run& r, std::uint64_t B);

struct Checkpoint {
    enum class Kind { W0, X, Y, Final } kind = Kind::W0;
    std::uint64_t index = 0;
    std::size_t step = 0;  // position in the run
    Valuation expected, actual;
    bool match = false;
    std::string figure_c;  // the figure's c-column expression, informational
    std::string detail;
};

std::string to_string(Checkpoint::Kind k);

struct CheckpointReport {
    std::uint64_t A = 0, B = 0;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Checkpoint> rows;
    std::optional<LiftRunClass> run_class;
    std::string detail;
    nlohmann::json z_compute;
    nlohmann::json to_json() const;
};

// F is the inner amplifier's function; defaults to the literal F_{depth-1}.
CheckpointReport checkpoint_trace(const AmplifierSpec& amp, std::uint64_t A, std::uint64_t B, const Budget& b,
                                  const NatFunction& F_inner = {});

struct LiftClaimReport {
    std::uint64_t A = 0, B = 0;
    Verdict verdict = Verdict::Inconclusive;
    bool good_run_claim = false;   // good runs exist iff the divisibility holds, and the unique zeroing run is good
    bool bad_run_claim = false;    // no enumerated non-good complete run is zeroing
    bool sum_static = false;       // every line preserves a+c+t+sum(Z)+c_in
    std::uint64_t enumerated = 0, complete = 0, non_good = 0;
    std::uint64_t sum_violations = 0, decrease_violations = 0, strong_violations = 0;
    Truncation enumeration;        // runs beyond the limit are not inspected
    std::string detail;
    nlohmann::json to_json() const;
};

LiftClaimReport check_lift_claims(const AmplifierSpec& amp, std::uint64_t A, std::uint64_t B, const Budget& b,
                                  std::uint64_t enumerate_limit = 20000);

}  // namespace vassforge
