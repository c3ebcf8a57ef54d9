#pragma once

#include "vassforge/amplifier_spec.hpp"
#include "vassforge/hierarchy.hpp"

namespace vassforge {

struct TripleRoles {
    std::string a, b, c;
    std::vector<std::string> universe;
    void validate() const;
};

// a=A, b=B, c=A(4^B-1), every other counter of the universe 0.
Valuation make_triple(std::uint64_t A, std::uint64_t B, const TripleRoles& roles);
std::optional<std::pair<std::uint64_t, std::uint64_t>> recognize_triple(const Valuation& v, const TripleRoles& roles);

// 4^B as a big number.
BigNat pow4(std::uint64_t B);

enum class InvariantStatus { Holds, Broken, Neither };
std::string to_string(InvariantStatus s);

struct InvariantSpec {
    enum class Family { ZeroElim, P1, Lifted } family = Family::P1;
    std::string a = "a", b = "b", c = "c";
    std::string x = "x", y = "y";        // ZeroElim only
    std::string bp = "b'", cp = "c'";    // the exponent counter and the slack counter
    std::string t = "t";
    std::vector<std::string> Z;          // Lifted only; added to the sum

    static InvariantSpec zero_elim(std::string a = "a", std::string b = "b", std::string c = "c", std::string x = "x",
                                   std::string y = "y", std::string t = "t");
    static InvariantSpec p1(std::string bp = "b'", std::string cp = "c'");
    static InvariantSpec lifted(std::string bpp, std::string cpp, std::vector<std::string> Z);
};

// Holds iff S*4^e = S+slack and t=0; Broken iff S*4^e < S+slack; Neither otherwise.
InvariantStatus eval_invariant(const InvariantSpec& spec, const Valuation& v);

struct StrongReport {
    bool sum_preserved = true;       // condition 1
    bool inequality_preserved = true;  // condition 2 (vacuous when the antecedent fails)
    bool antecedent = false;
    BigNat sum_start = 0, sum_end = 0;
    nlohmann::json to_json() const;
};

// a+c+t+sum(Z) and (a+c+t+sum(Z)-c')*4^{b'} < a+c+t+sum(Z) on the run's end points.
StrongReport check_strong_conditions(const AmplifierSpec& amp, const Compiled& cp, const Run& r);

}  // namespace vassforge
