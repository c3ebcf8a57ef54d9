#pragma once

#include "vassforge/semantics.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace vassforge {

using BigNat = boost::multiprecision::cpp_int;

// F_0(n) = n+2, F_{i+1}(n) = F_i^{n-1}(1), evaluated literally and memoised.
BigNat F(unsigned i, const BigNat& n);

BigNat iterate(const std::function<BigNat(const BigNat&)>& f, const BigNat& k, BigNat seed);

// F_i is constant 1 for i >= 2 under the literal definition, since F_1(1) = 1.
bool literally_degenerate(unsigned i);
std::string degeneracy_note();

struct AmplifierSpec;

struct MeasuredEntry {
    enum class Kind { Triple, Nothing, Inconclusive, Falsified } kind = Kind::Nothing;
    std::uint64_t A = 0;            // input scale that produced the entry
    BigNat b_out = 0;               // output B
    std::int64_t a_scale_exp = 0;   // a_out = A * 4^a_scale_exp
    std::string detail;
};

struct MeasuredFunction {
    std::map<std::uint64_t, MeasuredEntry> table;  // B -> outcome
    nlohmann::json to_json() const;
};

using ASchedule = std::function<std::vector<std::uint64_t>(std::uint64_t B)>;

// For each B <= B_max, z_compute from the first scheduled A that yields a unique run.
MeasuredFunction measured_function(const AmplifierSpec& amp, std::uint64_t B_max, const ASchedule& A_schedule,
                                   const Budget& b);

std::string to_string(MeasuredEntry::Kind k);

}  // namespace vassforge
