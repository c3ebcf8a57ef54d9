#include "vassforge/hierarchy.hpp"

#include "vassforge/amplifiers.hpp"
#include "vassforge/invariants.hpp"

#include <mutex>

namespace vassforge {

namespace {

std::mutex memo_mu;
std::map<std::pair<unsigned, BigNat>, BigNat>& memo() {
    static std::map<std::pair<unsigned, BigNat>, BigNat> m;
    return m;
}

}  // namespace

BigNat F(unsigned i, const BigNat& n) {
    if (n < 1) throw ProgramError("F_i is defined on positive integers only");
    if (i == 0) return n + 2;
    {
        std::lock_guard lk(memo_mu);
        if (auto it = memo().find({i, n}); it != memo().end()) return it->second;
    }
    BigNat v = iterate([i](const BigNat& x) { return F(i - 1, x); }, n - 1, 1);
    std::lock_guard lk(memo_mu);
    memo().emplace(std::make_pair(i, n), v);  // first insert wins
    return memo().at({i, n});
}

BigNat iterate(const std::function<BigNat(const BigNat&)>& f, const BigNat& k, BigNat seed) {
    if (k < 0) throw ProgramError("iteration count must be nonnegative");
    for (BigNat j = 0; j < k; ++j) seed = f(seed);
    return seed;
}

bool literally_degenerate(unsigned i) { return i >= 2; }

std::string degeneracy_note() {
    return "literal F_{i+1}(n) = F_i^{n-1}(1) makes F_1(1) = 1 a fixed point, so F_i(n) = 1 for all i >= 2; "
           "amplifier contracts are evaluated with this literal F and the divisibility exponent clamped at 0";
}

std::string to_string(MeasuredEntry::Kind k) {
    switch (k) {
    case MeasuredEntry::Kind::Triple: return "Triple";
    case MeasuredEntry::Kind::Nothing: return "Nothing";
    case MeasuredEntry::Kind::Inconclusive: return "Inconclusive";
    case MeasuredEntry::Kind::Falsified: return "Falsified";
    }
    return "?";
}

nlohmann::json MeasuredFunction::to_json() const {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [B, e] : table) {
        nlohmann::json o{{"kind", vassforge::to_string(e.kind)}, {"A", e.A}};
        if (e.kind == MeasuredEntry::Kind::Triple) {
            o["B_out"] = e.b_out.str();
            o["a_scale"] = "4^" + std::to_string(e.a_scale_exp);
        }
        if (!e.detail.empty()) o["detail"] = e.detail;
        t[std::to_string(B)] = o;
    }
    return {{"table", t}, {"note", degeneracy_note()}};
}

MeasuredFunction measured_function(const AmplifierSpec& amp, std::uint64_t B_max, const ASchedule& A_schedule,
                                   const Budget& b) {
    MeasuredFunction mf;
    Compiled cp = amp.compile();
    TripleRoles out_roles{amp.a, amp.b, amp.c, cp.counters};
    for (std::uint64_t B = 1; B <= B_max; ++B) {
        MeasuredEntry entry;
        bool inconclusive = false;
        for (std::uint64_t A : A_schedule(B)) {
            Budget bb = b;
            bb.max_counter_value = std::max<std::uint64_t>(1, conserved_total(A, B));
            auto r = z_compute(cp, input_configuration(amp, cp, A, B), amp.Z, bb);
            if (r.kind == ZComputeResult::Kind::Inconclusive) {
                inconclusive = true;
                continue;
            }
            if (r.kind == ZComputeResult::Kind::Nothing) continue;
            entry.A = A;
            if (r.kind == ZComputeResult::Kind::Multiple) {
                entry.kind = MeasuredEntry::Kind::Falsified;
                entry.detail = "more than one Z-zeroing run";
                break;
            }
            auto tri = recognize_triple(valuation_of(cp, r.finals.front()), out_roles);
            if (!tri) {
                entry.kind = MeasuredEntry::Kind::Falsified;
                entry.detail = "unique run ends outside the triple shape";
                break;
            }
            entry.kind = MeasuredEntry::Kind::Triple;
            entry.b_out = tri->second;
            std::int64_t e = 0;
            std::uint64_t a_out = tri->first;
            if (a_out >= A) {
                while (A * (std::uint64_t{1} << (2 * e)) < a_out) ++e;
            } else {
                while (a_out * (std::uint64_t{1} << (2 * -e)) < A) --e;
            }
            entry.a_scale_exp = e;
            break;
        }
        if (entry.kind == MeasuredEntry::Kind::Nothing && inconclusive) entry.kind = MeasuredEntry::Kind::Inconclusive;
        mf.table[B] = entry;
    }
    return mf;
}

}  // namespace vassforge
