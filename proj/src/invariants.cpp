#include "vassforge/invariants.hpp"

#include <algorithm>

namespace vassforge {

void TripleRoles::validate() const {
    if (a == b || a == c || b == c) throw ProgramError("triple roles must be distinct");
    for (const auto& r : {a, b, c})
        if (std::find(universe.begin(), universe.end(), r) == universe.end())
            throw ProgramError("triple role '" + r + "' is not in the universe");
}

BigNat pow4(std::uint64_t B) {
    BigNat r = 1;
    r <<= static_cast<unsigned>(2 * B);
    return r;
}

Valuation make_triple(std::uint64_t A, std::uint64_t B, const TripleRoles& roles) {
    roles.validate();
    BigNat c = BigNat(A) * (pow4(B) - 1);
    if (c > std::numeric_limits<std::uint64_t>::max()) throw ProgramError("triple does not fit 64-bit counters");
    Valuation v;
    for (const auto& x : roles.universe) v[x] = 0;
    v[roles.a] = A;
    v[roles.b] = B;
    v[roles.c] = static_cast<std::uint64_t>(c);
    return v;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> recognize_triple(const Valuation& v, const TripleRoles& roles) {
    roles.validate();
    auto get = [&](const std::string& n) -> std::uint64_t {
        auto it = v.find(n);
        return it == v.end() ? 0 : it->second;
    };
    std::uint64_t A = get(roles.a), B = get(roles.b);
    if (BigNat(get(roles.c)) != BigNat(A) * (pow4(B) - 1)) return std::nullopt;
    for (const auto& x : roles.universe)
        if (x != roles.a && x != roles.b && x != roles.c && get(x) != 0) return std::nullopt;
    return std::make_pair(A, B);
}

std::string to_string(InvariantStatus s) {
    switch (s) {
    case InvariantStatus::Holds: return "Holds";
    case InvariantStatus::Broken: return "Broken";
    case InvariantStatus::Neither: return "Neither";
    }
    return "?";
}

InvariantSpec InvariantSpec::zero_elim(std::string a, std::string b, std::string c, std::string x, std::string y,
                                       std::string t) {
    InvariantSpec s;
    s.family = Family::ZeroElim;
    s.a = std::move(a);
    s.b = std::move(b);
    s.c = std::move(c);
    s.x = std::move(x);
    s.y = std::move(y);
    s.t = std::move(t);
    return s;
}

InvariantSpec InvariantSpec::p1(std::string bp, std::string cp) {
    InvariantSpec s;
    s.family = Family::P1;
    s.bp = std::move(bp);
    s.cp = std::move(cp);
    return s;
}

InvariantSpec InvariantSpec::lifted(std::string bpp, std::string cpp, std::vector<std::string> Z) {
    InvariantSpec s;
    s.family = Family::Lifted;
    s.bp = std::move(bpp);
    s.cp = std::move(cpp);
    s.Z = std::move(Z);
    return s;
}

InvariantStatus eval_invariant(const InvariantSpec& spec, const Valuation& v) {
    auto get = [&](const std::string& n) -> BigNat {
        auto it = v.find(n);
        if (it == v.end()) throw ProgramError("invariant role '" + n + "' missing from valuation");
        return BigNat(it->second);
    };
    BigNat S, slack;
    std::uint64_t e;
    switch (spec.family) {
    case InvariantSpec::Family::ZeroElim:
        S = get(spec.a) + get(spec.x) + get(spec.y) + get(spec.t);
        slack = get(spec.c);
        e = static_cast<std::uint64_t>(get(spec.b));
        break;
    case InvariantSpec::Family::P1:
        S = get(spec.a) + get(spec.c) + get(spec.t);
        slack = get(spec.cp);
        e = static_cast<std::uint64_t>(get(spec.bp));
        break;
    case InvariantSpec::Family::Lifted:
    default:
        S = get(spec.a) + get(spec.c) + get(spec.t);
        for (const auto& z : spec.Z) S += get(z);
        slack = get(spec.cp);
        e = static_cast<std::uint64_t>(get(spec.bp));
        break;
    }
    BigNat lhs = S * pow4(e), rhs = S + slack;
    bool holds = lhs == rhs && get(spec.t) == 0;
    bool broken = lhs < rhs;
    if (holds && broken) throw std::logic_error("invariant both holds and is broken");
    if (holds) return InvariantStatus::Holds;
    if (broken) return InvariantStatus::Broken;
    return InvariantStatus::Neither;
}

nlohmann::json StrongReport::to_json() const {
    return {{"sum_preserved", sum_preserved},
            {"inequality_preserved", inequality_preserved},
            {"antecedent_at_start", antecedent},
            {"sum_start", sum_start.str()},
            {"sum_end", sum_end.str()}};
}

StrongReport check_strong_conditions(const AmplifierSpec& amp, const Compiled& cp, const Run& r) {
    StrongReport rep;
    if (r.configs.empty()) return rep;
    auto sum = [&](const Configuration& c) {
        BigNat s = BigNat(c.values[cp.counter_index(amp.a)]) + c.values[cp.counter_index(amp.c)] +
                   c.values[cp.counter_index(amp.t)];
        for (const auto& z : amp.Z) s += c.values[cp.counter_index(z)];
        return s;
    };
    auto ineq = [&](const Configuration& c) {
        BigNat s = sum(c);
        BigNat lhs = (s - c.values[cp.counter_index(amp.in_c)]) * pow4(c.values[cp.counter_index(amp.in_b)]);
        return lhs < s;
    };
    const auto& first = r.configs.front();
    const auto& last = r.configs.back();
    rep.sum_start = sum(first);
    rep.sum_end = sum(last);
    rep.sum_preserved = rep.sum_start == rep.sum_end;
    rep.antecedent = ineq(first);
    rep.inequality_preserved = !rep.antecedent || ineq(last);
    return rep;
}

}  // namespace vassforge
