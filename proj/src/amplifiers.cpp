#include "vassforge/amplifiers.hpp"

#include <algorithm>
#include <sstream>

namespace vassforge {

namespace {

bool uses_name(const Program& p, const std::string& n) { return p.has_counter(n) || p.has_symbol(n); }

std::string fresh(const Program& p, std::string base) {
    if (!uses_name(p, base)) return base;
    for (int k = 1;; ++k) {
        std::string cand = base + std::to_string(k);
        if (!uses_name(p, cand)) return cand;
    }
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : " ") + x;
    return out;
}

// Records step boundaries from the layout of the compiled program.
void record_layout(AmplifierSpec& amp) {
    Compiled cp = amp.compile();
    const auto& top = cp.layout.top_level;
    if (top.size() != 4) throw std::logic_error("amplifier listing must have four top-level statements");
    amp.init_begin = top[0].first;
    amp.init_end = top[2].second;
    amp.outer_entry = top[3].first;
    amp.outer_exit = top[3].second;
    amp.inner_call.reset();
    for (const auto& c : cp.layout.calls)
        if (c.depth == 1) {
            amp.inner_call = c;
            break;
        }
}

BigNat value(const Configuration& c, const Compiled& cp, const std::string& n) {
    return BigNat(c.values[cp.counter_index(n)]);
}

// a+c+t+sum(Z) where Z is the amplifier's end set (it contains the input c).
BigNat conserved(const AmplifierSpec& amp, const Compiled& cp, const Configuration& c) {
    BigNat s = value(c, cp, amp.a) + value(c, cp, amp.c) + value(c, cp, amp.t);
    for (const auto& z : amp.Z) s += value(c, cp, z);
    return s;
}

BigNat potential(const AmplifierSpec& amp, const Compiled& cp, const Configuration& c) {
    return (conserved(amp, cp, c) - value(c, cp, amp.in_c)) * pow4(c.values[cp.counter_index(amp.in_b)]);
}

// A * 4^e for a possibly negative e; empty when not integral.
std::optional<BigNat> scale(std::uint64_t A, const BigNat& e) {
    if (e >= 0) return BigNat(A) * pow4(static_cast<std::uint64_t>(e));
    BigNat d = pow4(static_cast<std::uint64_t>(-e));
    if (BigNat(A) % d != 0) return std::nullopt;
    return BigNat(A) / d;
}

std::optional<Valuation> triple_over(const BigNat& a, const BigNat& b, const std::string& ra, const std::string& rb,
                                     const std::string& rc, const std::vector<std::string>& universe) {
    BigNat c = a * (pow4(static_cast<std::uint64_t>(b)) - 1);
    auto lim = BigNat(std::numeric_limits<std::uint64_t>::max());
    if (a > lim || b > lim || c > lim) return std::nullopt;
    Valuation v;
    for (const auto& x : universe) v[x] = 0;
    v[ra] = static_cast<std::uint64_t>(a);
    v[rb] = static_cast<std::uint64_t>(b);
    v[rc] = static_cast<std::uint64_t>(c);
    return v;
}

Valuation restrict(const Valuation& v, const std::vector<std::string>& universe) {
    Valuation out;
    for (const auto& x : universe) out[x] = v.at(x);
    return out;
}

nlohmann::json valuation_json(const Valuation& v) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, x] : v) j[k] = x;
    return j;
}

}  // namespace

std::vector<std::string> AmplifierSpec::counters() const { return compile().counters; }

std::size_t AmplifierSpec::instruction_count() const {
    Compiled cp = compile();
    std::size_t n = 0;
    for (const auto& l : cp.lines) n += l.is_goto ? 1 : l.atoms.size();
    return n;
}

AmplifierSpec gen_P1() {
    AmplifierSpec amp;
    amp.name = "P1";
    amp.program = parse(
        "counters: a b c t b' c'\n"
        "loop { move a t }\n"
        "loop { move t a; sub c' 3; add c 3 }\n"
        "sub b' 1; add b 1\n"
        "loop {\n"
        "  loop { move a t; sub c' 1; add t 1 }\n"
        "  loop { move c a; sub c' 1; add a 1 }\n"
        "  loop { move a c; sub c' 1; add c 1 }\n"
        "  loop { movek t c 8; sub c' 8; add a 1; add c 7 }\n"
        "  sub b' 1; add b 2\n"
        "}\n");
    amp.Z = {"c'"};
    amp.depth = 1;
    amp.lineage = "P1";
    record_layout(amp);
    return amp;
}

AmplifierSpec lift(const AmplifierSpec& inner) {
    AmplifierSpec out;
    out.name = "P" + std::to_string(inner.depth + 1);
    const Program& ip = inner.program;
    std::string nb = fresh(ip, inner.in_b + "'");
    std::string nc = fresh(ip, inner.in_c + "'");
    if (nb == nc) nc = fresh(ip, nc + "c");
    std::string callee = inner.name;
    const auto& [a, b, c, t] = std::tie(inner.a, inner.b, inner.c, inner.t);
    std::vector<std::string> counters = ip.counters;
    counters.push_back(nb);
    counters.push_back(nc);
    std::ostringstream src;
    src << "counters: " << join(counters) << "\n";
    if (!ip.alphabet.empty()) src << "stack: " << join(ip.alphabet) << "\n";
    src << "loop { move " << a << ' ' << t << " }\n"
        << "loop { move " << t << ' ' << a << "; sub " << nc << " 3; add " << c << " 3 }\n"
        << "sub " << nb << " 1; add " << b << " 1\n"
        << "loop {\n"
        << "  loop { move " << a << ' ' << t << " }\n"
        << "  loop { move " << t << ' ' << a << "; sub " << nc << " 3; add " << a << " 3 }\n"
        << "  loop { move " << c << ' ' << inner.in_c << "; sub " << nc << " 3; add " << inner.in_c << " 3 }\n"
        << "  loop { move " << b << ' ' << inner.in_b << " }\n"
        << "  call " << callee << "\n"
        << "  sub " << nb << " 1\n"
        << "}\n";
    out.program = parse(src.str());
    out.library = inner.library;
    out.library[callee] = inner.program;
    out.a = a;
    out.b = b;
    out.c = c;
    out.t = t;
    out.in_b = nb;
    out.in_c = nc;
    out.Z = inner.Z;
    out.Z.push_back(nc);
    out.depth = inner.depth + 1;
    out.lineage = "lift(" + inner.lineage + ")";
    out.inner_in_b = inner.in_b;
    out.inner_in_c = inner.in_c;
    out.inner_Z = inner.Z;
    record_layout(out);
    return out;
}

AmplifierSpec gen_Pd(unsigned d) {
    if (d < 1) throw ProgramError("d must be positive");
    AmplifierSpec amp = gen_P1();
    for (unsigned i = 1; i < d; ++i) amp = lift(amp);
    if (amp.program.counters.size() != 2 * d + 4) throw std::logic_error("P_d must use 2d+4 counters");
    if (amp.Z.size() != d) throw std::logic_error("P_d must have d end counters");
    return amp;
}

std::uint64_t conserved_total(std::uint64_t A, std::uint64_t B) {
    BigNat v = BigNat(A) * pow4(B);
    if (v > BigNat(std::numeric_limits<std::int64_t>::max())) throw ProgramError("A*4^B exceeds 63 bits");
    return static_cast<std::uint64_t>(v);
}

std::uint64_t amplifier_counter_cap(std::uint64_t A, std::uint64_t B) {
    return std::max<std::uint64_t>(conserved_total(A, B), 2 * B + 2);
}

TripleRoles input_roles(const AmplifierSpec& amp, const Compiled& cp) {
    return {amp.a, amp.in_b, amp.in_c, cp.counters};
}

TripleRoles output_roles(const AmplifierSpec& amp, const Compiled& cp) { return {amp.a, amp.b, amp.c, cp.counters}; }

Configuration input_configuration(const AmplifierSpec& amp, const Compiled& cp, std::uint64_t A, std::uint64_t B) {
    return make_configuration(cp, make_triple(A, B, input_roles(amp, cp)));
}

NatFunction declared_function(const AmplifierSpec& amp) {
    unsigned d = amp.depth;
    return [d](const BigNat& n) { return F(d, n); };
}

nlohmann::json ContractExpectation::to_json() const {
    nlohmann::json j{{"produces", produces}, {"divisibility", "4^" + std::to_string(divisibility_exp)},
                     {"F(B)", F_B.str()}};
    if (produces) {
        j["a_out"] = a_out.str();
        j["b_out"] = b_out.str();
    }
    return j;
}

ContractExpectation expected_output(std::uint64_t A, std::uint64_t B, const NatFunction& Ffn) {
    ContractExpectation e;
    e.F_B = Ffn(BigNat(B));
    BigNat diff = e.F_B - B;
    e.divisibility_exp = diff > 0 ? static_cast<std::uint64_t>(diff) : 0;
    e.produces = BigNat(A) % pow4(e.divisibility_exp) == 0;
    if (e.produces) {
        e.a_out = *scale(A, BigNat(B) - e.F_B);
        e.b_out = e.F_B;
    }
    return e;
}

nlohmann::json AmplifierReport::to_json(const Compiled& cp) const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cases) {
        nlohmann::json o{{"A", c.A}, {"B", c.B}, {"expected", c.expected.to_json()},
                         {"result", c.result.to_json(cp)}, {"verdict", to_string(c.verdict)}};
        if (c.strong) o["strong"] = c.strong->to_json();
        if (!c.detail.empty()) o["detail"] = c.detail;
        cs.push_back(o);
    }
    return {{"amplifier", name}, {"cases", cs}, {"verdict", to_string(verdict)}, {"note", degeneracy_note()}};
}

AmplifierReport verify_amplifier(const AmplifierSpec& amp, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cases,
                                 const Budget& b, const NatFunction& Fn) {
    AmplifierReport rep;
    rep.name = amp.name;
    Compiled cp = amp.compile();
    NatFunction f = Fn ? Fn : declared_function(amp);
    for (auto [A, B] : cases) {
        AmplifierCase ac;
        ac.A = A;
        ac.B = B;
        ac.expected = expected_output(A, B, f);
        Budget bb = b;
        bb.max_counter_value = amplifier_counter_cap(A, B);
        ac.result = z_compute(cp, input_configuration(amp, cp, A, B), amp.Z, bb);
        using K = ZComputeResult::Kind;
        switch (ac.result.kind) {
        case K::Inconclusive:
            ac.verdict = Verdict::Inconclusive;
            ac.detail = ac.result.detail;
            break;
        case K::Nothing:
            ac.verdict = ac.expected.produces ? Verdict::Falsified : Verdict::Verified;
            if (ac.expected.produces) ac.detail = "expected a unique run, found none";
            break;
        case K::Multiple:
            ac.verdict = Verdict::Falsified;
            ac.detail = "more than one Z-zeroing run";
            break;
        case K::UniqueRun: {
            ac.strong = check_strong_conditions(amp, cp, *ac.result.run);
            if (!ac.expected.produces) {
                ac.verdict = Verdict::Falsified;
                ac.detail = "expected nothing, found a unique run";
                break;
            }
            const Configuration& fin = ac.result.finals.front();
            auto tri = recognize_triple(valuation_of(cp, fin), output_roles(amp, cp));
            bool ok = tri && fin.stack.empty() && BigNat(tri->first) == ac.expected.a_out &&
                      BigNat(tri->second) == ac.expected.b_out;
            ac.verdict = ok ? Verdict::Verified : Verdict::Falsified;
            if (!ok) ac.detail = "unique run does not end in the expected triple";
            break;
        }
        }
        rep.verdict = combine(rep.verdict, ac.verdict);
        rep.cases.push_back(std::move(ac));
    }
    return rep;
}

nlohmann::json LiftRunClass::to_json() const {
    return {{"iterations", iterations}, {"complete", complete},         {"loops_maximal", loops_maximal},
            {"calls_zeroing", calls_zeroing}, {"good", good}, {"zeroing", zeroing}};
}

LiftRunClass classify_lift_run(const AmplifierSpec& amp, const Compiled& cp, const Run& r, std::uint64_t B) {
    if (!amp.inner_call) throw ProgramError(amp.name + " is not a lifted amplifier");
    LiftRunClass rc;
    rc.complete = r.complete();
    const auto& cfg = r.configs;
    for (std::size_t i = 0; i + 1 < cfg.size(); ++i)
        if (cfg[i].pc == amp.outer_entry && cfg[i + 1].pc == amp.outer_entry + 1) ++rc.iterations;
    auto ann = classify_run(cp, r, {{amp.inner_call->name, amp.inner_Z}});
    const CallInfo& ic = *amp.inner_call;
    for (const auto& l : ann.loops) {
        if (l.entry >= ic.begin && l.entry < ic.end) continue;
        if (l.maximal && !*l.maximal) rc.loops_maximal = false;
    }
    for (const auto& c : ann.calls) {
        if (c.depth != 1) continue;
        if (!c.finished || !c.zeroing || !*c.zeroing) rc.calls_zeroing = false;
    }
    rc.good = rc.complete && rc.iterations + 1 == B && rc.loops_maximal && rc.calls_zeroing;
    if (rc.complete) {
        rc.zeroing = cfg.back().stack.empty();
        for (const auto& z : amp.Z) rc.zeroing = rc.zeroing && cfg.back().values[cp.counter_index(z)] == 0;
    }
    return rc;
}

std::string to_string(Checkpoint::Kind k) {
    switch (k) {
    case Checkpoint::Kind::W0: return "w0";
    case Checkpoint::Kind::X: return "x";
    case Checkpoint::Kind::Y: return "y";
    case Checkpoint::Kind::Final: return "x_final";
    }
    return "?";
}

nlohmann::json CheckpointReport::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o{{"checkpoint", to_string(r.kind)}, {"index", r.index},       {"step", r.step},
                         {"expected", valuation_json(r.expected)}, {"actual", valuation_json(r.actual)},
                         {"match", r.match}};
        if (!r.figure_c.empty()) o["figure_c"] = r.figure_c;
        if (!r.detail.empty()) o["detail"] = r.detail;
        rs.push_back(o);
    }
    nlohmann::json j{{"A", A}, {"B", B}, {"verdict", to_string(verdict)}, {"rows", rs}, {"z_compute", z_compute},
                     {"note", degeneracy_note()}};
    if (run_class) j["run_class"] = run_class->to_json();
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

CheckpointReport checkpoint_trace(const AmplifierSpec& amp, std::uint64_t A, std::uint64_t B, const Budget& b,
                                  const NatFunction& F_inner) {
    if (!amp.inner_call) throw ProgramError(amp.name + " is not a lifted amplifier");
    CheckpointReport rep;
    rep.A = A;
    rep.B = B;
    Compiled cp = amp.compile();
    unsigned inner_depth = amp.depth - 1;
    NatFunction f = F_inner ? F_inner : NatFunction([inner_depth](const BigNat& n) { return F(inner_depth, n); });
    auto Fi = [&](std::uint64_t i) { return iterate(f, i, 1); };
    NatFunction lifted = [&](const BigNat& n) { return iterate(f, n - 1, 1); };
    ContractExpectation exp = expected_output(A, B, lifted);

    Budget bb = b;
    bb.max_counter_value = amplifier_counter_cap(A, B);
    Configuration init = input_configuration(amp, cp, A, B);
    ZComputeResult z = z_compute(cp, init, amp.Z, bb);
    rep.z_compute = z.to_json(cp);
    if (z.kind != ZComputeResult::Kind::UniqueRun) {
        if (z.kind == ZComputeResult::Kind::Inconclusive) rep.verdict = Verdict::Inconclusive;
        else if (z.kind == ZComputeResult::Kind::Multiple) rep.verdict = Verdict::Falsified;
        else rep.verdict = exp.produces ? Verdict::Falsified : Verdict::Verified;
        rep.detail = "no qualifying run: z_compute returned " + to_string(z.kind);
        // Classify the first complete run found by enumeration to show why it is bad.
        Budget eb = bb;
        eb.max_enumerated_runs = 100000;
        enumerate_runs(cp, init, eb, [&](const Run& r) {
            if (!r.complete()) return true;
            rep.run_class = classify_lift_run(amp, cp, r, B);
            return false;
        });
        return rep;
    }
    const Run& run = *z.run;
    rep.run_class = classify_lift_run(amp, cp, run, B);

    std::vector<std::string> X;
    for (const auto& n : cp.counters)
        if (n != amp.in_b && n != amp.in_c) X.push_back(n);

    auto add_row = [&](Checkpoint::Kind k, std::uint64_t idx, std::size_t at, const std::optional<BigNat>& a,
                       const BigNat& bval, const std::string& rb, const std::string& rc,
                       const std::vector<std::string>& universe, std::string figure) {
        Checkpoint row;
        row.kind = k;
        row.index = idx;
        row.step = at;
        row.actual = restrict(valuation_of(cp, run.configs[at]), universe);
        row.figure_c = std::move(figure);
        std::optional<Valuation> e;
        if (a) e = triple_over(*a, bval, amp.a, rb, rc, universe);
        if (!e) {
            row.detail = "expected triple is not integral or does not fit 64 bits";
        } else {
            row.expected = *e;
            row.match = row.expected == row.actual;
        }
        rep.rows.push_back(std::move(row));
    };

    std::vector<std::string> all = cp.counters;
    add_row(Checkpoint::Kind::W0, 0, 0, BigNat(A), BigNat(B), amp.in_b, amp.in_c, all, "");

    std::vector<std::size_t> iter_starts, call_starts;
    const auto& cfg = run.configs;
    const CallInfo& ic = *amp.inner_call;
    for (std::size_t i = 0; i + 1 < cfg.size(); ++i)
        if (cfg[i].pc == amp.outer_entry && cfg[i + 1].pc == amp.outer_entry + 1) iter_starts.push_back(i);
    for (std::size_t i = 1; i < cfg.size(); ++i) {
        bool in = cfg[i].pc >= ic.begin && cfg[i].pc < ic.end;
        bool was = cfg[i - 1].pc >= ic.begin && cfg[i - 1].pc < ic.end;
        if (in && !was) call_starts.push_back(i);
    }
    auto figure = [](const std::string& coeff) { return "c = " + coeff + " - a"; };
    for (std::uint64_t i = 0; i < iter_starts.size(); ++i) {
        BigNat fi = Fi(i);
        add_row(Checkpoint::Kind::X, i, iter_starts[i], scale(A, BigNat(i + 1) - fi), fi, amp.b, amp.c, X,
                figure(i == 0 ? "A*2" : "A*4^" + std::to_string(i + 1)));
    }
    for (std::uint64_t i = 0; i < call_starts.size(); ++i) {
        BigNat fi = Fi(i);
        add_row(Checkpoint::Kind::Y, i, call_starts[i], scale(A, BigNat(i + 2) - fi), fi, amp.inner_in_b,
                amp.inner_in_c, X, "c' = A*4^" + std::to_string(i + 2) + " - a");
    }
    BigNat FB = lifted(BigNat(B));
    add_row(Checkpoint::Kind::Final, B - 1, cfg.size() - 1, scale(A, BigNat(B) - FB), FB, amp.b, amp.c, X,
            "c = A*4^B - a");

    std::stable_sort(rep.rows.begin(), rep.rows.end(),
                     [](const Checkpoint& l, const Checkpoint& r) { return l.step < r.step; });
    bool all_match = std::all_of(rep.rows.begin(), rep.rows.end(), [](const Checkpoint& c) { return c.match; });
    bool counts = iter_starts.size() + 1 == B && call_starts.size() + 1 == B;
    rep.verdict = all_match && counts && rep.run_class->good ? Verdict::Verified : Verdict::Falsified;
    if (!counts) rep.detail = "run does not visit the iteration step B-1 times";
    return rep;
}

nlohmann::json LiftClaimReport::to_json() const {
    return {{"A", A},
            {"B", B},
            {"verdict", to_string(verdict)},
            {"good_run_claim", good_run_claim},
            {"bad_run_claim", bad_run_claim},
            {"sum_preserved_by_every_line", sum_static},
            {"enumerated_runs", enumerated},
            {"complete_runs", complete},
            {"non_good_complete_runs", non_good},
            {"sum_violations", sum_violations},
            {"decrease_violations", decrease_violations},
            {"strong_violations", strong_violations},
            {"enumeration_truncation", enumeration.to_json()},
            {"detail", detail}};
}

LiftClaimReport check_lift_claims(const AmplifierSpec& amp, std::uint64_t A, std::uint64_t B, const Budget& b,
                                  std::uint64_t enumerate_limit) {
    if (!amp.inner_call) throw ProgramError(amp.name + " is not a lifted amplifier");
    LiftClaimReport rep;
    rep.A = A;
    rep.B = B;
    Compiled cp = amp.compile();
    unsigned inner_depth = amp.depth - 1;
    NatFunction f = [inner_depth](const BigNat& n) { return F(inner_depth, n); };
    NatFunction lifted = [&](const BigNat& n) { return iterate(f, n - 1, 1); };
    ContractExpectation exp = expected_output(A, B, lifted);

    // Per line, the conserved sum changes by zero.
    std::vector<std::uint32_t> summed;
    for (const auto& n : {amp.a, amp.c, amp.t}) summed.push_back(static_cast<std::uint32_t>(cp.counter_index(n)));
    for (const auto& z : amp.Z) summed.push_back(static_cast<std::uint32_t>(cp.counter_index(z)));
    rep.sum_static = true;
    for (const auto& l : cp.lines) {
        std::int64_t d = 0;
        for (const auto& at : l.atoms)
            if (std::find(summed.begin(), summed.end(), at.index) != summed.end()) {
                if (at.op == CompiledAtom::Inc) ++d;
                if (at.op == CompiledAtom::Dec) --d;
            }
        if (d != 0) rep.sum_static = false;
    }

    Budget bb = b;
    bb.max_counter_value = amplifier_counter_cap(A, B);
    Configuration init = input_configuration(amp, cp, A, B);
    ZComputeResult z = z_compute(cp, init, amp.Z, bb);
    using K = ZComputeResult::Kind;
    if (z.kind == K::Inconclusive) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "z_compute inconclusive: " + z.detail;
        return rep;
    }
    bool unique_good = z.kind == K::UniqueRun && classify_lift_run(amp, cp, *z.run, B).good;
    rep.good_run_claim = exp.produces ? unique_good : z.kind == K::Nothing;
    // Every zeroing run is good iff there is at most one zeroing run and it is good.
    rep.bad_run_claim = z.kind == K::Nothing || unique_good;

    Budget eb = bb;
    eb.max_enumerated_runs = enumerate_limit;
    BigNat total = conserved(amp, cp, init);
    auto er = enumerate_runs(cp, init, eb, [&](const Run& r) {
        ++rep.enumerated;
        for (const auto& c : r.configs)
            if (conserved(amp, cp, c) != total) {
                ++rep.sum_violations;
                break;
            }
        BigNat last = potential(amp, cp, r.configs.front());
        for (std::size_t i = 1; i < r.configs.size(); ++i) {
            LineNo pc = r.configs[i].pc;
            if (pc != amp.init_end && pc != amp.outer_entry && pc != cp.halt()) continue;
            BigNat now = potential(amp, cp, r.configs[i]);
            if (now > last) {
                ++rep.decrease_violations;
                break;
            }
            last = now;
        }
        auto sr = check_strong_conditions(amp, cp, r);
        if (!sr.sum_preserved || !sr.inequality_preserved) ++rep.strong_violations;
        if (r.complete()) {
            ++rep.complete;
            auto rc = classify_lift_run(amp, cp, r, B);
            if (!rc.good) {
                ++rep.non_good;
                if (rc.zeroing) rep.bad_run_claim = false;
            }
        }
        return true;
    });
    rep.enumeration = er.truncation;
    bool ok = rep.good_run_claim && rep.bad_run_claim && rep.sum_static && rep.sum_violations == 0 &&
              rep.decrease_violations == 0 && rep.strong_violations == 0;
    rep.verdict = ok ? Verdict::Verified : Verdict::Falsified;
    if (er.truncation.fired())
        rep.detail = "enumeration stopped at " + std::to_string(rep.enumerated) +
                     " runs; the bad-run claim over all runs rests on z_compute";
    return rep;
}

}  // namespace vassforge
