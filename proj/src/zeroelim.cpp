#include "vassforge/zeroelim.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace vassforge {

namespace {

struct ConfigHash {
    std::size_t operator()(const Configuration& c) const {
        std::size_t h = c.pc;
        for (auto v : c.values) h = h * 1000003u ^ std::hash<std::uint64_t>{}(v);
        for (auto s : c.stack) h = h * 31u ^ s;
        return h;
    }
};

std::vector<Statement> gadget_statements(const std::string& target, const ZeroElimContext& ctx) {
    return gen_zero_gadget(target, ctx).body;
}

void check_source(const Program& p, const ZeroElimContext& ctx) {
    if (!p.alphabet.empty()) throw ProgramError("zero-test elimination expects a program without a stack");
    for (const auto& c : p.counters)
        if (c != ctx.x && c != ctx.y)
            throw ProgramError("zero-test elimination expects counters {" + ctx.x + "," + ctx.y + "}, found '" + c + "'");
}

// Atoms of one source line, with the a-balance appended; zero tests split the line.
struct Chunk {
    std::vector<Command> atoms;  // empty when this chunk is a gadget
    std::string tested;
};

std::vector<Chunk> rewrite_line(const Line& l, const ZeroElimContext& ctx) {
    std::vector<Chunk> out;
    std::vector<Command> cur;
    std::int64_t net = 0;
    auto flush = [&] {
        if (cur.empty()) return;
        for (; net > 0; --net) cur.push_back(Dec{ctx.a});
        for (; net < 0; ++net) cur.push_back(Inc{ctx.a});
        out.push_back({std::move(cur), {}});
        cur.clear();
    };
    for (const auto& c : l.commands) {
        if (std::holds_alternative<Goto>(c)) {
            cur.push_back(c);
            continue;
        }
        for (auto& a : expand_atoms(c)) {
            if (auto* z = std::get_if<ZeroTest>(&a)) {
                flush();
                out.push_back({{}, z->counter});
                continue;
            }
            if (std::holds_alternative<Inc>(a)) ++net;
            if (std::holds_alternative<Dec>(a)) --net;
            cur.push_back(std::move(a));
        }
    }
    flush();
    return out;
}

std::vector<Statement> rewrite_structured(const std::vector<Statement>& body, const ZeroElimContext& ctx) {
    std::vector<Statement> out;
    for (const auto& s : body) {
        if (auto* l = std::get_if<Line>(&s.node)) {
            for (auto& ch : rewrite_line(*l, ctx)) {
                if (ch.tested.empty()) out.push_back(Statement{Line{std::move(ch.atoms)}});
                else
                    for (auto& g : gadget_statements(ch.tested, ctx)) out.push_back(std::move(g));
            }
        } else if (auto* lp = std::get_if<Loop>(&s.node)) {
            out.push_back(Statement{Loop{rewrite_structured(lp->body, ctx)}});
        } else {
            throw ProgramError("inline calls before eliminating zero tests");
        }
    }
    return out;
}

Program rewrite_flat(const Program& flat, const ZeroElimContext& ctx) {
    std::vector<std::vector<Chunk>> chunks;
    for (const auto& s : flat.body) chunks.push_back(rewrite_line(std::get<Line>(s.node), ctx));
    Program gx = desugar(gen_zero_gadget(ctx.x, ctx)), gy = desugar(gen_zero_gadget(ctx.y, ctx));
    LineNo glen = static_cast<LineNo>(gx.body.size());
    std::vector<LineNo> start(chunks.size() + 2, 0);
    LineNo pos = 1;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        start[i + 1] = pos;
        for (const auto& ch : chunks[i]) pos += ch.tested.empty() ? 1 : glen;
        if (chunks[i].empty()) throw ProgramError("empty line");
    }
    LineNo halt = pos;
    start[chunks.size() + 1] = halt;
    auto remap = [&](LineNo t) { return t <= chunks.size() ? start[t] : halt; };
    Program out;
    out.counters = ctx.counters();
    for (const auto& line_chunks : chunks) {
        for (const auto& ch : line_chunks) {
            if (ch.tested.empty()) {
                std::vector<Command> atoms = ch.atoms;
                for (auto& a : atoms)
                    if (auto* g = std::get_if<Goto>(&a)) *g = Goto{remap(g->first), remap(g->second)};
                out.body.push_back(Statement{Line{std::move(atoms)}});
                continue;
            }
            LineNo shift = static_cast<LineNo>(out.body.size());
            const Program& g = ch.tested == ctx.x ? gx : gy;
            for (const auto& s : g.body) {
                Line l = std::get<Line>(s.node);
                for (auto& a : l.commands)
                    if (auto* gt = std::get_if<Goto>(&a)) *gt = Goto{gt->first + shift, gt->second + shift};
                out.body.push_back(Statement{std::move(l)});
            }
        }
    }
    return out;
}

std::vector<Statement> instrument(const std::vector<Statement>& body, const std::string& counter) {
    std::vector<Statement> out;
    for (const auto& s : body) {
        if (auto* l = std::get_if<Line>(&s.node)) {
            Line n;
            for (const auto& c : l->commands) {
                n.commands.push_back(c);
                if (std::holds_alternative<ZeroTest>(c)) n.commands.push_back(Inc{counter});
            }
            out.push_back(Statement{std::move(n)});
        } else if (auto* lp = std::get_if<Loop>(&s.node)) {
            out.push_back(Statement{Loop{instrument(lp->body, counter)}});
        } else {
            out.push_back(s);
        }
    }
    return out;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

}  // namespace

void ZeroElimContext::validate() const {
    std::set<std::string> s{x, y, a, b, c, t};
    if (s.size() != 6) throw ProgramError("zero-test elimination needs six distinct counters");
}

std::vector<std::string> ZeroElimContext::counters() const { return {x, y, a, b, c, t}; }

InvariantSpec ZeroElimContext::invariant() const { return InvariantSpec::zero_elim(a, b, c, x, y, t); }

Program gen_zero_gadget(const std::string& target, const ZeroElimContext& ctx) {
    ctx.validate();
    if (target != ctx.x && target != ctx.y) throw ProgramError("gadget target must be " + ctx.x + " or " + ctx.y);
    const std::string& z = target;
    const std::string& o = target == ctx.x ? ctx.y : ctx.x;
    std::string src = "counters: " + ctx.x + " " + ctx.y + " " + ctx.a + " " + ctx.b + " " + ctx.c + " " + ctx.t + "\n" +
                      "loop { move " + ctx.a + " " + ctx.t + "; move " + ctx.c + " " + ctx.t + " }\n" +
                      "loop { move " + o + " " + z + "; move " + ctx.c + " " + ctx.t + " }\n" +
                      "loop { move " + ctx.t + " " + ctx.a + "; move " + ctx.c + " " + ctx.a + " }\n" +
                      "loop { move " + z + " " + o + "; move " + ctx.c + " " + ctx.a + " }\n" +
                      "dec " + ctx.b + "\n";
    return parse(src);
}

Program eliminate_zero_tests(const Program& p, const ZeroElimContext& ctx) {
    ctx.validate();
    check_source(p, ctx);
    if (p.has_gotos()) return rewrite_flat(desugar(p), ctx);
    Program out;
    out.counters = ctx.counters();
    out.body = rewrite_structured(p.body, ctx);
    return out;
}

std::size_t atom_count(const Program& p) {
    std::size_t n = 0;
    for (const auto& s : desugar(p).body) n += std::get<Line>(s.node).commands.size();
    return n;
}

Program instrument_zero_tests(const Program& p, const std::string& counter) {
    if (p.has_counter(counter) || p.has_symbol(counter)) throw ProgramError("instrument counter clashes: " + counter);
    Program out = p;
    out.counters.push_back(counter);
    out.body = instrument(p.body, counter);
    return out;
}

nlohmann::json ZeroElimReport::to_json(const Compiled& p, const Compiled& pp) const {
    nlohmann::json j{{"B", B},
                     {"A_max", A_max},
                     {"source_has_run_with_B_tests", lhs},
                     {"gadget_visits", gadget_visits},
                     {"witness_maps_back", witness_maps_back},
                     {"verdict", to_string(verdict)},
                     {"truncation", truncation.to_json()}};
    j["witness_A"] = witness_A ? nlohmann::json(*witness_A) : nlohmann::json(nullptr);
    if (p_witness) j["source_witness"] = run_json(p, *p_witness);
    if (pp_witness) j["transformed_witness"] = run_json(pp, *pp_witness);
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

SourceRunResult find_source_run(const Program& p, std::uint64_t B, std::uint64_t xy_cap, const Budget& b,
                                const ZeroElimContext& ctx) {
    check_source(p, ctx);
    const std::string zt = "zero_tests";
    Compiled cpi = compile(instrument_zero_tests(p, zt));
    auto idx = [&](const std::string& n) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < cpi.counters.size(); ++i)
            if (cpi.counters[i] == n) return i;
        return std::nullopt;
    };
    auto ix = idx(ctx.x), iy = idx(ctx.y);
    std::size_t iz = cpi.counter_index(zt);
    auto xy = [&](const Configuration& c) { return (ix ? c.values[*ix] : 0) + (iy ? c.values[*iy] : 0); };
    SearchOptions so;
    std::vector<std::uint32_t> zero;
    if (ix) zero.push_back(static_cast<std::uint32_t>(*ix));
    if (iy) zero.push_back(static_cast<std::uint32_t>(*iy));
    so.goal = Goal{zero, false, {{static_cast<std::uint32_t>(iz), B}}};
    so.stop_at_goal = true;
    so.in_scope = [&](const Configuration& c) { return c.values[iz] <= B && xy(c) <= xy_cap; };
    Budget sb = b;
    sb.max_counter_value = std::max<std::uint64_t>(xy_cap, B) + 1;
    SearchResult r = search(cpi, make_configuration(cpi, {}), sb, so);
    SourceRunResult out;
    out.found = r.witness.has_value();
    out.witness = r.witness;
    out.truncation = r.truncation;
    if (r.witness)
        for (const auto& c : r.witness->configs) out.excursion = std::max(out.excursion, xy(c));
    return out;
}

ZeroElimReport verify_zeroelim(const Program& p, std::uint64_t B, std::uint64_t A_max, const Budget& b,
                               const ZeroElimContext& ctx) {
    ctx.validate();
    check_source(p, ctx);
    ZeroElimReport rep;
    rep.B = B;
    Compiled cpp = compile(eliminate_zero_tests(p, ctx));
    auto source_search = [&](std::uint64_t cap) {
        auto r = find_source_run(p, B, cap, b, ctx);
        return std::make_tuple(r.found, r.witness, r.truncation);
    };

    std::uint64_t pow = static_cast<std::uint64_t>(pow4(B));
    std::uint64_t cap = A_max ? A_max * pow : pow * 16;
    auto [found, witness, trunc] = source_search(cap);
    rep.lhs = found;
    rep.p_witness = witness;
    rep.truncation = trunc;
    std::uint64_t excursion = 1;
    if (witness) {
        Compiled cpi = compile(instrument_zero_tests(p, "zero_tests"));
        for (const auto& c : witness->configs) {
            std::uint64_t s = 0;
            for (const auto& n : {ctx.x, ctx.y})
                if (std::find(cpi.counters.begin(), cpi.counters.end(), n) != cpi.counters.end())
                    s += c.values[cpi.counter_index(n)];
            excursion = std::max(excursion, s);
        }
    }
    rep.A_max = A_max ? A_max : pow * excursion;

    Goal goal = goal_all_but(cpp, {ctx.a});
    for (std::uint64_t A = 1; A <= rep.A_max && !rep.witness_A; ++A) {
        Valuation v = make_triple(A, B, TripleRoles{ctx.a, ctx.b, ctx.c, cpp.counters});
        Budget bb = b;
        bb.max_counter_value = std::max<std::uint64_t>(A * pow, B) + 1;
        SearchOptions so;
        so.goal = goal;
        so.stop_at_goal = true;
        so.prune = true;
        SearchResult r = search(cpp, make_configuration(cpp, v), bb, so);
        for (const auto& l : r.truncation.limits) rep.truncation.limits.insert(l);
        rep.truncation.cut_states += r.truncation.cut_states;
        if (r.witness) {
            rep.witness_A = A;
            rep.pp_witness = r.witness;
        }
    }

    if (rep.pp_witness) {
        std::size_t ib = cpp.counter_index(ctx.b);
        for (std::size_t i = 0; i + 1 < rep.pp_witness->configs.size(); ++i)
            if (rep.pp_witness->configs[i + 1].values[ib] < rep.pp_witness->configs[i].values[ib]) ++rep.gadget_visits;
        const auto& fin = rep.pp_witness->configs.back();
        rep.witness_maps_back = rep.gadget_visits == B && fin.values[cpp.counter_index(ctx.x)] == 0 &&
                                fin.values[cpp.counter_index(ctx.y)] == 0;
        if (!rep.lhs) {
            // A transformed run bounds the source excursion by A*4^B; search again at that scope.
            auto [f2, w2, t2] = source_search(*rep.witness_A * pow);
            rep.lhs = f2;
            rep.p_witness = w2;
            for (const auto& l : t2.limits) rep.truncation.limits.insert(l);
        }
    }

    bool rhs = rep.witness_A.has_value();
    if (rep.lhs == rhs && (!rhs || rep.witness_maps_back)) {
        rep.verdict = Verdict::Verified;
        rep.detail = rhs ? "agree: accepted" : "agree: rejected";
    } else if (rep.truncation.fired()) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "budget exhausted";
    } else {
        rep.verdict = Verdict::Falsified;
        rep.detail = rep.lhs ? "source run with B tests but no transformed run up to A_max"
                             : "transformed run without a matching source run";
    }
    if (rep.truncation.fired() && rep.verdict == Verdict::Verified && !rhs) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "no run found, but the budget was exhausted";
    }
    return rep;
}

nlohmann::json GadgetLemmaReport::to_json() const {
    return {{"starts", starts},
            {"good_starts", good_starts},
            {"broken_starts", broken_starts},
            {"violating_starts", violating_starts},
            {"holds_with_b_zero_starts", exhausted_b_starts},
            {"neither_starts", neither_starts},
            {"neither_starts_reaching_holds", neither_reaching_holds},
            {"failures", failures},
            {"counterexamples", counterexamples},
            {"verdict", to_string(verdict)}};
}

GadgetLemmaReport check_gadget_lemma(const std::string& target, std::uint64_t max_sum, std::uint64_t max_b,
                                     std::uint64_t c_max, const ZeroElimContext& ctx) {
    GadgetLemmaReport rep;
    Compiled cp = compile(gen_zero_gadget(target, ctx));
    InvariantSpec inv = ctx.invariant();
    if (c_max == 0) c_max = max_sum * (static_cast<std::uint64_t>(pow4(max_b)) - 1) + 1;
    std::size_t ia = cp.counter_index(ctx.a), ib = cp.counter_index(ctx.b), ic = cp.counter_index(ctx.c),
                ix = cp.counter_index(ctx.x), iy = cp.counter_index(ctx.y), it = cp.counter_index(ctx.t),
                iz = cp.counter_index(target);
    Budget budget;
    budget.max_counter_value = max_sum + c_max + 1;

    struct Counts {
        std::uint64_t holds = 0, broken = 0, other = 0;
    };
    std::unordered_map<Configuration, Counts, ConfigHash> memo;
    auto status_of = [&](const Configuration& c) { return eval_invariant(inv, valuation_of(cp, c)); };
    std::function<Counts(const Configuration&)> count = [&](const Configuration& c) -> Counts {
        if (auto it2 = memo.find(c); it2 != memo.end()) return it2->second;
        Counts r;
        if (c.pc == cp.halt()) {
            switch (status_of(c)) {
            case InvariantStatus::Holds: r.holds = 1; break;
            case InvariantStatus::Broken: r.broken = 1; break;
            case InvariantStatus::Neither: r.other = 1; break;
            }
        } else {
            for (const auto& s : step(cp, c, budget).successors) {
                Counts k = count(s);
                r.holds = sat_add(r.holds, k.holds);
                r.broken = sat_add(r.broken, k.broken);
                r.other = sat_add(r.other, k.other);
            }
        }
        memo.emplace(c, r);
        return r;
    };
    // Follows the unique Holds-ending run.
    auto holds_final = [&](Configuration c) {
        while (c.pc != cp.halt())
            for (const auto& s : step(cp, c, budget).successors)
                if (count(s).holds > 0) {
                    c = s;
                    break;
                }
        return c;
    };

    for (std::uint64_t a = 0; a <= max_sum; ++a)
        for (std::uint64_t x = 0; a + x <= max_sum; ++x)
            for (std::uint64_t y = 0; a + x + y <= max_sum; ++y)
                for (std::uint64_t t = 0; a + x + y + t <= max_sum; ++t)
                    for (std::uint64_t b = 0; b <= max_b; ++b)
                        for (std::uint64_t c = 0; c <= c_max; ++c) {
                            memo.clear();
                            Configuration s;
                            s.pc = 1;
                            s.values.assign(cp.counters.size(), 0);
                            s.values[ia] = a;
                            s.values[ib] = b;
                            s.values[ic] = c;
                            s.values[ix] = x;
                            s.values[iy] = y;
                            s.values[it] = t;
                            ++rep.starts;
                            InvariantStatus st = status_of(s);
                            Counts k = count(s);
                            bool ok = true;
                            std::string why;
                            if (st == InvariantStatus::Holds && s.values[iz] == 0 && b > 0) {
                                ++rep.good_starts;
                                ok = k.holds == 1 && k.other == 0;
                                if (ok) {
                                    Configuration f = holds_final(s);
                                    ok = f.values[ix] == x && f.values[iy] == y;
                                    if (!ok) why = "the invariant-maintaining run changes x or y";
                                } else {
                                    why = "expected one Holds run and all others Broken";
                                }
                            } else if (st == InvariantStatus::Neither) {
                                // A run from here does not maintain the invariant, which never held.
                                ++rep.neither_starts;
                                if (k.holds > 0) ++rep.neither_reaching_holds;
                            } else {
                                bool violating = st == InvariantStatus::Holds && s.values[iz] > 0;
                                if (st == InvariantStatus::Broken) ++rep.broken_starts;
                                else if (violating) ++rep.violating_starts;
                                else ++rep.exhausted_b_starts;
                                bool claimed = st == InvariantStatus::Broken || violating;
                                ok = k.holds == 0 && (!claimed || k.other == 0);
                                if (!ok) why = claimed ? "a complete run does not end Broken" : "a run ends with Holds";
                            }
                            if (!ok) {
                                ++rep.failures;
                                if (rep.counterexamples.size() < 5)
                                    rep.counterexamples.push_back(
                                        {{"start", configuration_json(cp, s)},
                                         {"status", to_string(st)},
                                         {"holds_runs", k.holds},
                                         {"broken_runs", k.broken},
                                         {"other_runs", k.other},
                                         {"reason", why}});
                            }
                        }
    rep.verdict = rep.failures == 0 ? Verdict::Verified : Verdict::Falsified;
    return rep;
}

}  // namespace vassforge
