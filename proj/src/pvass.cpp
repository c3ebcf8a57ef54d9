#include "vassforge/pvass.hpp"

#include <algorithm>
#include <sstream>

namespace vassforge {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : " ") + x;
    return out;
}

std::string pops(const std::string& s, int k) {
    std::string out;
    for (int i = 0; i < k; ++i) out += (i ? "; pop " : "pop ") + s;
    return out;
}

std::string fresh(const Program& p, std::string base) {
    auto used = [&](const std::string& n) { return p.has_counter(n) || p.has_symbol(n); };
    if (!used(base)) return base;
    for (int k = 1;; ++k)
        if (!used(base + std::to_string(k))) return base + std::to_string(k);
}

std::size_t size_of(const std::vector<Statement>& body, const Library& lib);

std::size_t size_of(const Statement& s, const Library& lib) {
    if (std::holds_alternative<Line>(s.node)) return 1;
    if (auto* l = std::get_if<Loop>(&s.node)) return 2 + size_of(l->body, lib);
    return size_of(lib.at(std::get<Call>(s.node).name).body, lib);
}

std::size_t size_of(const std::vector<Statement>& body, const Library& lib) {
    std::size_t n = 0;
    for (const auto& s : body) n += size_of(s, lib);
    return n;
}

bool has_loop(const std::vector<Statement>& body) {
    return std::any_of(body.begin(), body.end(), [](const Statement& s) { return std::holds_alternative<Loop>(s.node); });
}

// Walks a pushdown listing and its counterpart in parallel, recording flat line links.
struct Aligner {
    const Library& ql;
    const Library& pl;
    std::vector<LineLink>& map;

    void set(LineNo q, LineLink::Kind k, LineNo p) {
        if (map.size() < q) map.resize(q);
        map[q - 1] = {k, p};
    }

    void walk(const std::vector<Statement>& q, LineNo& qi, const std::vector<Statement>& p, LineNo& pi) {
        std::size_t j = 0;
        for (const auto& qs : q) {
            if (j >= p.size()) throw std::logic_error("pushdown listing longer than its counterpart");
            const auto& ps = p[j];
            if (std::holds_alternative<Line>(qs.node) && std::holds_alternative<Line>(ps.node)) {
                set(qi++, LineLink::Kind::Step, pi++);
                ++j;
            } else if (std::holds_alternative<Call>(qs.node) && std::holds_alternative<Call>(ps.node)) {
                walk(ql.at(std::get<Call>(qs.node).name).body, qi, pl.at(std::get<Call>(ps.node).name).body, pi);
                ++j;
            } else if (std::holds_alternative<Loop>(qs.node) && std::holds_alternative<Loop>(ps.node)) {
                const auto& qb = std::get<Loop>(qs.node).body;
                const auto& pb = std::get<Loop>(ps.node).body;
                if (has_loop(qb) && !has_loop(pb)) {
                    shuffle(qb, qi, p, j, pi);
                    j += 2;
                    continue;
                }
                set(qi++, LineLink::Kind::Control, pi++);
                walk(qb, qi, pb, pi);
                set(qi++, LineLink::Kind::Control, pi++);
                ++j;
            } else {
                throw std::logic_error("pushdown listing diverges from its counterpart");
            }
        }
        if (j != p.size()) throw std::logic_error("pushdown listing shorter than its counterpart");
    }

    // The shuffle loop replaces the c-transfer loop at p[j] and the b-transfer loop at p[j+1].
    void shuffle(const std::vector<Statement>& qb, LineNo& qi, const std::vector<Statement>& p, std::size_t j,
                 LineNo& pi) {
        if (j + 1 >= p.size() || !std::holds_alternative<Loop>(p[j + 1].node) ||
            size_of(p[j], pl) != 3 || size_of(p[j + 1], pl) != 3)
            throw std::logic_error("shuffle block without two counterpart transfer loops");
        LineNo pc_entry = pi, pc_body = pi + 1, pc_back = pi + 2;
        LineNo pb_entry = pi + 3, pb_body = pi + 4, pb_back = pi + 5;
        set(qi++, LineLink::Kind::ShuffleControl, pc_entry);
        for (const auto& s : qb) {
            if (std::holds_alternative<Loop>(s.node)) {
                if (size_of(s, ql) != 3) throw std::logic_error("shuffle push loop must have one line");
                set(qi++, LineLink::Kind::ShuffleControl, pb_entry);
                set(qi++, LineLink::Kind::Step, pb_body);
                set(qi++, LineLink::Kind::ShuffleControl, pb_back);
            } else {
                set(qi++, LineLink::Kind::Partial, pc_body);
            }
        }
        set(qi++, LineLink::Kind::ShuffleControl, pc_back);
        pi += 6;
    }
};

std::vector<LineLink> align(const PushdownAmplifierSpec& q) {
    std::vector<LineLink> map;
    Aligner al{q.library, q.counterpart.library, map};
    LineNo qi = 1, pi = 1;
    al.walk(q.program.body, qi, q.counterpart.program.body, pi);
    return map;
}

void finish(PushdownAmplifierSpec& q) {
    for (const auto& x : {q.a, q.b, q.c, q.t})
        if (q.delegates(x)) throw std::logic_error("a, b, c and t are never delegated");
    q.line_map = align(q);
    if (q.line_map.size() != q.compile().lines.size()) throw std::logic_error("line map does not cover the program");
}

using Delta = std::map<std::string, std::int64_t>;

Delta delta_of(const Compiled& cp, const CompiledLine& l) {
    Delta d;
    for (const auto& a : l.atoms) {
        switch (a.op) {
        case CompiledAtom::Inc: ++d[cp.counters[a.index]]; break;
        case CompiledAtom::Dec: --d[cp.counters[a.index]]; break;
        case CompiledAtom::Push: ++d[cp.alphabet[a.index]]; break;
        case CompiledAtom::Pop: --d[cp.alphabet[a.index]]; break;
        case CompiledAtom::Zero: d["zero?" + cp.counters[a.index]] = 0; break;
        }
    }
    std::erase_if(d, [](const auto& kv) { return kv.second == 0 && kv.first.rfind("zero?", 0) != 0; });
    return d;
}

std::string delta_string(const Delta& d) {
    std::string s;
    for (const auto& [k, v] : d) s += (s.empty() ? "" : " ") + k + (v >= 0 ? "+" : "") + std::to_string(v);
    return "{" + s + "}";
}

std::string word(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += x;
    return s;
}

Budget capped(Budget b, std::uint64_t A, std::uint64_t B) {
    b.max_counter_value = std::min(b.max_counter_value, amplifier_counter_cap(A, B));
    b.max_stack_height = std::min(b.max_stack_height, conserved_total(A, B) + B + 8);
    return b;
}

std::set<Valuation> oracle_values(const AmplifierSpec& p, const Valuation& v, const Budget& b, bool& truncated) {
    oracle::OConfig src;
    src.values = v;
    auto r = oracle::oracle_finals(p.program, src, b, p.library);
    truncated = r.truncated();
    std::set<Valuation> out;
    for (const auto& f : r.finals)
        if (f.stack.empty()) out.insert(Valuation(f.values.begin(), f.values.end()));
    return out;
}

ForwardCheck forward_against(const PushdownAmplifierSpec& q, const Compiled& qcp, const Configuration& init,
                             const std::set<Valuation>& p_finals, bool p_truncated, const Budget& b) {
    ForwardCheck fc;
    fc.stack = stack_word(qcp, init);
    fc.p_finals = p_finals.size();
    ValMap m = ValMap::of(qcp);
    auto res = search(qcp, init, b);
    for (const auto& f : res.finals) {
        if (f.pc != qcp.halt()) continue;
        ++fc.q_finals;
        if (!p_finals.count(val(m, qcp, f))) ++fc.unmatched;
    }
    bool truncated = res.truncation.fired() || p_truncated;
    if (fc.unmatched && !p_truncated) {
        fc.verdict = Verdict::Falsified;
        fc.detail = std::to_string(fc.unmatched) + " q-endpoints without a counterpart run";
    } else if (truncated) {
        fc.verdict = Verdict::Inconclusive;
        fc.detail = "budget exhausted";
    } else {
        fc.verdict = Verdict::Verified;
        fc.detail = fc.q_finals ? "every q-endpoint has a counterpart run" : "no complete q-run (vacuous)";
    }
    (void)q;
    return fc;
}

}  // namespace

std::string to_string(LineLink::Kind k) {
    switch (k) {
    case LineLink::Kind::Control: return "control";
    case LineLink::Kind::Step: return "step";
    case LineLink::Kind::Partial: return "partial";
    case LineLink::Kind::ShuffleControl: return "shuffle-control";
    }
    return "?";
}

bool PushdownAmplifierSpec::delegates(const std::string& x) const { return contains(delegated, x); }

std::vector<std::string> PushdownAmplifierSpec::counters() const { return compile().counters; }

std::vector<std::string> PushdownAmplifierSpec::end_counters() const {
    std::vector<std::string> out;
    for (const auto& z : Z)
        if (!delegates(z)) out.push_back(z);
    return out;
}

nlohmann::json PushdownAmplifierSpec::to_json() const {
    Compiled cp = compile();
    std::map<std::string, std::uint64_t> kinds;
    for (const auto& l : line_map) ++kinds[to_string(l.kind)];
    return {{"name", name},
            {"lineage", lineage},
            {"depth", depth},
            {"schedule", schedule},
            {"counters", cp.counters},
            {"alphabet", cp.alphabet},
            {"delegated", delegated},
            {"Z", Z},
            {"end_counters", end_counters()},
            {"counterpart", counterpart.name},
            {"lines", cp.lines.size()},
            {"line_links", kinds},
            {"program", pretty_print(program)}};
}

void ValMap::validate() const {
    for (const auto& x : X)
        if (contains(S, x)) throw ProgramError("'" + x + "' is both a counter and a delegated symbol");
}

ValMap ValMap::of(const Compiled& cp) {
    ValMap m{cp.counters, cp.alphabet};
    m.validate();
    return m;
}

Valuation val(const ValMap& m, const Compiled& cp, const Configuration& c) {
    Valuation x;
    for (std::size_t i = 0; i < cp.counters.size(); ++i)
        if (contains(m.X, cp.counters[i])) x[cp.counters[i]] = c.values[i];
    std::vector<std::string> stack;
    for (auto s : c.stack) stack.push_back(cp.alphabet[s]);
    return val(m, x, stack);
}

Valuation val(const ValMap& m, const Valuation& x, const std::vector<std::string>& stack) {
    m.validate();
    Valuation out;
    for (const auto& n : m.X) out[n] = x.count(n) ? x.at(n) : 0;
    for (const auto& s : m.S) out[s] = 0;
    for (const auto& s : stack) {
        if (!contains(m.S, s)) throw ProgramError("symbol '" + s + "' is not delegated");
        ++out[s];
    }
    return out;
}

PushdownAmplifierSpec gen_Q1() {
    PushdownAmplifierSpec q;
    q.name = "Q1";
    q.program = parse(
        "counters: a b c t\n"
        "stack: b' c'\n"
        "loop { move a t }\n"
        "loop { move t a; " + pops("c'", 3) + "; add c 3 }\n"
        "pop b'; add b 1\n"
        "loop {\n"
        "  loop { move a t; pop c'; add t 1 }\n"
        "  loop { move c a; pop c'; add a 1 }\n"
        "  loop { move a c; pop c'; add c 1 }\n"
        "  loop { movek t c 8; " + pops("c'", 8) + "; add a 1; add c 7 }\n"
        "  pop b'; add b 2\n"
        "}\n");
    q.Z = {"c'"};
    q.delegated = {"b'", "c'"};
    q.depth = 1;
    q.lineage = "Q1";
    q.counterpart = gen_P1();
    finish(q);
    return q;
}

std::string shuffle_block(const std::string& b, const std::string& c, const std::string& c_src,
                          const std::string& in_b, const std::string& in_c, const std::string& indent) {
    std::string push_b = indent + "  loop { dec " + b + "; push " + in_b + " }\n";
    std::ostringstream s;
    s << indent << "loop {\n"
      << push_b << indent << "  dec " << c << "; sub " << c_src << " 3; push " << in_c << "\n";
    for (int i = 0; i < 3; ++i) s << push_b << indent << "  push " << in_c << "\n";
    s << push_b << indent << "}\n";
    return s.str();
}

namespace {

PushdownAmplifierSpec lifted(const PushdownAmplifierSpec& q, bool bar) {
    PushdownAmplifierSpec out;
    out.counterpart = lift(q.counterpart);
    std::string nb = fresh(q.program, q.in_b + "'");
    std::string nc = fresh(q.program, q.in_c + "'");
    if (nb == nc) nc = fresh(q.program, nc + "c");
    if (nb != out.counterpart.in_b || nc != out.counterpart.in_c)
        throw std::logic_error("pushdown lift and counterpart lift chose different names");
    const std::string &a = q.a, &b = q.b, &c = q.c, &t = q.t;
    std::vector<std::string> counters = q.program.counters, alphabet = q.program.alphabet;
    alphabet.push_back(nb);
    if (bar) counters.push_back(nc);
    else alphabet.push_back(nc);
    auto take_c3 = [&]() { return bar ? "sub " + nc + " 3" : pops(nc, 3); };
    std::ostringstream src;
    src << "counters: " << join(counters) << "\n"
        << "stack: " << join(alphabet) << "\n"
        << "loop { move " << a << ' ' << t << " }\n"
        << "loop { move " << t << ' ' << a << "; " << take_c3() << "; add " << c << " 3 }\n"
        << "pop " << nb << "; add " << b << " 1\n"
        << "loop {\n"
        << "  loop { move " << a << ' ' << t << " }\n"
        << "  loop { move " << t << ' ' << a << "; " << take_c3() << "; add " << a << " 3 }\n";
    if (bar) {
        src << shuffle_block(b, c, nc, q.in_b, q.in_c, "  ");
    } else {
        src << "  loop { move " << c << ' ' << q.in_c << "; " << take_c3() << "; add " << q.in_c << " 3 }\n"
            << "  loop { dec " << b << "; push " << q.in_b << " }\n";
    }
    src << "  call " << q.name << "\n"
        << "  pop " << nb << "\n"
        << "}\n";
    out.program = parse(src.str());
    out.library = q.library;
    out.library[q.name] = q.program;
    out.name = "Q" + std::to_string(q.depth + 1);
    out.a = a;
    out.b = b;
    out.c = c;
    out.t = t;
    out.in_b = nb;
    out.in_c = nc;
    out.Z = q.Z;
    out.Z.push_back(nc);
    out.delegated = q.delegated;
    out.delegated.push_back(nb);
    if (!bar) out.delegated.push_back(nc);
    out.depth = q.depth + 1;
    out.schedule = q.schedule;
    out.schedule.push_back(bar ? "bar" : "tilde");
    out.lineage = std::string(bar ? "bar(" : "tilde(") + q.lineage + ")";
    finish(out);
    return out;
}

}  // namespace

PushdownAmplifierSpec lift_tilde(const PushdownAmplifierSpec& q) {
    if (!q.delegates(q.in_b) || q.delegates(q.in_c))
        throw ProgramError("tilde lift needs " + q.in_b + " delegated and " + q.in_c + " not delegated");
    return lifted(q, false);
}

PushdownAmplifierSpec lift_bar(const PushdownAmplifierSpec& q) {
    if (!q.delegates(q.in_b) || !q.delegates(q.in_c))
        throw ProgramError("bar lift needs both " + q.in_b + " and " + q.in_c + " delegated");
    return lifted(q, true);
}

PushdownAmplifierSpec gen_Qd(unsigned d) {
    if (d < 1) throw ProgramError("d must be positive");
    PushdownAmplifierSpec q = gen_Q1();
    for (unsigned i = 1; i < d; ++i) q = q.delegates(q.in_c) ? lift_bar(q) : lift_tilde(q);
    if (q.program.counters.size() != d / 2 + 4) throw std::logic_error("Q_d must use floor(d/2)+4 counters");
    if (q.end_counters().size() != d / 2) throw std::logic_error("Q_d must have floor(d/2) end counters");
    return q;
}

nlohmann::json LineCorrespondenceReport::to_json() const {
    return {{"steps", steps},
            {"partial", partial},
            {"control", control},
            {"shuffle_control", shuffle_control},
            {"mismatches", mismatches},
            {"verdict", to_string(verdict)}};
}

LineCorrespondenceReport check_line_correspondence(const PushdownAmplifierSpec& q) {
    LineCorrespondenceReport r;
    Compiled qcp = q.compile(), pcp = q.counterpart.compile();
    auto p_target = [&](LineNo t) -> LineNo { return t == qcp.halt() ? pcp.halt() : q.line_map.at(t - 1).p_line; };
    std::map<LineNo, Delta> partial_sums;
    for (std::size_t i = 0; i < q.line_map.size(); ++i) {
        const auto& link = q.line_map[i];
        const auto& ql = qcp.lines[i];
        const auto& pl = pcp.lines.at(link.p_line - 1);
        std::string where = "line " + std::to_string(i + 1) + " -> " + std::to_string(link.p_line) + ": ";
        switch (link.kind) {
        case LineLink::Kind::Control:
            ++r.control;
            if (!ql.is_goto || !pl.is_goto || p_target(ql.t1) != pl.t1 || p_target(ql.t2) != pl.t2)
                r.mismatches.push_back(where + "goto targets do not correspond");
            break;
        case LineLink::Kind::ShuffleControl:
            ++r.shuffle_control;
            if (!ql.is_goto || !pl.is_goto) r.mismatches.push_back(where + "expected gotos");
            break;
        case LineLink::Kind::Step: {
            ++r.steps;
            auto dq = delta_of(qcp, ql), dp = delta_of(pcp, pl);
            if (ql.is_goto || dq != dp)
                r.mismatches.push_back(where + delta_string(dq) + " vs " + delta_string(dp));
            break;
        }
        case LineLink::Kind::Partial: {
            ++r.partial;
            auto dq = delta_of(qcp, ql), dp = delta_of(pcp, pl);
            for (const auto& [k, v] : dq) {
                std::int64_t w = dp.count(k) ? dp.at(k) : 0;
                if ((v > 0 && (w < v)) || (v < 0 && (w > v)))
                    r.mismatches.push_back(where + delta_string(dq) + " is not part of " + delta_string(dp));
                partial_sums[link.p_line][k] += v;
            }
            break;
        }
        }
    }
    for (auto& [pl, sum] : partial_sums) {
        std::erase_if(sum, [](const auto& kv) { return kv.second == 0; });
        auto dp = delta_of(pcp, pcp.lines[pl - 1]);
        if (sum != dp)
            r.mismatches.push_back("shuffle lines for " + std::to_string(pl) + " sum to " + delta_string(sum) +
                                   ", counterpart " + delta_string(dp));
    }
    r.verdict = r.mismatches.empty() ? Verdict::Verified : Verdict::Falsified;
    return r;
}

Configuration q_input_configuration(const PushdownAmplifierSpec& q, const Compiled& cp, std::uint64_t A,
                                    std::uint64_t B, const std::vector<std::string>& stack) {
    Valuation v;
    for (const auto& x : cp.counters) v[x] = 0;
    v[q.a] = A;
    if (!q.delegates(q.in_b)) v[q.in_b] = B;
    if (!q.delegates(q.in_c)) v[q.in_c] = conserved_total(A, B) - A;
    return make_configuration(cp, v, stack);
}

nlohmann::json ForwardCheck::to_json() const {
    return {{"stack", stack},
            {"q_finals", q_finals},
            {"p_finals", p_finals},
            {"unmatched", unmatched},
            {"verdict", to_string(verdict)},
            {"detail", detail}};
}

ForwardCheck check_forward(const PushdownAmplifierSpec& q, const Configuration& init, const Budget& b) {
    Compiled qcp = q.compile();
    ValMap m = ValMap::of(qcp);
    Configuration start = init;
    start.pc = 1;
    bool p_trunc = false;
    auto p_finals = oracle_values(q.counterpart, val(m, qcp, start), b, p_trunc);
    return forward_against(q, qcp, init, p_finals, p_trunc, b);
}

nlohmann::json SimulationReport::to_json(const Compiled& qcp) const {
    auto cs = nlohmann::json::array();
    for (const auto& c : cases) {
        auto fw = nlohmann::json::array();
        for (const auto& f : c.forward) fw.push_back(f.to_json());
        nlohmann::json j{{"A", c.A},
                         {"B", c.B},
                         {"expected", c.expected.to_json()},
                         {"witness_stack", word(c.witness_stack)},
                         {"witness_ok", c.witness_ok},
                         {"forward", fw},
                         {"verdict", to_string(c.verdict)},
                         {"detail", c.detail}};
        if (c.q_witness) {
            const auto& last = c.q_witness->configs.back();
            j["witness_steps"] = c.q_witness->configs.size() - 1;
            j["witness_end"] = configuration_json(qcp, last);
        }
        cs.push_back(j);
    }
    return {{"q", q}, {"p", p}, {"lines", lines.to_json()}, {"cases", cs}, {"verdict", to_string(verdict)}};
}

SimulationReport check_simulation(const PushdownAmplifierSpec& q, const AmplifierSpec& p,
                                  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cases,
                                  const Budget& b) {
    if (p.name != q.counterpart.name || p.program != q.counterpart.program)
        throw ProgramError("q does not simulate " + p.name);
    SimulationReport rep;
    rep.q = q.name;
    rep.p = p.name;
    rep.lines = check_line_correspondence(q);
    rep.verdict = rep.lines.verdict;
    Compiled qcp = q.compile(), pcp = p.compile();
    ValMap m = ValMap::of(qcp);
    std::vector<std::string> inputs;
    for (const auto& x : {p.in_b, p.in_c})
        if (q.delegates(x)) inputs.push_back(x);
    for (auto [A, B] : cases) {
        SimulationCase sc;
        sc.A = A;
        sc.B = B;
        sc.expected = expected_output(A, B, declared_function(p));
        Budget bc = capped(b, A, B);
        Verdict v = Verdict::Verified;
        std::vector<std::vector<std::string>> stacks;

        if (sc.expected.produces) {
            auto z = z_compute(pcp, input_configuration(p, pcp, A, B), p.Z, bc);
            if (z.kind != ZComputeResult::Kind::UniqueRun) {
                v = z.truncation.fired() ? Verdict::Inconclusive : Verdict::Falsified;
                sc.detail = "counterpart run: " + to_string(z.kind);
            } else {
                // The first delegated decrement of the run is the top of the stack.
                std::vector<std::string> seq;
                const auto& cfgs = z.run->configs;
                for (std::size_t i = 0; i + 1 < cfgs.size(); ++i)
                    for (const auto& x : inputs) {
                        auto k = cfgs[i].values[pcp.counter_index(x)], k2 = cfgs[i + 1].values[pcp.counter_index(x)];
                        for (auto n = k2; n < k; ++n) seq.push_back(x);
                    }
                sc.witness_stack.assign(seq.rbegin(), seq.rend());
                stacks.push_back(sc.witness_stack);
                Configuration init = q_input_configuration(q, qcp, A, B, sc.witness_stack);
                SearchOptions so;
                so.goal = goal_zeroing(qcp, q.end_counters(), true);
                so.stop_at_goal = true;
                auto res = search(qcp, init, bc, so);
                Valuation want = valuation_of(pcp, cfgs.back());
                if (res.witness) {
                    sc.q_witness = res.witness;
                    sc.witness_ok = val(m, qcp, res.witness->configs.back()) == want;
                    if (!sc.witness_ok) {
                        v = Verdict::Falsified;
                        sc.detail = "q witness ends outside the contract";
                    } else {
                        sc.detail = "witness found";
                    }
                } else {
                    v = res.truncation.fired() ? Verdict::Inconclusive : Verdict::Falsified;
                    sc.detail = "no q witness from the constructed stack";
                }
            }
        }

        // Extra initial words: all b-symbols on top, and all c-symbols on top.
        std::uint64_t csyms = q.delegates(p.in_c) ? conserved_total(A, B) - A : 0;
        std::vector<std::string> b_top(csyms, p.in_c), c_top(B, p.in_b);
        b_top.insert(b_top.end(), B, p.in_b);
        c_top.insert(c_top.end(), csyms, p.in_c);
        for (const auto& s : {b_top, c_top})
            if (std::find(stacks.begin(), stacks.end(), s) == stacks.end()) stacks.push_back(s);

        Configuration any = q_input_configuration(q, qcp, A, B, stacks.front());
        bool p_trunc = false;
        auto p_finals = oracle_values(p, val(m, qcp, any), bc, p_trunc);
        for (const auto& s : stacks) {
            sc.forward.push_back(forward_against(q, qcp, q_input_configuration(q, qcp, A, B, s), p_finals, p_trunc, bc));
            v = combine(v, sc.forward.back().verdict);
        }
        sc.verdict = v;
        rep.verdict = combine(rep.verdict, v);
        rep.cases.push_back(std::move(sc));
    }
    return rep;
}

nlohmann::json ShuffleReport::to_json() const {
    return {{"b_units", b_units},
            {"c_symbols", c_symbols},
            {"expected", expected},
            {"produced", produced},
            {"missing", missing},
            {"unexpected", unexpected},
            {"verdict", to_string(verdict)}};
}

ShuffleReport check_shuffle(std::uint64_t b_units, std::uint64_t c_symbols, const Budget& b) {
    if (c_symbols % 4) throw ProgramError("c symbols come in groups of four");
    ShuffleReport r;
    r.b_units = b_units;
    r.c_symbols = c_symbols;
    Program p = parse("counters: b c c''\nstack: b' c'\n" + shuffle_block("b", "c", "c''", "b'", "c'", ""));
    Compiled cp = compile(p);
    Configuration init = make_configuration(cp, {{"b", b_units}, {"c", c_symbols / 4}, {"c''", 3 * (c_symbols / 4)}});
    SearchOptions so;
    so.goal = goal_zeroing(cp, {"b", "c", "c''"});
    auto res = search(cp, init, b, so);
    std::set<std::string> produced, expected;
    for (const auto& f : res.finals) produced.insert(stack_word(cp, f));
    std::vector<std::string> letters(c_symbols, "c'");
    letters.insert(letters.end(), b_units, "b'");
    std::sort(letters.begin(), letters.end());
    do expected.insert(word(letters));
    while (std::next_permutation(letters.begin(), letters.end()));
    r.expected = expected.size();
    r.produced = produced.size();
    std::set_difference(expected.begin(), expected.end(), produced.begin(), produced.end(), std::back_inserter(r.missing));
    std::set_difference(produced.begin(), produced.end(), expected.begin(), expected.end(),
                        std::back_inserter(r.unexpected));
    if (res.truncation.fired()) r.verdict = Verdict::Inconclusive;
    else r.verdict = r.missing.empty() && r.unexpected.empty() ? Verdict::Verified : Verdict::Falsified;
    return r;
}

}  // namespace vassforge
