#include "vassforge/reduction.hpp"

#include <algorithm>
#include <sstream>

namespace vassforge {

namespace {

using Lines = std::vector<std::vector<Command>>;

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

Lines lines_of(const Program& flat) {
    Lines out;
    for (const auto& s : flat.body) {
        std::vector<Command> atoms;
        for (const auto& c : std::get<Line>(s.node).commands)
            for (auto& a : expand_atoms(c)) atoms.push_back(std::move(a));
        out.push_back(std::move(atoms));
    }
    return out;
}

Program program_of(std::vector<std::string> counters, std::vector<std::string> alphabet, const Lines& lines) {
    Program p;
    p.counters = std::move(counters);
    p.alphabet = std::move(alphabet);
    for (const auto& l : lines) p.body.push_back(Statement{Line{l}});
    return p;
}

Program rename_counters(const Program& flat, const std::map<std::string, std::string>& m) {
    auto r = [&](const std::string& x) { return m.count(x) ? m.at(x) : x; };
    Lines lines = lines_of(flat);
    for (auto& l : lines)
        for (auto& c : l) {
            if (auto* x = std::get_if<Inc>(&c)) x->counter = r(x->counter);
            else if (auto* x = std::get_if<Dec>(&c)) x->counter = r(x->counter);
            else if (auto* x = std::get_if<ZeroTest>(&c)) x->counter = r(x->counter);
        }
    std::vector<std::string> counters;
    for (const auto& x : flat.counters) counters.push_back(r(x));
    return program_of(counters, flat.alphabet, lines);
}

// Realizes a counter as a stack symbol: increments push, decrements pop.
Program counter_to_stack(const Program& flat, const std::string& x) {
    Lines lines = lines_of(flat);
    for (auto& l : lines)
        for (auto& c : l) {
            if (auto* i = std::get_if<Inc>(&c); i && i->counter == x) c = Push{x};
            else if (auto* d = std::get_if<Dec>(&c); d && d->counter == x) c = Pop{x};
            else if (auto* z = std::get_if<ZeroTest>(&c); z && z->counter == x)
                throw ProgramError("cannot move zero-tested counter '" + x + "' to the stack");
        }
    std::vector<std::string> counters, alphabet = flat.alphabet;
    for (const auto& c : flat.counters)
        if (c != x) counters.push_back(c);
    alphabet.push_back(x);
    return program_of(counters, alphabet, lines);
}

std::uint64_t unary_constant(std::uint64_t n) {
    BigNat m = pow4(n) - 1;
    if (m > BigNat(1u << 20)) throw ProgramError("4^n-1 is too large to unfold");
    return static_cast<std::uint64_t>(m);
}

std::string fresh_name(const std::vector<std::string>& used, const std::string& base) {
    if (!contains(used, base)) return base;
    for (int k = 1;; ++k)
        if (!contains(used, base + std::to_string(k))) return base + std::to_string(k);
}

ZeroElimContext context_for(const Program& p, const std::string& a, const std::string& b, const std::string& c,
                            const std::vector<std::string>& taken) {
    if (p.counters.size() > 2 || !p.alphabet.empty())
        throw ProgramError("the source program must be a 2-counter program without a stack");
    ZeroElimContext ctx;
    ctx.x = p.counters.size() > 0 ? p.counters[0] : "x";
    ctx.y = p.counters.size() > 1 ? p.counters[1] : (ctx.x == "y" ? "x" : "y");
    for (const auto& n : {ctx.x, ctx.y})
        if (contains(taken, n)) throw ProgramError("counter '" + n + "' of the source program clashes with the amplifier");
    ctx.a = a;
    ctx.b = b;
    ctx.c = c;
    std::vector<std::string> used = taken;
    used.push_back(ctx.x);
    used.push_back(ctx.y);
    ctx.t = fresh_name(used, "t0");
    ctx.validate();
    return ctx;
}

struct Assembler {
    Program out;
    LineNo next = 1;
    std::pair<LineNo, LineNo> add(const Program& flat) {
        LineNo begin = next;
        out = out.body.empty() && out.counters.empty() ? flat : compose(out, flat);
        next = static_cast<LineNo>(out.body.size() + 1);
        return {begin, next};
    }
};

// Flat prelude for odd d: a cycle over (c'-pushes mod 4^n-1, b'-pushes so far).
Program interleaving_prelude(const std::string& a, const std::string& in_b, const std::string& in_c,
                             std::uint64_t n, std::uint64_t m) {
    const LineNo per = 6;
    auto state = [&](std::uint64_t j, std::uint64_t k) { return static_cast<LineNo>((k * m + j) * per + 1); };
    LineNo exit = static_cast<LineNo>(m * (n + 1) * per + 1);
    Lines lines;
    for (std::uint64_t k = 0; k <= n; ++k)
        for (std::uint64_t j = 0; j < m; ++j) {
            LineNo s = state(j, k);
            lines.push_back({Goto{s + 2, s + 1}});
            lines.push_back({Goto{s + 4, j == 0 && k == n ? exit : s + 4}});
            std::vector<Command> push_c{Push{in_c}};
            if (j + 1 == m) push_c.push_back(Inc{a});
            lines.push_back(push_c);
            LineNo nj = state((j + 1) % m, k);
            lines.push_back({Goto{nj, nj}});
            if (k < n) {
                lines.push_back({Push{in_b}});
                LineNo nk = state(j, k + 1);
                lines.push_back({Goto{nk, nk}});
            } else {
                lines.push_back({Goto{s + 4, s + 4}});
                lines.push_back({Goto{s + 5, s + 5}});
            }
        }
    return program_of({a}, {in_b, in_c}, lines);
}

std::uint64_t name_value(const Compiled& cp, const Configuration& c, const std::string& x) {
    for (std::size_t i = 0; i < cp.counters.size(); ++i)
        if (cp.counters[i] == x) return c.values[i];
    std::uint64_t k = 0;
    for (auto s : c.stack)
        if (cp.alphabet[s] == x) ++k;
    return k;
}

bool others_zero(const Compiled& cp, const Configuration& c, const std::vector<std::string>& keep) {
    for (std::size_t i = 0; i < cp.counters.size(); ++i)
        if (!contains(keep, cp.counters[i]) && c.values[i] != 0) return false;
    for (auto s : c.stack)
        if (!contains(keep, cp.alphabet[s])) return false;
    return true;
}

}  // namespace

void ReductionOptions::validate() const {
    if (reuse_counters && !unroll_bprime) throw ProgramError("counter reuse requires unrolling b'");
}

nlohmann::json PhaseRanges::to_json() const {
    auto r = [](const std::pair<LineNo, LineNo>& p) { return nlohmann::json::array({p.first, p.second}); };
    return {{"prelude", r(prelude)}, {"amplifier", r(amplifier)}, {"simulation", r(simulation)}, {"drain", r(drain)}};
}

nlohmann::json ReductionInstance::to_json(bool with_program) const {
    Compiled cp = compile(program);
    std::size_t size = 0;
    for (const auto& l : cp.lines) size += l.is_goto ? 1 : l.atoms.size();
    nlohmann::json j{{"mode", options.target == ReductionOptions::Target::Pushdown ? "pvass" : "vass"},
                     {"n", n},
                     {"d", d},
                     {"unroll_bprime", options.unroll_bprime},
                     {"reuse_counters", options.reuse_counters},
                     {"counters", cp.counters},
                     {"counter_count", cp.counters.size()},
                     {"alphabet", cp.alphabet},
                     {"lines", cp.lines.size()},
                     {"size", size},
                     {"phases", phases.to_json()},
                     {"reuse", reuse},
                     {"end_counters", end_counters}};
    if (!stack_counter.empty()) j["stack_counter"] = stack_counter;
    if (with_program) j["program"] = pretty_print(program);
    return j;
}

Program unroll_counter(const Program& flat, const std::string& counter, std::uint64_t n) {
    Lines lines = lines_of(flat);
    std::size_t m = lines.size();
    std::vector<bool> dec(m, false);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& c : lines[i]) {
            if (auto* x = std::get_if<Dec>(&c); x && x->counter == counter) {
                if (dec[i]) throw ProgramError("line decrements '" + counter + "' twice");
                dec[i] = true;
            }
            if (auto* x = std::get_if<Inc>(&c); x && x->counter == counter)
                throw ProgramError("'" + counter + "' is incremented; cannot unroll");
            if (auto* x = std::get_if<ZeroTest>(&c); x && x->counter == counter)
                throw ProgramError("'" + counter + "' is zero-tested; cannot unroll");
        }
    // Offsets of each source line inside one copy.
    std::vector<LineNo> offset(m + 2, 0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t rest = lines[i].size() - (dec[i] ? 1 : 0);
        offset[i + 2] = offset[i + 1] + static_cast<LineNo>(dec[i] ? (rest ? 2 : 1) : 1);
    }
    LineNo len = offset[m + 1];
    LineNo exit = static_cast<LineNo>((n + 1) * len + 1);
    Lines out;
    for (std::uint64_t k = 0; k <= n; ++k) {
        LineNo base = static_cast<LineNo>(k * len + 1);
        auto target = [&](std::uint64_t copy, LineNo t) {
            return t == m + 1 ? exit : static_cast<LineNo>(copy * len + 1 + offset[t]);
        };
        for (std::size_t i = 0; i < m; ++i) {
            const auto& l = lines[i];
            if (l.size() == 1 && std::holds_alternative<Goto>(l[0])) {
                auto g = std::get<Goto>(l[0]);
                out.push_back({Goto{target(k, g.first), target(k, g.second)}});
                continue;
            }
            if (!dec[i]) {
                out.push_back(l);
                continue;
            }
            std::vector<Command> rest;
            for (const auto& c : l)
                if (!(std::holds_alternative<Dec>(c) && std::get<Dec>(c).counter == counter)) rest.push_back(c);
            if (!rest.empty()) out.push_back(rest);
            LineNo self = static_cast<LineNo>(out.size() + 1);
            if (self != base + offset[i + 1] + (rest.empty() ? 0 : 1)) throw std::logic_error("unroll layout");
            // The last copy has the counter at zero: its decrements lead nowhere.
            LineNo to = k < n ? target(k + 1, static_cast<LineNo>(i + 2)) : self;
            out.push_back({Goto{to, to}});
        }
    }
    std::vector<std::string> counters;
    for (const auto& c : flat.counters)
        if (c != counter) counters.push_back(c);
    return program_of(counters, flat.alphabet, out);
}

ReductionInstance build_Ppp(const Program& p, std::uint64_t n, unsigned d, const ReductionOptions& opts) {
    opts.validate();
    if (n < 1 || d < 1) throw ProgramError("n and d must be positive");
    ReductionInstance inst;
    inst.options = opts;
    inst.options.target = ReductionOptions::Target::CounterOnly;
    inst.n = n;
    inst.d = d;
    AmplifierSpec pd = gen_Pd(d);
    Program amp = desugar(pd.program, pd.library);
    ZeroElimContext ctx = context_for(p, pd.a, pd.b, pd.c, amp.counters);
    inst.context = ctx;
    Program pprime = desugar(eliminate_zero_tests(p, ctx));
    std::uint64_t m = unary_constant(n);

    std::ostringstream pre;
    pre << "counters: " << pd.a << ' ' << pd.in_b << ' ' << pd.in_c << "\n";
    if (!opts.unroll_bprime) pre << "add " << pd.in_b << ' ' << n << "\n";
    pre << "loop { inc " << pd.a << "; add " << pd.in_c << ' ' << m << " }\n";
    Program prelude = desugar(parse(pre.str()));
    if (opts.unroll_bprime) {
        prelude.counters.erase(std::find(prelude.counters.begin(), prelude.counters.end(), pd.in_b));
        amp = unroll_counter(amp, pd.in_b, n);
    }
    if (opts.reuse_counters) {
        std::vector<std::string> free;
        for (const auto& x : amp.counters)
            if (x != pd.a && x != pd.b && x != pd.c && !contains(pd.Z, x)) free.push_back(x);
        std::sort(free.begin(), free.end());
        std::vector<std::string> mine{ctx.x, ctx.y, ctx.t};
        for (std::size_t i = 0; i < mine.size() && i < free.size(); ++i) inst.reuse[mine[i]] = free[i];
        pprime = rename_counters(pprime, inst.reuse);
    }
    Program drain = desugar(parse("counters: " + pd.a + "\nloop { dec " + pd.a + " }\n"));

    Assembler as;
    inst.phases.prelude = as.add(prelude);
    inst.phases.amplifier = as.add(amp);
    inst.phases.simulation = as.add(pprime);
    inst.phases.drain = as.add(drain);
    inst.program = as.out;
    inst.a = pd.a;
    inst.in_b = opts.unroll_bprime ? "" : pd.in_b;
    inst.in_c = pd.in_c;
    inst.out_b = pd.b;
    inst.out_c = pd.c;
    inst.end_counters = pd.Z;
    if (!opts.unroll_bprime && !opts.reuse_counters && inst.program.counters.size() != 2 * d + 7)
        throw std::logic_error("unoptimized P'' must use 2d+7 counters");
    return inst;
}

ReductionInstance build_Qpp(const Program& p, std::uint64_t n, unsigned d) {
    if (n < 1 || d < 1) throw ProgramError("n and d must be positive");
    ReductionInstance inst;
    inst.options.unroll_bprime = false;
    inst.options.reuse_counters = false;
    inst.options.target = ReductionOptions::Target::Pushdown;
    inst.n = n;
    inst.d = d;
    PushdownAmplifierSpec qd = gen_Qd(d);
    Program amp = desugar(qd.program, qd.library);
    std::vector<std::string> taken = amp.counters;
    taken.insert(taken.end(), amp.alphabet.begin(), amp.alphabet.end());
    ZeroElimContext ctx = context_for(p, qd.a, qd.b, qd.c, taken);
    inst.context = ctx;
    inst.stack_counter = ctx.t;
    Program pprime = counter_to_stack(desugar(eliminate_zero_tests(p, ctx)), ctx.t);
    std::uint64_t m = unary_constant(n);

    Program prelude;
    if (qd.delegates(qd.in_c)) {
        prelude = interleaving_prelude(qd.a, qd.in_b, qd.in_c, n, m);
    } else {
        std::ostringstream pre;
        pre << "counters: " << qd.a << ' ' << qd.in_c << "\nstack: " << qd.in_b << "\n";
        for (std::uint64_t i = 0; i < n; ++i) pre << (i ? "; " : "") << "push " << qd.in_b;
        pre << "\nloop { inc " << qd.a << "; add " << qd.in_c << ' ' << m << " }\n";
        prelude = desugar(parse(pre.str()));
    }
    Program drain = desugar(parse("counters: " + qd.a + "\nloop { dec " + qd.a + " }\n"));

    Assembler as;
    inst.phases.prelude = as.add(prelude);
    inst.phases.amplifier = as.add(amp);
    inst.phases.simulation = as.add(pprime);
    inst.phases.drain = as.add(drain);
    inst.program = as.out;
    inst.a = qd.a;
    inst.in_b = qd.in_b;
    inst.in_c = qd.in_c;
    inst.out_b = qd.b;
    inst.out_c = qd.c;
    inst.end_counters = qd.Z;
    if (inst.program.counters.size() != d / 2 + 6) throw std::logic_error("Q'' must use floor(d/2)+6 counters");
    return inst;
}

std::vector<PreludeOutcome> prelude_outcomes(const ReductionInstance& inst, std::uint64_t A_max, const Budget& b) {
    Lines lines = lines_of(inst.program);
    lines.resize(inst.phases.prelude.second - 1);
    Program pre = program_of(inst.program.counters, inst.program.alphabet, lines);
    Compiled cp = compile(pre);
    std::size_t ia = cp.counter_index(inst.a);
    std::uint64_t m = unary_constant(inst.n);
    SearchOptions so;
    so.in_scope = [&](const Configuration& c) { return c.values[ia] <= A_max; };
    Budget bb = b;
    bb.max_counter_value = (A_max + 1) * (m + 1) + inst.n + 1;
    bb.max_stack_height = (A_max + 1) * (m + 1) + inst.n + 1;
    auto res = search(cp, make_configuration(cp, {}), bb, so);
    std::vector<PreludeOutcome> out;
    for (const auto& f : res.finals) {
        if (f.pc != cp.halt()) continue;
        out.push_back({f.values[ia], valuation_of(cp, f), stack_word(cp, f)});
    }
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::json PhaseCheck::to_json() const {
    return {{"prelude_triple", prelude_triple},
            {"amplifier_zeroing", amplifier_zeroing},
            {"simulation_zeroing", simulation_zeroing}};
}

nlohmann::json ReductionReport::to_json(bool with_traces) const {
    nlohmann::json j{{"mode", mode},
                     {"n", n},
                     {"d", d},
                     {"target_zero_tests", target_tests.str()},
                     {"A_max", A_max},
                     {"counters", counters},
                     {"size", size},
                     {"lhs", lhs},
                     {"rhs", rhs},
                     {"states", states},
                     {"truncation", truncation.to_json()},
                     {"verdict", to_string(verdict)},
                     {"detail", detail}};
    if (!function_note.empty()) j["function_note"] = function_note;
    if (phases) j["phases"] = phases->to_json();
    j["lhs_positive_A"] = lhs_positive;
    if (witness_A) j["witness_A"] = *witness_A;
    if (lhs_witness) j["lhs_witness_steps"] = lhs_witness->configs.size() - 1;
    if (positive_witness) j["positive_witness_steps"] = positive_witness->configs.size() - 1;
    if (rhs_witness) j["rhs_witness_steps"] = rhs_witness->configs.size() - 1;
    if (with_traces && instance) {
        if (lhs_witness) j["lhs_witness"] = run_json(*instance, *lhs_witness);
        if (positive_witness) j["positive_witness"] = run_json(*instance, *positive_witness);
    }
    if (with_traces && source && rhs_witness) j["rhs_witness"] = run_json(*source, *rhs_witness);
    return j;
}

ReductionReport verify_reduction(const Program& p, std::uint64_t n, unsigned d, const Budget& b,
                                 const ReductionOptions& opts, std::uint64_t A_max) {
    ReductionReport rep;
    bool pushdown = opts.target == ReductionOptions::Target::Pushdown;
    rep.mode = pushdown ? "pvass" : "vass";
    rep.n = n;
    rep.d = d;
    rep.target_tests = F(d, n);
    if (literally_degenerate(d)) rep.function_note = degeneracy_note();
    if (rep.target_tests > 64) throw ProgramError("F_d(n) = " + rep.target_tests.str() + " zero tests is beyond desk scale");
    std::uint64_t B = static_cast<std::uint64_t>(rep.target_tests);
    ReductionInstance inst = pushdown ? build_Qpp(p, n, d) : build_Ppp(p, n, d, opts);
    Compiled cp = compile(inst.program);
    rep.instance = std::make_shared<const Compiled>(cp);
    rep.counters = cp.counters.size();
    for (const auto& l : cp.lines) rep.size += l.is_goto ? 1 : l.atoms.size();

    ZeroElimContext src_ctx;
    src_ctx.x = inst.context.x;
    src_ctx.y = inst.context.y;
    auto src = find_source_run(p, B, static_cast<std::uint64_t>(pow4(B)) * 16, b, src_ctx);
    rep.rhs = src.found;
    rep.source = std::make_shared<const Compiled>(compile(instrument_zero_tests(p, "zero_tests")));
    rep.rhs_witness = src.witness;
    for (const auto& l : src.truncation.limits) rep.truncation.limits.insert(l);

    std::uint64_t scale = B > n ? static_cast<std::uint64_t>(pow4(B - n)) : 1;
    rep.A_max = A_max ? A_max : scale * std::max<std::uint64_t>(1, src.excursion);

    std::size_t ia = cp.counter_index(inst.a);
    std::size_t ib = inst.in_b.empty() || !cp.source.has_counter(inst.in_b) ? cp.counters.size() : cp.counter_index(inst.in_b);
    LineNo amp_begin = inst.phases.amplifier.first;
    std::uint64_t amax = rep.A_max;
    Budget bb = b;
    std::uint64_t cap = std::max<std::uint64_t>(conserved_total(amax + 1, n), 2 * B + 2) + 1;
    bb.max_counter_value = std::min(b.max_counter_value, cap);
    bb.max_stack_height = std::min(b.max_stack_height, cap + n + 1);
    // The listing admits A = 0; the second search enters the amplifier only with A >= 1.
    auto lhs_search = [&](bool positive) {
        SearchOptions so;
        so.goal = goal_zeroing(cp, cp.counters, true);
        so.stop_at_goal = true;
        so.prune = !cp.has_stack();
        // The amplifier starts with a loop head, so only the empty entry (A = 0) is excluded.
        so.in_scope = [&, positive](const Configuration& c) {
            if (c.pc < amp_begin) return c.values[ia] <= amax;
            if (!positive || c.pc != amp_begin) return true;
            for (std::size_t i = 0; i < c.values.size(); ++i)
                if (c.values[i] != 0 && i != ib) return true;
            for (auto s : c.stack)
                if (cp.alphabet[s] != inst.in_b) return true;
            return false;
        };
        auto res = search(cp, make_configuration(cp, {}), bb, so);
        rep.states += res.states;
        for (const auto& l : res.truncation.limits) rep.truncation.limits.insert(l);
        rep.truncation.cut_states += res.truncation.cut_states;
        return res.witness;
    };
    rep.lhs_witness = lhs_search(false);
    rep.lhs = rep.lhs_witness.has_value();
    rep.positive_witness = lhs_search(true);
    rep.lhs_positive = rep.positive_witness.has_value();
    rep.truncation.cut_states += src.truncation.cut_states;

    if (rep.positive_witness) {
        PhaseCheck pc;
        const auto& cs = rep.positive_witness->configs;
        auto first_at = [&](LineNo line) {
            for (std::size_t i = 0; i < cs.size(); ++i)
                if (cs[i].pc >= line) return i;
            return cs.size() - 1;
        };
        const auto& x1 = cs[first_at(inst.phases.amplifier.first)];
        const auto& x2 = cs[first_at(inst.phases.simulation.first)];
        const auto& x3 = cs[first_at(inst.phases.drain.first)];
        std::uint64_t A = name_value(cp, x1, inst.a);
        rep.witness_A = A;
        std::uint64_t m = unary_constant(n);
        std::vector<std::string> in{inst.a, inst.in_c};
        if (!inst.in_b.empty()) in.push_back(inst.in_b);
        pc.prelude_triple = name_value(cp, x1, inst.in_c) == A * m && others_zero(cp, x1, in) &&
                            (inst.in_b.empty() || name_value(cp, x1, inst.in_b) == n);
        std::uint64_t a2 = name_value(cp, x2, inst.a);
        pc.amplifier_zeroing = name_value(cp, x2, inst.out_b) == B &&
                               BigNat(name_value(cp, x2, inst.out_c)) == BigNat(a2) * (pow4(B) - 1) &&
                               others_zero(cp, x2, {inst.a, inst.out_b, inst.out_c});
        pc.simulation_zeroing = others_zero(cp, x3, {inst.a});
        rep.phases = pc;
    }

    bool agree = rep.lhs == rep.rhs && rep.lhs_positive == rep.rhs;
    if (agree && (!rep.rhs || rep.phases->ok())) {
        rep.verdict = Verdict::Verified;
        rep.detail = rep.lhs ? "agree: accepted" : "agree: rejected";
        if (!rep.lhs && rep.truncation.fired()) {
            rep.verdict = Verdict::Inconclusive;
            rep.detail = "no run found, but the budget was exhausted";
        }
    } else if (rep.truncation.fired()) {
        rep.verdict = Verdict::Inconclusive;
        rep.detail = "budget exhausted";
    } else {
        rep.verdict = Verdict::Falsified;
        rep.detail = agree                ? "accepting run violates the phase structure"
                     : rep.lhs != rep.lhs_positive ? "acceptance depends on allowing A = 0"
                     : rep.lhs         ? "instance accepts but p has no run with the target test count"
                                       : "p has a run with the target test count but the instance rejects";
    }
    return rep;
}

}  // namespace vassforge
