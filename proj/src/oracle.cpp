#include "vassforge/oracle.hpp"

#include <algorithm>
#include <random>

namespace vassforge::oracle {

namespace {

struct Box {
    std::uint64_t max_value, max_height;
    bool cut = false;
    std::set<std::string> limits;
};

bool do_inc(OConfig& c, const std::string& x, Box& box) {
    auto& v = c.values[x];
    if (v + 1 > box.max_value) {
        box.limits.insert("max_counter_value");
        return false;
    }
    ++v;
    return true;
}

bool do_dec(OConfig& c, const std::string& x) {
    auto& v = c.values[x];
    if (v == 0) return false;
    --v;
    return true;
}

// Applies one command; false when it blocks or leaves the box.
bool exec(const Command& cmd, OConfig& c, Box& box) {
    if (auto* x = std::get_if<Inc>(&cmd)) return do_inc(c, x->counter, box);
    if (auto* x = std::get_if<Dec>(&cmd)) return do_dec(c, x->counter);
    if (auto* x = std::get_if<ZeroTest>(&cmd)) return c.values[x->counter] == 0;
    if (auto* x = std::get_if<Push>(&cmd)) {
        if (c.stack.size() + 1 > box.max_height) {
            box.limits.insert("max_stack_height");
            return false;
        }
        c.stack.push_back(x->symbol);
        return true;
    }
    if (auto* x = std::get_if<Pop>(&cmd)) {
        if (c.stack.empty() || c.stack.back() != x->symbol) return false;
        c.stack.pop_back();
        return true;
    }
    if (auto* x = std::get_if<Add>(&cmd)) {
        for (std::uint32_t i = 0; i < x->amount; ++i)
            if (!do_inc(c, x->counter, box)) return false;
        return true;
    }
    if (auto* x = std::get_if<Sub>(&cmd)) {
        for (std::uint32_t i = 0; i < x->amount; ++i)
            if (!do_dec(c, x->counter)) return false;
        return true;
    }
    if (auto* x = std::get_if<Move>(&cmd)) return do_dec(c, x->from) && do_inc(c, x->to, box);
    if (auto* x = std::get_if<MoveK>(&cmd)) {
        for (std::uint32_t i = 0; i < x->amount; ++i)
            if (!do_dec(c, x->from) || !do_inc(c, x->to, box)) return false;
        return true;
    }
    throw ProgramError("oracle: unexpected command " + to_string(cmd));
}

struct Machine {
    std::vector<std::vector<Command>> lines;
    std::vector<std::string> counters;

    explicit Machine(const Program& p, const Library& lib) {
        Program flat = desugar(p, lib);
        counters = flat.counters;
        for (const auto& s : flat.body) lines.push_back(std::get<Line>(s.node).commands);
    }

    LineNo halt() const { return static_cast<LineNo>(lines.size() + 1); }

    OConfig normalize(OConfig c) const {
        for (const auto& x : counters) c.values.try_emplace(x, 0);
        return c;
    }

    // Successors in reverse goto order, so the traversal differs from the engine's.
    std::vector<OConfig> successors(const OConfig& c, Box& box) const {
        std::vector<OConfig> out;
        if (c.pc < 1 || c.pc > lines.size()) return out;
        const auto& cmds = lines[c.pc - 1];
        if (cmds.size() == 1) {
            if (auto* g = std::get_if<Goto>(&cmds[0])) {
                OConfig n = c;
                n.pc = g->second;
                out.push_back(n);
                if (g->first != g->second) {
                    n.pc = g->first;
                    out.push_back(std::move(n));
                }
                return out;
            }
        }
        OConfig n = c;
        for (const auto& cmd : cmds)
            if (!exec(cmd, n, box)) return out;
        n.pc = c.pc + 1;
        out.push_back(std::move(n));
        return out;
    }
};

struct Explorer {
    const Machine& m;
    const Budget& b;
    Box box;
    std::set<OConfig> visited;
    std::vector<OConfig> path;

    Explorer(const Machine& m_, const Budget& b_) : m(m_), b(b_), box{b_.max_counter_value, b_.max_stack_height, false, {}} {}

    // Visits everything reachable from src; on_config returns true to stop with the current path.
    bool run(const OConfig& src, const std::function<bool(const OConfig&)>& on_config) {
        struct Frame {
            std::vector<OConfig> succ;
            std::size_t next = 0;
        };
        std::vector<Frame> frames;
        auto enter = [&](const OConfig& c) -> bool {
            visited.insert(c);
            path.push_back(c);
            if (on_config(c)) return true;
            if (path.size() - 1 >= b.max_steps) {
                if (c.pc != m.halt()) {
                    Box probe = box;
                    if (!m.successors(c, probe).empty()) box.limits.insert("max_steps");
                }
                frames.push_back({});
                return false;
            }
            frames.push_back({m.successors(c, box), 0});
            return false;
        };
        if (enter(src)) return true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.next == f.succ.size()) {
                frames.pop_back();
                path.pop_back();
                continue;
            }
            OConfig n = f.succ[f.next++];
            if (visited.count(n)) continue;
            if (visited.size() >= b.max_states) {
                box.limits.insert("max_states");
                return false;
            }
            if (enter(n)) return true;
        }
        return false;
    }
};

}  // namespace

OConfig from_engine(const Compiled& cp, const Configuration& c) {
    OConfig o;
    o.pc = c.pc;
    for (std::size_t i = 0; i < cp.counters.size(); ++i) o.values[cp.counters[i]] = c.values[i];
    for (auto s : c.stack) o.stack.push_back(cp.alphabet[s]);
    return o;
}

Configuration to_engine(const Compiled& cp, const OConfig& c) {
    Configuration e;
    e.pc = c.pc;
    e.values.assign(cp.counters.size(), 0);
    for (const auto& [k, v] : c.values) e.values[cp.counter_index(k)] = v;
    for (const auto& s : c.stack) e.stack.push_back(static_cast<std::uint32_t>(cp.symbol_index(s)));
    return e;
}

nlohmann::json to_json(const OConfig& c) {
    std::string w;
    for (const auto& s : c.stack) w += s;
    return {{"pc", c.pc}, {"values", c.values}, {"stack", w}};
}

std::string to_string(OracleVerdict::Kind k) {
    switch (k) {
    case OracleVerdict::Kind::Reachable: return "reachable";
    case OracleVerdict::Kind::Unreachable: return "unreachable";
    case OracleVerdict::Kind::Unknown: return "unknown";
    }
    return "?";
}

nlohmann::json OracleVerdict::to_json() const {
    nlohmann::json j{{"verdict", to_string(kind)}, {"visited", visited}, {"limits", limits}};
    if (kind == Kind::Reachable) {
        auto w = nlohmann::json::array();
        for (const auto& c : witness) w.push_back(oracle::to_json(c));
        j["witness"] = w;
    }
    return j;
}

OracleVerdict reach_oracle(const Program& p, const OConfig& src, const OConfig& dst, const Budget& b,
                           const Library& lib) {
    OracleVerdict v;
    if (b.max_steps == 0) {
        v.limits.insert("max_steps");
        return v;
    }
    Machine m(p, lib);
    OConfig s = m.normalize(src), d = m.normalize(dst);
    Explorer ex(m, b);
    bool found = ex.run(s, [&](const OConfig& c) { return c == d; });
    v.visited = ex.visited.size();
    if (found) {
        v.kind = OracleVerdict::Kind::Reachable;
        v.witness = ex.path;
    } else if (ex.box.limits.empty()) {
        v.kind = OracleVerdict::Kind::Unreachable;
    } else {
        v.limits = ex.box.limits;
    }
    return v;
}

FinalsResult oracle_finals(const Program& p, const OConfig& src, const Budget& b, const Library& lib) {
    FinalsResult r;
    if (b.max_steps == 0) {
        r.limits.insert("max_steps");
        return r;
    }
    Machine m(p, lib);
    Explorer ex(m, b);
    ex.run(m.normalize(src), [&](const OConfig& c) {
        if (c.pc == m.halt()) r.finals.insert(c);
        return false;
    });
    r.limits = ex.box.limits;
    r.visited = ex.visited.size();
    return r;
}

bool replay(const Compiled& cp, const std::vector<OConfig>& witness, const Budget& b) {
    for (std::size_t i = 0; i + 1 < witness.size(); ++i) {
        auto from = to_engine(cp, witness[i]), to = to_engine(cp, witness[i + 1]);
        auto st = step(cp, from, b);
        if (std::find(st.successors.begin(), st.successors.end(), to) == st.successors.end()) return false;
    }
    return true;
}

std::pair<Program, std::map<std::string, std::uint64_t>> random_program(std::uint64_t seed, const ShapeLimits& s) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    static const char* names[] = {"x", "y", "z", "u", "v", "w"};
    std::size_t k = uniform(1, std::min<std::size_t>(s.max_counters, 6));
    std::size_t n = uniform(1, s.max_lines);
    Program p;
    for (std::size_t i = 0; i < k; ++i) p.counters.push_back(names[i]);
    for (std::size_t l = 0; l < n; ++l) {
        Line line;
        if (uniform(0, 9) < 3) {
            line.commands.push_back(Goto{static_cast<LineNo>(uniform(1, n + 1)), static_cast<LineNo>(uniform(1, n + 1))});
        } else {
            std::size_t atoms = uniform(1, 2);
            for (std::size_t a = 0; a < atoms; ++a) {
                const std::string& x = p.counters[uniform(0, k - 1)];
                switch (uniform(0, 2)) {
                case 0: line.commands.push_back(Inc{x}); break;
                case 1: line.commands.push_back(Dec{x}); break;
                default: line.commands.push_back(ZeroTest{x}); break;
                }
            }
        }
        p.body.push_back(Statement{line});
    }
    std::map<std::string, std::uint64_t> init;
    for (const auto& x : p.counters) init[x] = uniform(0, s.max_value);
    return {p, init};
}

namespace {

struct Comparison {
    bool comparable = true;  // neither side hit a step or state limit
    bool agree = true;
    bool box_cut = false;
    bool deterministic = true;
    std::uint64_t engine_finals = 0;
    std::string reason;
};

Comparison compare(const Program& p, const std::map<std::string, std::uint64_t>& init, const Budget& b,
                   const DifferentialOptions& opt) {
    Comparison out;
    Compiled cp = compile(p);
    Configuration c0 = make_configuration(cp, init);
    SearchOptions so;
    so.workers = 1;
    auto r1 = search(cp, c0, b, so);
    so.workers = std::max(1u, opt.workers);
    auto rn = search(cp, c0, b, so);
    out.deterministic = r1.finals == rn.finals && r1.states == rn.states &&
                        r1.truncation.limits == rn.truncation.limits;
    if (opt.corrupt_engine && !r1.finals.empty()) r1.finals.erase(r1.finals.begin());
    OConfig src;
    src.values = init;
    auto orc = oracle_finals(p, src, b);
    for (const auto* lim : {&r1.truncation.limits, &orc.limits}) {
        if (lim->count("max_steps") || lim->count("max_states")) out.comparable = false;
        if (lim->count("max_counter_value") || lim->count("max_stack_height")) out.box_cut = true;
    }
    out.engine_finals = r1.finals.size();
    if (!out.comparable) return out;
    std::set<OConfig> eng;
    for (const auto& f : r1.finals) eng.insert(from_engine(cp, f));
    if (eng != orc.finals) {
        out.agree = false;
        out.reason = "endpoint sets differ: engine " + std::to_string(eng.size()) + ", oracle " +
                     std::to_string(orc.finals.size());
    } else if (!out.deterministic) {
        out.agree = false;
        out.reason = "engine results depend on the worker count";
    }
    return out;
}

// Deletes one line, retargeting gotos past it.
Program drop_line(const Program& p, std::size_t idx) {
    Program q = p;
    q.body.erase(q.body.begin() + static_cast<std::ptrdiff_t>(idx));
    auto fix = [&](LineNo t) { return t > idx + 1 ? t - 1 : t; };
    for (auto& s : q.body)
        for (auto& c : std::get<Line>(s.node).commands)
            if (auto* g = std::get_if<Goto>(&c)) {
                g->first = fix(g->first);
                g->second = fix(g->second);
            }
    return q;
}

}  // namespace

nlohmann::json DifferentialReport::to_json() const {
    auto d = nlohmann::json::array();
    for (const auto& x : divergences)
        d.push_back({{"seed", x.seed}, {"program", x.program}, {"init", x.init}, {"reason", x.reason}});
    return {{"programs", programs},
            {"agreements", agreements},
            {"box_truncated", truncated},
            {"engine_finals", engine_finals},
            {"workers_deterministic", workers_deterministic},
            {"divergences", d}};
}

DifferentialReport differential_check(std::uint64_t count, const ShapeLimits& s, const Budget& b,
                                      const DifferentialOptions& opt) {
    DifferentialReport rep;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t seed = opt.first_seed + i;
        auto [p, init] = random_program(seed, s);
        ++rep.programs;
        auto cmp = compare(p, init, b, opt);
        rep.engine_finals += cmp.engine_finals;
        if (cmp.box_cut) ++rep.truncated;
        if (!cmp.deterministic) rep.workers_deterministic = false;
        if (!cmp.comparable || cmp.agree) {
            if (cmp.comparable) ++rep.agreements;
            continue;
        }
        Program small = p;
        bool shrunk = true;
        while (shrunk && small.body.size() > 1) {
            shrunk = false;
            for (std::size_t l = 0; l < small.body.size(); ++l) {
                Program cand = drop_line(small, l);
                auto c2 = compare(cand, init, b, opt);
                if (c2.comparable && !c2.agree) {
                    small = cand;
                    shrunk = true;
                    break;
                }
            }
        }
        rep.divergences.push_back({seed, pretty_print(small), init, cmp.reason});
    }
    return rep;
}

}  // namespace vassforge::oracle
