#include "vassforge/export.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace vassforge {

namespace {

std::string delta_label(const ExportedVASS& v, const VassTransition& t) {
    std::string s;
    for (std::size_t i = 0; i < t.delta.size(); ++i) {
        if (t.delta[i] == 0) continue;
        if (!s.empty()) s += " ";
        s += (t.delta[i] > 0 ? "+" : "-") + v.counters[i];
    }
    if (t.stack) {
        if (!s.empty()) s += " ";
        s += (t.stack->kind == StackOp::Kind::Push ? "push " : "pop ") + t.stack->symbol;
    }
    return s.empty() ? "eps" : s;
}

}  // namespace

nlohmann::json ExportedVASS::to_json() const {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : transitions) {
        nlohmann::json j{{"from", t.from}, {"to", t.to}, {"delta", t.delta}};
        if (t.stack)
            j["stack"] = {{"op", t.stack->kind == StackOp::Kind::Push ? "push" : "pop"}, {"symbol", t.stack->symbol}};
        ts.push_back(std::move(j));
    }
    return {{"format_version", kFormatVersion},
            {"kind", pushdown() ? "pvass" : "vass"},
            {"dimension", dimension()},
            {"counters", counters},
            {"alphabet", alphabet},
            {"states", states},
            {"initial", initial},
            {"halt", halt},
            {"transitions", ts}};
}

ExportedVASS ExportedVASS::from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != kFormatVersion) throw ProgramError("unsupported format_version");
    ExportedVASS v;
    v.counters = j.at("counters").get<std::vector<std::string>>();
    v.alphabet = j.value("alphabet", std::vector<std::string>{});
    v.states = j.at("states").get<std::vector<std::string>>();
    v.initial = j.at("initial").get<std::size_t>();
    v.halt = j.at("halt").get<std::size_t>();
    if (v.initial >= v.states.size() || v.halt >= v.states.size()) throw ProgramError("state index out of range");
    if (j.contains("dimension") && j["dimension"].get<std::size_t>() != v.counters.size())
        throw ProgramError("dimension does not match the counter list");
    for (const auto& jt : j.at("transitions")) {
        VassTransition t;
        t.from = jt.at("from").get<std::size_t>();
        t.to = jt.at("to").get<std::size_t>();
        t.delta = jt.at("delta").get<std::vector<std::int64_t>>();
        if (t.from >= v.states.size() || t.to >= v.states.size()) throw ProgramError("transition state out of range");
        if (t.delta.size() != v.counters.size()) throw ProgramError("delta length differs from the dimension");
        if (jt.contains("stack")) {
            StackOp op;
            std::string k = jt["stack"].at("op").get<std::string>();
            if (k != "push" && k != "pop") throw ProgramError("unknown stack op " + k);
            op.kind = k == "push" ? StackOp::Kind::Push : StackOp::Kind::Pop;
            op.symbol = jt["stack"].at("symbol").get<std::string>();
            t.stack = op;
        }
        v.transitions.push_back(std::move(t));
    }
    return v;
}

std::string ExportedVASS::to_dot() const {
    std::ostringstream os;
    os << "digraph vass {\n  rankdir=LR;\n";
    for (std::size_t i = 0; i < states.size(); ++i) {
        os << "  s" << i << " [label=\"" << states[i] << "\"";
        if (i == halt) os << ", shape=doublecircle";
        if (i == initial) os << ", style=bold";
        os << "];\n";
    }
    for (const auto& t : transitions)
        os << "  s" << t.from << " -> s" << t.to << " [label=\"" << delta_label(*this, t) << "\"];\n";
    os << "}\n";
    return os.str();
}

ExportedVASS export_vass(const Program& p, const Library& lib, bool allow_stack) {
    Program flat = desugar(p, lib);
    if (flat.has_zero_tests()) throw ProgramError("a zero test cannot be exported to a VASS");
    if (!allow_stack && !flat.alphabet.empty()) throw ProgramError("stack commands need the pushdown export");
    ExportedVASS v;
    v.counters = flat.counters;
    v.alphabet = flat.alphabet;

    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < v.counters.size(); ++i) idx[v.counters[i]] = i;

    std::vector<std::vector<Command>> lines;
    for (const auto& st : flat.body) {
        std::vector<Command> atoms;
        for (const auto& c : std::get<Line>(st.node).commands)
            for (auto& a : expand_atoms(c)) atoms.push_back(std::move(a));
        lines.push_back(std::move(atoms));
    }
    // Line states first so that line l is state l-1.
    std::vector<std::size_t> first_extra(lines.size() + 1, 0);
    for (std::size_t l = 0; l < lines.size(); ++l) v.states.push_back("L" + std::to_string(l + 1));
    v.halt = v.states.size();
    v.states.push_back("halt");
    for (std::size_t l = 0; l < lines.size(); ++l) {
        first_extra[l] = v.states.size();
        bool is_goto = lines[l].size() == 1 && std::holds_alternative<Goto>(lines[l][0]);
        if (is_goto) continue;
        for (std::size_t i = 1; i < lines[l].size(); ++i)
            v.states.push_back("L" + std::to_string(l + 1) + "." + std::to_string(i));
    }
    v.initial = lines.empty() ? v.halt : 0;

    auto line_state = [&](LineNo l) { return l >= 1 && l <= lines.size() ? std::size_t(l - 1) : v.halt; };
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto& atoms = lines[l];
        if (atoms.size() == 1 && std::holds_alternative<Goto>(atoms[0])) {
            const auto& g = std::get<Goto>(atoms[0]);
            VassTransition t{l, line_state(g.first), std::vector<std::int64_t>(v.dimension(), 0), std::nullopt};
            v.transitions.push_back(t);
            if (g.second != g.first) {
                t.to = line_state(g.second);
                v.transitions.push_back(t);
            }
            continue;
        }
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            VassTransition t;
            t.from = i == 0 ? l : first_extra[l] + i - 1;
            t.to = i + 1 == atoms.size() ? line_state(static_cast<LineNo>(l + 2)) : first_extra[l] + i;
            t.delta.assign(v.dimension(), 0);
            std::visit(
                [&](const auto& a) {
                    using T = std::decay_t<decltype(a)>;
                    if constexpr (std::is_same_v<T, Inc>) t.delta[idx.at(a.counter)] = 1;
                    else if constexpr (std::is_same_v<T, Dec>) t.delta[idx.at(a.counter)] = -1;
                    else if constexpr (std::is_same_v<T, Push>) t.stack = StackOp{StackOp::Kind::Push, a.symbol};
                    else if constexpr (std::is_same_v<T, Pop>) t.stack = StackOp{StackOp::Kind::Pop, a.symbol};
                    else throw ProgramError("unexpected command in a flat line: " + to_string(Command(a)));
                },
                atoms[i]);
            v.transitions.push_back(std::move(t));
        }
    }
    return v;
}

Program import_vass(const ExportedVASS& v) {
    std::vector<std::vector<const VassTransition*>> out(v.states.size());
    for (const auto& t : v.transitions) out[t.from].push_back(&t);

    // Block order: initial first, halt excluded; halt maps past the last line.
    std::vector<std::size_t> order;
    if (v.initial != v.halt) order.push_back(v.initial);
    for (std::size_t s = 0; s < v.states.size(); ++s)
        if (s != v.initial && s != v.halt) order.push_back(s);

    auto block_size = [&](std::size_t s) -> std::size_t {
        const auto& ts = out[s];
        if (ts.empty()) return 1;
        std::size_t n = ts.size() - 1;
        for (const auto* t : ts) n += (t->stack || std::any_of(t->delta.begin(), t->delta.end(), [](auto d) { return d != 0; })) ? 2 : 1;
        return n;
    };
    std::vector<LineNo> begin(v.states.size(), 0);
    LineNo next = 1;
    for (auto s : order) {
        begin[s] = next;
        next += static_cast<LineNo>(block_size(s));
    }
    begin[v.halt] = next;

    Program p;
    p.counters = v.counters;
    p.alphabet = v.alphabet;
    auto emit = [&](std::vector<Command> cs) { p.body.push_back(Statement{Line{std::move(cs)}}); };
    for (auto s : order) {
        const auto& ts = out[s];
        LineNo here = begin[s];
        if (ts.empty()) {
            emit({Goto{here, here}});
            continue;
        }
        // Choice chain: line j branches to transition j or to line j+1.
        std::size_t k = ts.size();
        std::vector<LineNo> tstart(k);
        LineNo pos = here + static_cast<LineNo>(k - 1);
        for (std::size_t j = 0; j < k; ++j) {
            tstart[j] = pos;
            bool effect = ts[j]->stack || std::any_of(ts[j]->delta.begin(), ts[j]->delta.end(), [](auto d) { return d != 0; });
            pos += effect ? 2 : 1;
        }
        for (std::size_t j = 0; j + 1 < k; ++j)
            emit({Goto{tstart[j], j + 2 < k ? static_cast<LineNo>(here + j + 1) : tstart[k - 1]}});
        for (std::size_t j = 0; j < k; ++j) {
            const auto& t = *ts[j];
            std::vector<Command> cs;
            for (std::size_t i = 0; i < t.delta.size(); ++i) {
                for (std::int64_t d = 0; d < t.delta[i]; ++d) cs.push_back(Inc{v.counters[i]});
                for (std::int64_t d = 0; d > t.delta[i]; --d) cs.push_back(Dec{v.counters[i]});
            }
            if (t.stack) {
                if (t.stack->kind == StackOp::Kind::Push) cs.push_back(Push{t.stack->symbol});
                else cs.push_back(Pop{t.stack->symbol});
            }
            if (!cs.empty()) emit(std::move(cs));
            emit({Goto{begin[t.to], begin[t.to]}});
        }
    }
    return p;
}

nlohmann::json RoundTripReport::to_json() const {
    return {{"box", box}, {"starts", starts}, {"mismatches", mismatches}, {"examples", examples},
            {"verdict", to_string(verdict)}};
}

RoundTripReport check_round_trip(const Program& p, std::uint64_t box, const Budget& b, const Library& lib) {
    RoundTripReport rep;
    rep.box = box;
    ExportedVASS v = export_vass(p, lib, true);
    Compiled a = compile(desugar(p, lib));
    Compiled q = compile(import_vass(v));
    Budget bb = b;
    bool truncated = false;
    auto endpoints = [&](const Compiled& cp, const Valuation& val) {
        auto r = search(cp, make_configuration(cp, val), bb);
        // The counter cap is a shared box; only step and state limits make a start incomparable.
        truncated |= r.truncation.limits.count("max_states") || r.truncation.limits.count("max_steps");
        std::set<std::pair<std::vector<std::uint64_t>, std::string>> s;
        for (const auto& f : r.finals) s.insert({f.values, stack_word(cp, f)});
        return s;
    };
    std::vector<std::uint64_t> cur(v.dimension(), 0);
    for (;;) {
        Valuation val;
        for (std::size_t i = 0; i < cur.size(); ++i) val[v.counters[i]] = cur[i];
        ++rep.starts;
        if (endpoints(a, val) != endpoints(q, val)) {
            ++rep.mismatches;
            if (rep.examples.size() < 5) rep.examples.push_back(nlohmann::json(val).dump());
        }
        std::size_t i = 0;
        while (i < cur.size() && cur[i] == box) cur[i++] = 0;
        if (i == cur.size()) break;
        ++cur[i];
    }
    rep.verdict = rep.mismatches ? Verdict::Falsified : truncated ? Verdict::Inconclusive : Verdict::Verified;
    return rep;
}

}  // namespace vassforge
