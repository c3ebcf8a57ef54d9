#include "vassforge/amplifiers.hpp"
#include "vassforge/export.hpp"
#include "vassforge/oracle.hpp"
#include "vassforge/pvass.hpp"
#include "vassforge/reduction.hpp"
#include "vassforge/zeroelim.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace vassforge;
using nlohmann::json;

namespace {

constexpr int kUsage = 3;

struct Globals {
    bool pretty = false;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string budget;  // JSON overriding VASSFORGE_BUDGET
    std::string out;

    Budget make_budget() const {
        Budget b = Budget::from_env();
        if (!budget.empty()) b = Budget::from_json(json::parse(budget), b);
        b.workers = workers;
        return b;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProgramError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Program load_program(const std::string& path) {
    std::string text = read_file(path);
    if (ends_with(path, ".json")) return program_from_json(json::parse(text));
    return parse(text);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

// "x=2,y=0"
Valuation parse_valuation(const std::string& s) {
    Valuation v;
    for (const auto& item : split(s, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ProgramError("expected name=value in '" + item + "'");
        v[item.substr(0, eq)] = std::stoull(item.substr(eq + 1));
    }
    return v;
}

void render_pretty(std::ostream& os, const json& j, int indent) {
    std::string pad(static_cast<std::size_t>(indent), ' ');
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            bool nested = (v.is_object() && !v.empty()) ||
                          (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array()));
            if (nested) {
                os << pad << k << ":\n";
                render_pretty(os, v, indent + 2);
            } else if (v.is_string()) {
                std::string s = v.get<std::string>();
                if (s.find('\n') != std::string::npos) {
                    os << pad << k << ":\n";
                    for (const auto& line : split(s, '\n')) os << pad << "  " << line << "\n";
                } else {
                    os << pad << k << ": " << s << "\n";
                }
            } else {
                os << pad << k << ": " << v.dump() << "\n";
            }
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (v.is_object() || v.is_array()) {
                os << pad << "-\n";
                render_pretty(os, v, indent + 2);
            } else {
                os << pad << "- " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
            }
        }
    } else {
        os << pad << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
}

void write_text(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    if (!f) throw ProgramError("cannot write " + g.out);
    f << text;
}

void emit(const Globals& g, const json& j) {
    std::ostringstream os;
    if (g.pretty) render_pretty(os, j, 0);
    else os << j.dump() << "\n";
    write_text(g, os.str());
}

Verdict truncation_verdict(const Truncation& t) { return t.fired() ? Verdict::Inconclusive : Verdict::Verified; }

ReductionOptions reduction_options(const std::string& mode, bool no_unroll, bool no_reuse) {
    ReductionOptions o;
    if (mode == "pvass") o.target = ReductionOptions::Target::Pushdown;
    else if (mode != "vass") throw ProgramError("--mode must be vass or pvass");
    o.unroll_bprime = !no_unroll;
    o.reuse_counters = !no_reuse && !no_unroll;
    if (o.target == ReductionOptions::Target::Pushdown) o.unroll_bprime = o.reuse_counters = false;
    return o;
}

std::vector<std::uint64_t> powers_of_four(std::uint64_t B) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 0; k <= B && k < 16; ++k) out.push_back(std::uint64_t(1) << (2 * k));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vassforge: counter programs, amplifiers and zero-test elimination"};
    app.require_subcommand(1);
    Globals g;
    app.add_flag("--pretty", g.pretty, "human-readable output instead of JSON");
    app.add_option("--workers", g.workers, "search threads")->check(CLI::PositiveNumber);
    app.add_option("--budget", g.budget, "budget JSON, overrides VASSFORGE_BUDGET");
    app.add_option("--out", g.out, "write the result to a file");

    Verdict verdict = Verdict::Verified;
    std::function<void()> action;

    // parse
    std::string in;
    bool flat = false, as_json = false;
    auto* parse_cmd = app.add_subcommand("parse", "parse a program and print it");
    parse_cmd->add_option("file", in, "program (.vp or .vp.json)")->required();
    parse_cmd->add_flag("--flat", flat, "desugar first");
    parse_cmd->add_flag("--json", as_json, "program JSON instead of text");
    parse_cmd->callback([&] {
        action = [&] {
            Program p = load_program(in);
            if (flat) p = desugar(p);
            if (as_json) emit(g, to_json(p));
            else write_text(g, pretty_print(p));
        };
    });

    // run
    std::string init, stack;
    std::uint64_t limit = 10;
    auto* run_cmd = app.add_subcommand("run", "enumerate runs from a configuration");
    run_cmd->add_option("file", in)->required();
    run_cmd->add_option("--init", init, "initial valuation, e.g. x=2,y=0");
    run_cmd->add_option("--stack", stack, "initial stack, bottom first, comma separated");
    run_cmd->add_option("--limit", limit, "runs to print");
    run_cmd->callback([&] {
        action = [&] {
            Budget b = g.make_budget();
            Compiled cp = compile(load_program(in));
            auto start = make_configuration(cp, parse_valuation(init), split(stack, ','));
            json runs = json::array();
            std::uint64_t complete = 0;
            auto rep = enumerate_runs(cp, start, b, [&](const Run& r) {
                if (r.complete()) ++complete;
                if (runs.size() < limit) runs.push_back(run_json(cp, r));
                return true;
            });
            verdict = truncation_verdict(rep.truncation);
            emit(g, {{"runs", rep.runs}, {"complete", complete}, {"shown", runs}, {"truncation", rep.truncation.to_json()},
                     {"verdict", to_string(verdict)}});
        };
    });

    // search
    std::string zero, exact;
    bool empty_stack = false, prune = false;
    auto* search_cmd = app.add_subcommand("search", "reachability of a halting configuration");
    search_cmd->add_option("file", in)->required();
    search_cmd->add_option("--init", init);
    search_cmd->add_option("--stack", stack);
    search_cmd->add_option("--zero", zero, "counters required to be 0 at halt");
    search_cmd->add_option("--exact", exact, "required values at halt, e.g. z=5");
    search_cmd->add_flag("--empty-stack", empty_stack);
    search_cmd->add_flag("--prune", prune, "discard states the relaxation proves hopeless");
    search_cmd->callback([&] {
        action = [&] {
            Budget b = g.make_budget();
            Compiled cp = compile(load_program(in));
            SearchOptions so;
            so.goal = goal_zeroing(cp, split(zero, ','), empty_stack);
            for (const auto& [n, v] : parse_valuation(exact))
                so.goal->exact.push_back({static_cast<std::uint32_t>(cp.counter_index(n)), v});
            so.prune = prune;
            so.stop_at_goal = true;
            auto r = search(cp, make_configuration(cp, parse_valuation(init), split(stack, ',')), b, so);
            json j{{"reachable", r.witness.has_value()}, {"states", r.states}, {"pruned", r.pruned},
                   {"truncation", r.truncation.to_json()}};
            if (r.witness) j["witness"] = run_json(cp, *r.witness);
            verdict = r.witness ? Verdict::Verified : truncation_verdict(r.truncation);
            j["verdict"] = to_string(verdict);
            emit(g, j);
        };
    });

    // zcompute
    std::string Z;
    auto* zc_cmd = app.add_subcommand("zcompute", "unique Z-zeroing run from a configuration");
    zc_cmd->add_option("file", in)->required();
    zc_cmd->add_option("--init", init);
    zc_cmd->add_option("--stack", stack);
    zc_cmd->add_option("--Z", Z, "end counters");
    zc_cmd->callback([&] {
        action = [&] {
            Budget b = g.make_budget();
            Compiled cp = compile(load_program(in));
            auto r = z_compute(cp, make_configuration(cp, parse_valuation(init), split(stack, ',')), split(Z, ','), b);
            verdict = r.kind == ZComputeResult::Kind::Inconclusive ? Verdict::Inconclusive : Verdict::Verified;
            emit(g, r.to_json(cp));
        };
    });

    // amp
    unsigned d = 1;
    std::uint64_t A = 1, B = 1, B_max = 3;
    std::uint64_t enumerate_limit = 20000;
    auto* amp = app.add_subcommand("amp", "counter amplifiers P_d");
    amp->require_subcommand(1);
    auto* amp_show = amp->add_subcommand("show", "program, roles and counts");
    amp_show->add_option("--d", d)->check(CLI::Range(1u, 12u));
    amp_show->callback([&] {
        action = [&] {
            auto s = gen_Pd(d);
            json lib = json::object();
            for (const auto& [n, p] : s.library) lib[n] = pretty_print(p);
            emit(g, {{"name", s.name}, {"depth", s.depth}, {"lineage", s.lineage}, {"counters", s.counters()},
                     {"counter_count", s.counters().size()}, {"Z", s.Z}, {"instruction_count", s.instruction_count()},
                     {"program", pretty_print(s.program)}, {"library", lib}});
        };
    });
    auto* amp_verify = amp->add_subcommand("verify", "z_compute from T[A,B] against the contract");
    amp_verify->add_option("--d", d)->check(CLI::Range(1u, 12u));
    amp_verify->add_option("--A", A)->required();
    amp_verify->add_option("--B", B)->required();
    amp_verify->callback([&] {
        action = [&] {
            auto s = gen_Pd(d);
            auto r = verify_amplifier(s, {{A, B}}, g.make_budget());
            verdict = r.verdict;
            emit(g, r.to_json(s.compile()));
        };
    });
    auto* amp_lift = amp->add_subcommand("lift", "checkpoint trace and run classification of a lifted amplifier");
    amp_lift->add_option("--d", d)->check(CLI::Range(2u, 12u));
    amp_lift->add_option("--A", A)->required();
    amp_lift->add_option("--B", B)->required();
    amp_lift->add_option("--enumerate", enumerate_limit, "runs inspected for the bad-run claim");
    amp_lift->callback([&] {
        action = [&] {
            auto s = gen_Pd(d);
            Budget b = g.make_budget();
            auto trace = checkpoint_trace(s, A, B, b);
            auto claims = check_lift_claims(s, A, B, b, enumerate_limit);
            verdict = combine(trace.verdict, claims.verdict);
            emit(g, {{"checkpoints", trace.to_json()}, {"claims", claims.to_json()}, {"verdict", to_string(verdict)}});
        };
    });
    auto* amp_measure = amp->add_subcommand("measure", "measured function of P_d for B <= B_max");
    amp_measure->add_option("--d", d)->check(CLI::Range(1u, 12u));
    amp_measure->add_option("--B-max", B_max);
    amp_measure->callback([&] {
        action = [&] {
            auto m = measured_function(gen_Pd(d), B_max, powers_of_four, g.make_budget());
            json j = m.to_json();
            for (const auto& [b, e] : m.table)
                if (e.kind == MeasuredEntry::Kind::Inconclusive) verdict = combine(verdict, Verdict::Inconclusive);
            emit(g, j);
        };
    });

    // pvass
    std::uint64_t b_units = 2, c_symbols = 4;
    auto* pv = app.add_subcommand("pvass", "pushdown amplifiers Q_d");
    pv->require_subcommand(1);
    auto* pv_gen = pv->add_subcommand("gen", "generate Q_d");
    pv_gen->add_option("--d", d)->check(CLI::Range(1u, 12u));
    pv_gen->callback([&] { action = [&] { emit(g, gen_Qd(d).to_json()); }; });
    auto* pv_lines = pv->add_subcommand("lines", "line correspondence of Q_d to P_d");
    pv_lines->add_option("--d", d)->check(CLI::Range(1u, 12u));
    pv_lines->callback([&] {
        action = [&] {
            auto r = check_line_correspondence(gen_Qd(d));
            verdict = r.verdict;
            emit(g, r.to_json());
        };
    });
    auto* pv_sim = pv->add_subcommand("simulate", "simulation of P_d by Q_d from T[A,B]");
    pv_sim->add_option("--d", d)->check(CLI::Range(1u, 12u));
    pv_sim->add_option("--A", A)->required();
    pv_sim->add_option("--B", B)->required();
    pv_sim->callback([&] {
        action = [&] {
            auto q = gen_Qd(d);
            auto r = check_simulation(q, gen_Pd(d), {{A, B}}, g.make_budget());
            verdict = r.verdict;
            emit(g, r.to_json(q.compile()));
        };
    });
    auto* pv_shuffle = pv->add_subcommand("shuffle", "orderings produced by the interleaving block");
    pv_shuffle->add_option("--b", b_units);
    pv_shuffle->add_option("--c", c_symbols, "c' symbols, a multiple of 4");
    pv_shuffle->callback([&] {
        action = [&] {
            auto r = check_shuffle(b_units, c_symbols, g.make_budget());
            verdict = r.verdict;
            emit(g, r.to_json());
        };
    });

    // zeroelim
    std::uint64_t A_max = 0, max_sum = 6, max_b = 2;
    std::string target = "x";
    auto* ze = app.add_subcommand("zeroelim", "zero-test elimination");
    ze->require_subcommand(1);
    auto* ze_tr = ze->add_subcommand("transform", "print P' for a 2-counter program");
    ze_tr->add_option("--in", in)->required();
    ze_tr->callback([&] {
        action = [&] {
            Program p = load_program(in);
            Program pp = eliminate_zero_tests(p);
            write_text(g, pretty_print(pp));
        };
    });
    auto* ze_verify = ze->add_subcommand("verify", "P has a run with exactly B tests iff P' reaches the triple target");
    ze_verify->add_option("--in", in)->required();
    ze_verify->add_option("--B", B)->required();
    ze_verify->add_option("--A-max", A_max, "largest input scale tried; 0 derives it from the p witness");
    ze_verify->callback([&] {
        action = [&] {
            Program p = load_program(in);
            auto r = verify_zeroelim(p, B, A_max, g.make_budget());
            verdict = r.verdict;
            emit(g, r.to_json(compile(instrument_zero_tests(p, "zero_tests")), compile(eliminate_zero_tests(p))));
        };
    });
    auto* ze_gadget = ze->add_subcommand("gadget", "exhaustive check of the zero-test gadget");
    ze_gadget->add_option("--target", target, "x or y");
    ze_gadget->add_option("--sum", max_sum, "bound on a+x+y+t");
    ze_gadget->add_option("--b", max_b, "bound on b");
    ze_gadget->callback([&] {
        action = [&] {
            auto r = check_gadget_lemma(target, max_sum, max_b);
            verdict = r.verdict;
            emit(g, r.to_json());
        };
    });

    // reduce
    std::string mode = "vass";
    std::uint64_t n = 1;
    bool no_unroll = false, no_reuse = false, traces = false;
    auto* red = app.add_subcommand("reduce", "reduction instances P'' and Q''");
    red->require_subcommand(1);
    auto add_reduce_opts = [&](CLI::App* c) {
        c->add_option("--mode", mode, "vass or pvass");
        c->add_option("--n", n)->required();
        c->add_option("--d", d)->check(CLI::Range(1u, 12u));
        c->add_option("--in", in)->required();
        c->add_flag("--no-unroll", no_unroll, "keep the counter b'");
        c->add_flag("--no-reuse", no_reuse, "give P' its own counters");
    };
    auto* red_build = red->add_subcommand("build", "write the instance program");
    add_reduce_opts(red_build);
    red_build->callback([&] {
        action = [&] {
            auto o = reduction_options(mode, no_unroll, no_reuse);
            Program p = load_program(in);
            auto inst = o.target == ReductionOptions::Target::Pushdown ? build_Qpp(p, n, d) : build_Ppp(p, n, d, o);
            if (!g.out.empty()) {
                write_text(g, pretty_print(inst.program));
                Globals meta = g;
                meta.out.clear();
                emit(meta, inst.to_json());
            } else {
                emit(g, inst.to_json(true));
            }
        };
    });
    auto* red_verify = red->add_subcommand("verify", "decide both sides of the reduction");
    add_reduce_opts(red_verify);
    red_verify->add_option("--A-max", A_max, "largest prelude iteration count; 0 derives it");
    red_verify->add_flag("--traces", traces, "include witness runs");
    red_verify->callback([&] {
        action = [&] {
            auto o = reduction_options(mode, no_unroll, no_reuse);
            auto r = verify_reduction(load_program(in), n, d, g.make_budget(), o, A_max);
            verdict = r.verdict;
            emit(g, r.to_json(traces));
        };
    });

    // hierarchy
    unsigned i_level = 0;
    std::string n_text = "1";
    auto* hier = app.add_subcommand("hierarchy", "fast-growing functions");
    hier->require_subcommand(1);
    auto* hier_f = hier->add_subcommand("F", "evaluate F_i(n) literally");
    hier_f->add_option("--i", i_level);
    hier_f->add_option("--n", n_text);
    hier_f->callback([&] {
        action = [&] {
            BigNat v = F(i_level, BigNat(n_text));
            json j{{"i", i_level}, {"n", n_text}, {"value", v.str()}};
            if (literally_degenerate(i_level)) j["note"] = degeneracy_note();
            emit(g, j);
        };
    });
    auto* hier_table = hier->add_subcommand("table", "F_i(n) for i <= i_max, n <= n_max");
    unsigned i_max = 3;
    std::uint64_t n_max = 4;
    hier_table->add_option("--i-max", i_max);
    hier_table->add_option("--n-max", n_max);
    hier_table->callback([&] {
        action = [&] {
            json rows = json::array();
            for (unsigned i = 0; i <= i_max; ++i) {
                json row = json::array();
                for (std::uint64_t k = 1; k <= n_max; ++k) row.push_back(F(i, BigNat(k)).str());
                rows.push_back({{"i", i}, {"values", row}});
            }
            emit(g, {{"n_from", 1}, {"rows", rows}, {"note", degeneracy_note()}});
        };
    });

    // oracle
    std::string from, to;
    std::uint64_t count = 100, seed = 1;
    bool corrupt = false;
    auto* orc = app.add_subcommand("oracle", "independent interpreter");
    orc->require_subcommand(1);
    auto* orc_reach = orc->add_subcommand("reach", "DFS reachability between two valuations, ending at halt");
    orc_reach->add_option("file", in)->required();
    orc_reach->add_option("--from", from);
    orc_reach->add_option("--to", to);
    orc_reach->callback([&] {
        action = [&] {
            Program p = load_program(in);
            Compiled cp = compile(p);
            auto src = oracle::from_engine(cp, make_configuration(cp, parse_valuation(from)));
            auto dst = oracle::from_engine(cp, make_configuration(cp, parse_valuation(to), {}, cp.halt()));
            auto r = oracle::reach_oracle(p, src, dst, g.make_budget());
            json j = r.to_json();
            if (r.kind == oracle::OracleVerdict::Kind::Reachable) j["replays"] = oracle::replay(cp, r.witness);
            verdict = r.kind == oracle::OracleVerdict::Kind::Unknown ? Verdict::Inconclusive : Verdict::Verified;
            emit(g, j);
        };
    });
    auto* orc_diff = orc->add_subcommand("diff", "differential check against the main engine");
    oracle::ShapeLimits shape;
    orc_diff->add_option("--count", count);
    orc_diff->add_option("--seed", seed, "first seed");
    orc_diff->add_option("--max-lines", shape.max_lines);
    orc_diff->add_option("--max-counters", shape.max_counters);
    orc_diff->add_option("--max-value", shape.max_value);
    orc_diff->add_flag("--corrupt-engine", corrupt, "harness self-test");
    orc_diff->callback([&] {
        action = [&] {
            oracle::DifferentialOptions o;
            o.first_seed = seed;
            o.workers = g.workers;
            o.corrupt_engine = corrupt;
            Budget b = g.make_budget();
            if (g.budget.empty() && !std::getenv("VASSFORGE_BUDGET")) {
                b.max_counter_value = 16;
                b.max_steps = 200;
            }
            auto r = oracle::differential_check(count, shape, b, o);
            verdict = !r.divergences.empty() || !r.workers_deterministic ? Verdict::Falsified : Verdict::Verified;
            json j = r.to_json();
            j["verdict"] = to_string(verdict);
            emit(g, j);
        };
    });

    // export
    std::string format = "vass";
    std::uint64_t box = 2;
    auto* ex = app.add_subcommand("export", "VASS/PVASS export, import and DOT");
    ex->require_subcommand(1);
    auto* ex_to = ex->add_subcommand("to", "export a zero-test-free program");
    ex_to->add_option("file", in)->required();
    ex_to->add_option("--format", format, "vass, pvass or dot");
    ex_to->callback([&] {
        action = [&] {
            if (format != "vass" && format != "pvass" && format != "dot") throw ProgramError("unknown format " + format);
            auto v = export_vass(load_program(in), {}, format != "vass");
            if (format == "dot") write_text(g, v.to_dot());
            else emit(g, v.to_json());
        };
    });
    auto* ex_from = ex->add_subcommand("import", "program from an exported .vass.json");
    ex_from->add_option("file", in)->required();
    ex_from->callback([&] {
        action = [&] { write_text(g, pretty_print(import_vass(ExportedVASS::from_json(json::parse(read_file(in)))))); };
    });
    auto* ex_rt = ex->add_subcommand("roundtrip", "compare halting valuations before and after export/import");
    ex_rt->add_option("file", in)->required();
    ex_rt->add_option("--box", box, "start valuations range over [0, box]");
    ex_rt->callback([&] {
        action = [&] {
            Budget b = g.make_budget();
            if (g.budget.empty() && !std::getenv("VASSFORGE_BUDGET")) b.max_counter_value = 2 * box + 4;
            auto r = check_round_trip(load_program(in), box, b);
            verdict = r.verdict;
            emit(g, r.to_json());
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    try {
        if (action) action();
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return exit_code(verdict);
}
