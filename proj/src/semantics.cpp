#include "vassforge/semantics.hpp"

#include "vassforge/relax.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <unordered_map>

namespace vassforge {

// ---------------------------------------------------------------------------
// Compilation and value conversions

std::size_t Compiled::counter_index(const std::string& name) const {
    auto it = std::find(counters.begin(), counters.end(), name);
    if (it == counters.end()) throw ProgramError("unknown counter '" + name + "'");
    return static_cast<std::size_t>(it - counters.begin());
}

std::size_t Compiled::symbol_index(const std::string& name) const {
    auto it = std::find(alphabet.begin(), alphabet.end(), name);
    if (it == alphabet.end()) throw ProgramError("unknown stack symbol '" + name + "'");
    return static_cast<std::size_t>(it - alphabet.begin());
}

Compiled compile(const Program& p, const Library& lib) {
    Compiled cp;
    FlatProgram f = desugar_with_layout(p, lib);
    cp.source = std::move(f.program);
    cp.layout = std::move(f.layout);
    cp.counters = cp.source.counters;
    cp.alphabet = cp.source.alphabet;
    LineNo halt = static_cast<LineNo>(cp.source.body.size() + 1);
    for (const auto& s : cp.source.body) {
        const auto& line = std::get<Line>(s.node);
        CompiledLine cl;
        for (const auto& c : line.commands) {
            if (auto* g = std::get_if<Goto>(&c)) {
                if (g->first < 1 || g->first > halt || g->second < 1 || g->second > halt)
                    throw ProgramError("goto target outside [1, " + std::to_string(halt) + "]");
                cl.is_goto = true;
                cl.t1 = g->first;
                cl.t2 = g->second;
            } else if (auto* x = std::get_if<Inc>(&c)) {
                cl.atoms.push_back({CompiledAtom::Inc, static_cast<std::uint32_t>(cp.counter_index(x->counter))});
            } else if (auto* x = std::get_if<Dec>(&c)) {
                cl.atoms.push_back({CompiledAtom::Dec, static_cast<std::uint32_t>(cp.counter_index(x->counter))});
            } else if (auto* x = std::get_if<ZeroTest>(&c)) {
                cl.atoms.push_back({CompiledAtom::Zero, static_cast<std::uint32_t>(cp.counter_index(x->counter))});
            } else if (auto* x = std::get_if<Push>(&c)) {
                cl.atoms.push_back({CompiledAtom::Push, static_cast<std::uint32_t>(cp.symbol_index(x->symbol))});
            } else if (auto* x = std::get_if<Pop>(&c)) {
                cl.atoms.push_back({CompiledAtom::Pop, static_cast<std::uint32_t>(cp.symbol_index(x->symbol))});
            }
        }
        cp.lines.push_back(std::move(cl));
    }
    return cp;
}

Configuration make_configuration(const Compiled& cp, const Valuation& v, const std::vector<std::string>& stack,
                                 LineNo pc) {
    Configuration c;
    c.pc = pc;
    c.values.assign(cp.counters.size(), 0);
    for (const auto& [name, value] : v) c.values[cp.counter_index(name)] = value;
    for (const auto& s : stack) c.stack.push_back(static_cast<std::uint32_t>(cp.symbol_index(s)));
    return c;
}

Valuation valuation_of(const Compiled& cp, const Configuration& c) {
    Valuation v;
    for (std::size_t i = 0; i < cp.counters.size(); ++i) v[cp.counters[i]] = c.values[i];
    return v;
}

std::string stack_word(const Compiled& cp, const Configuration& c) {
    std::string w;
    for (auto s : c.stack) w += cp.alphabet[s];
    return w;
}

// ---------------------------------------------------------------------------
// Budget

void Budget::validate() const {
    if (max_steps == 0 || max_counter_value == 0 || max_stack_height == 0 || max_enumerated_runs == 0 ||
        max_states == 0)
        throw ProgramError("budget limits must be positive");
    if (max_counter_value >= 0xffffffffu) throw ProgramError("max_counter_value must be below 2^32-1");
}

nlohmann::json Budget::to_json() const {
    return {{"max_steps", max_steps},
            {"max_counter_value", max_counter_value},
            {"max_stack_height", max_stack_height},
            {"max_enumerated_runs", max_enumerated_runs},
            {"max_states", max_states},
            {"workers", workers}};
}

Budget Budget::from_json(const nlohmann::json& j, Budget b) {
    b.max_steps = j.value("max_steps", b.max_steps);
    b.max_counter_value = j.value("max_counter_value", b.max_counter_value);
    b.max_stack_height = j.value("max_stack_height", b.max_stack_height);
    b.max_enumerated_runs = j.value("max_enumerated_runs", b.max_enumerated_runs);
    b.max_states = j.value("max_states", b.max_states);
    b.workers = std::max(1u, j.value("workers", b.workers));
    return b;
}

Budget Budget::from_env(Budget base) {
    const char* env = std::getenv("VASSFORGE_BUDGET");
    if (!env || !*env) return base;
    return from_json(nlohmann::json::parse(env), base);
}

nlohmann::json Truncation::to_json() const {
    return {{"fired", fired()}, {"limits", limits}, {"cut_states", cut_states}};
}

// ---------------------------------------------------------------------------
// Value-level step

StepResult step(const Compiled& cp, const Configuration& c, const Budget& b) {
    StepResult r;
    if (c.pc < 1 || c.pc > cp.lines.size()) return r;
    const CompiledLine& line = cp.lines[c.pc - 1];
    if (line.is_goto) {
        Configuration n = c;
        n.pc = line.t1;
        r.successors.push_back(n);
        if (line.t2 != line.t1) {
            n.pc = line.t2;
            r.successors.push_back(std::move(n));
        }
        return r;
    }
    Configuration n = c;
    for (const auto& a : line.atoms) {
        switch (a.op) {
        case CompiledAtom::Inc:
            if (n.values[a.index] + 1 > b.max_counter_value) {
                r.truncated = true;
                return r;
            }
            ++n.values[a.index];
            break;
        case CompiledAtom::Dec:
            if (n.values[a.index] == 0) return r;
            --n.values[a.index];
            break;
        case CompiledAtom::Zero:
            if (n.values[a.index] != 0) return r;
            break;
        case CompiledAtom::Push:
            if (n.stack.size() + 1 > b.max_stack_height) {
                r.truncated = true;
                return r;
            }
            n.stack.push_back(a.index);
            break;
        case CompiledAtom::Pop:
            if (n.stack.empty() || n.stack.back() != a.index) return r;
            n.stack.pop_back();
            break;
        }
    }
    ++n.pc;
    r.successors.push_back(std::move(n));
    return r;
}

// ---------------------------------------------------------------------------
// Run annotation

bool RunAnnotations::all_flat_loops_maximal() const {
    return std::all_of(loops.begin(), loops.end(), [](const LoopVisit& v) { return !v.flat || v.maximal.value_or(false); });
}

nlohmann::json RunAnnotations::to_json() const {
    nlohmann::json lj = nlohmann::json::array(), cj = nlohmann::json::array();
    for (const auto& l : loops) {
        nlohmann::json o{{"entry", l.entry}, {"begin", l.begin}, {"end", l.end}, {"iterations", l.iterations},
                         {"flat", l.flat}};
        o["maximal"] = l.maximal ? nlohmann::json(*l.maximal) : nlohmann::json(nullptr);
        lj.push_back(o);
    }
    for (const auto& c : calls) {
        nlohmann::json o{{"name", c.name}, {"depth", c.depth}, {"begin", c.begin}, {"end", c.end},
                         {"finished", c.finished}};
        o["zeroing"] = c.zeroing ? nlohmann::json(*c.zeroing) : nlohmann::json(nullptr);
        cj.push_back(o);
    }
    return {{"loops", lj}, {"calls", cj}};
}

RunAnnotations classify_run(const Compiled& cp, const Run& r,
                            const std::map<std::string, std::vector<std::string>>& call_end_sets) {
    RunAnnotations out;
    const auto& cfg = r.configs;
    std::vector<LoopInfo> loops = cp.layout.loops.empty() ? detect_loops(cp.source) : cp.layout.loops;
    for (const auto& L : loops) {
        std::vector<std::uint32_t> decremented;
        for (LineNo l = L.entry + 1; l < L.back; ++l)
            for (const auto& a : cp.lines[l - 1].atoms)
                if (a.op == CompiledAtom::Dec) decremented.push_back(a.index);
        std::optional<LoopVisit> open;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            if (cfg[i].pc != L.entry) continue;
            if (!open) {
                open = LoopVisit{};
                open->entry = L.entry;
                open->begin = i;
                open->flat = L.flat;
            }
            if (i + 1 >= cfg.size()) break;
            if (cfg[i + 1].pc == L.entry + 1) {
                ++open->iterations;
            } else {
                open->end = i + 1;
                if (L.flat) {
                    bool m = std::any_of(decremented.begin(), decremented.end(),
                                         [&](std::uint32_t d) { return cfg[i + 1].values[d] == 0; });
                    open->maximal = m;
                }
                out.loops.push_back(*open);
                open.reset();
            }
        }
        if (open) {
            open->end = cfg.size() - 1;
            out.loops.push_back(*open);
        }
    }
    std::sort(out.loops.begin(), out.loops.end(),
              [](const LoopVisit& a, const LoopVisit& b) { return std::tie(a.begin, a.entry) < std::tie(b.begin, b.entry); });

    for (const auto& C : cp.layout.calls) {
        std::optional<CallVisit> open;
        auto inside = [&](LineNo pc) { return pc >= C.begin && pc < C.end; };
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            bool in = inside(cfg[i].pc);
            if (in && !open) {
                open = CallVisit{C.name, C.depth, i, i, false, std::nullopt};
            } else if (!in && open) {
                open->end = i;
                open->finished = cfg[i].pc == C.end;
                if (auto it = call_end_sets.find(C.name); it != call_end_sets.end() && open->finished) {
                    bool z = true;
                    for (const auto& name : it->second) z = z && cfg[i].values[cp.counter_index(name)] == 0;
                    open->zeroing = z;
                }
                out.calls.push_back(*open);
                open.reset();
            }
        }
        if (open) {
            open->end = cfg.size() - 1;
            out.calls.push_back(*open);
        }
    }
    std::sort(out.calls.begin(), out.calls.end(),
              [](const CallVisit& a, const CallVisit& b) { return std::tie(a.begin, a.depth) < std::tie(b.begin, b.depth); });
    return out;
}

// ---------------------------------------------------------------------------
// Run enumeration

EnumerationReport enumerate_runs(const Compiled& cp, const Configuration& init, const Budget& b,
                                 const std::function<bool(const Run&)>& on_run) {
    b.validate();
    EnumerationReport rep;
    struct Frame {
        Configuration c;
        std::vector<Configuration> succ;
        std::size_t next = 0;
    };
    std::vector<Frame> path;
    auto emit = [&](Run::End end) {
        Run r;
        r.end = end;
        for (const auto& f : path) r.configs.push_back(f.c);
        ++rep.runs;
        bool go = on_run(r);
        if (rep.runs >= b.max_enumerated_runs) {
            rep.truncation.hit("max_enumerated_runs");
            return false;
        }
        return go;
    };
    auto open = [&](Configuration c) -> std::optional<Run::End> {
        path.push_back({std::move(c), {}, 0});
        Frame& f = path.back();
        if (f.c.pc == cp.halt()) return Run::End::Complete;
        if (path.size() > b.max_steps) {
            rep.truncation.hit("max_steps");
            return Run::End::Truncated;
        }
        StepResult s = step(cp, f.c, b);
        if (s.truncated) {
            rep.truncation.hit("max_counter_value");
            return Run::End::Truncated;
        }
        if (s.successors.empty()) return Run::End::Blocked;
        f.succ = std::move(s.successors);
        return std::nullopt;
    };
    if (auto end = open(init)) {
        emit(*end);
        return rep;
    }
    while (!path.empty()) {
        Frame& f = path.back();
        if (f.next == f.succ.size()) {
            path.pop_back();
            continue;
        }
        Configuration c = f.succ[f.next++];
        if (auto end = open(std::move(c))) {
            if (!emit(*end)) return rep;
            path.pop_back();
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Goals

bool Goal::matches(const Configuration& c) const {
    for (auto z : zero)
        if (c.values[z] != 0) return false;
    for (auto [i, v] : exact)
        if (c.values[i] != v) return false;
    return !empty_stack || c.stack.empty();
}

Goal goal_zeroing(const Compiled& cp, const std::vector<std::string>& names, bool empty_stack) {
    Goal g;
    for (const auto& n : names) g.zero.push_back(static_cast<std::uint32_t>(cp.counter_index(n)));
    g.empty_stack = empty_stack;
    return g;
}

Goal goal_all_but(const Compiled& cp, const std::vector<std::string>& keep, bool empty_stack) {
    Goal g;
    for (std::size_t i = 0; i < cp.counters.size(); ++i)
        if (std::find(keep.begin(), keep.end(), cp.counters[i]) == keep.end()) g.zero.push_back(static_cast<std::uint32_t>(i));
    g.empty_stack = empty_stack;
    return g;
}

// ---------------------------------------------------------------------------
// Packed state space

namespace {

// Stacks are interned as paths in a trie; node 0 is the empty stack.
class StackTrie {
  public:
    StackTrie() { nodes_.push_back({0, 0, 0}); }

    std::uint32_t child(std::uint32_t parent, std::uint32_t symbol) {
        std::uint64_t key = (static_cast<std::uint64_t>(parent) << 20) | symbol;
        {
            std::shared_lock lk(mu_);
            if (auto it = index_.find(key); it != index_.end()) return it->second;
        }
        std::unique_lock lk(mu_);
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({parent, symbol, nodes_[parent].depth + 1});
        index_.emplace(key, id);
        return id;
    }
    struct Node {
        std::uint32_t parent, symbol, depth;
    };
    Node node(std::uint32_t id) const {
        std::shared_lock lk(mu_);
        return nodes_[id];
    }
    std::vector<std::uint32_t> word(std::uint32_t id) const {
        std::vector<std::uint32_t> w;
        std::shared_lock lk(mu_);
        while (id != 0) {
            w.push_back(nodes_[id].symbol);
            id = nodes_[id].parent;
        }
        std::reverse(w.begin(), w.end());
        return w;
    }
    std::uint32_t intern(const std::vector<std::uint32_t>& w) {
        std::uint32_t id = 0;
        for (auto s : w) id = child(id, s);
        return id;
    }

  private:
    mutable std::shared_mutex mu_;
    std::vector<Node> nodes_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

// Open-addressing set of fixed-width word tuples.
class StateTable {
  public:
    explicit StateTable(std::size_t width) : width_(width) { slots_.assign(1024, 0); }

    std::size_t size() const { return count_; }
    const std::uint32_t* get(std::uint32_t id) const { return arena_.data() + static_cast<std::size_t>(id) * width_; }

    std::pair<std::uint32_t, bool> insert(const std::uint32_t* w) {
        if ((count_ + 1) * 4 > slots_.size() * 3) grow();
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash(w) & mask;
        for (;;) {
            std::uint32_t s = slots_[h];
            if (s == 0) {
                auto id = static_cast<std::uint32_t>(count_++);
                arena_.insert(arena_.end(), w, w + width_);
                slots_[h] = id + 1;
                return {id, true};
            }
            if (std::memcmp(get(s - 1), w, width_ * sizeof(std::uint32_t)) == 0) return {s - 1, false};
            h = (h + 1) & mask;
        }
    }

    std::optional<std::uint32_t> find(const std::uint32_t* w) const {
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash(w) & mask;
        for (;;) {
            std::uint32_t s = slots_[h];
            if (s == 0) return std::nullopt;
            if (std::memcmp(get(s - 1), w, width_ * sizeof(std::uint32_t)) == 0) return s - 1;
            h = (h + 1) & mask;
        }
    }

  private:
    std::size_t hash(const std::uint32_t* w) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::size_t i = 0; i < width_; ++i) {
            h ^= w[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 0xbf58476d1ce4e5b9ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
    void grow() {
        std::vector<std::uint32_t> old(slots_.size() * 2, 0);
        old.swap(slots_);
        std::size_t mask = slots_.size() - 1;
        for (std::size_t id = 0; id < count_; ++id) {
            std::size_t h = hash(get(static_cast<std::uint32_t>(id))) & mask;
            while (slots_[h] != 0) h = (h + 1) & mask;
            slots_[h] = static_cast<std::uint32_t>(id + 1);
        }
    }

    std::size_t width_;
    std::size_t count_ = 0;
    std::vector<std::uint32_t> arena_;
    std::vector<std::uint32_t> slots_;
};

enum class Expansion { Ok, Truncated };

class Packed {
  public:
    Packed(const Compiled& cp, const Budget& b)
        : cp_(cp), b_(b), n_(cp.counters.size()), width_(1 + n_ + (cp.has_stack() ? 1 : 0)) {}

    std::size_t width() const { return width_; }

    std::vector<std::uint32_t> pack(const Configuration& c) {
        std::vector<std::uint32_t> w(width_);
        w[0] = c.pc;
        for (std::size_t i = 0; i < n_; ++i) {
            if (c.values[i] > b_.max_counter_value) throw ProgramError("initial configuration exceeds the counter cap");
            w[1 + i] = static_cast<std::uint32_t>(c.values[i]);
        }
        if (cp_.has_stack()) {
            if (c.stack.size() > b_.max_stack_height) throw ProgramError("initial stack exceeds the height cap");
            w[1 + n_] = trie_.intern(c.stack);
        } else if (!c.stack.empty()) {
            throw ProgramError("stack given for a program without stack alphabet");
        }
        return w;
    }

    Configuration unpack(const std::uint32_t* w) const {
        Configuration c;
        c.pc = w[0];
        c.values.assign(w + 1, w + 1 + n_);
        if (cp_.has_stack()) c.stack = trie_.word(w[1 + n_]);
        return c;
    }

    // Appends successor tuples to out.
    Expansion expand(const std::uint32_t* s, std::vector<std::uint32_t>& out) {
        LineNo pc = s[0];
        const CompiledLine& line = cp_.lines[pc - 1];
        std::size_t base = out.size();
        out.insert(out.end(), s, s + width_);
        if (line.is_goto) {
            out[base] = line.t1;
            if (line.t2 != line.t1) {
                out.insert(out.end(), s, s + width_);
                out[base + width_] = line.t2;
            }
            return Expansion::Ok;
        }
        std::uint32_t* w = out.data() + base;
        for (const auto& a : line.atoms) {
            switch (a.op) {
            case CompiledAtom::Inc:
                if (w[1 + a.index] + 1ull > b_.max_counter_value) {
                    out.resize(base);
                    return Expansion::Truncated;
                }
                ++w[1 + a.index];
                break;
            case CompiledAtom::Dec:
                if (w[1 + a.index] == 0) {
                    out.resize(base);
                    return Expansion::Ok;
                }
                --w[1 + a.index];
                break;
            case CompiledAtom::Zero:
                if (w[1 + a.index] != 0) {
                    out.resize(base);
                    return Expansion::Ok;
                }
                break;
            case CompiledAtom::Push: {
                std::uint32_t node = w[1 + n_];
                if (trie_.node(node).depth + 1ull > b_.max_stack_height) {
                    out.resize(base);
                    return Expansion::Truncated;
                }
                w[1 + n_] = trie_.child(node, a.index);
                break;
            }
            case CompiledAtom::Pop: {
                std::uint32_t node = w[1 + n_];
                auto nd = trie_.node(node);
                if (node == 0 || nd.symbol != a.index) {
                    out.resize(base);
                    return Expansion::Ok;
                }
                w[1 + n_] = nd.parent;
                break;
            }
            }
        }
        ++w[0];
        return Expansion::Ok;
    }

    bool goal(const Goal& g, const std::uint32_t* s) const {
        for (auto z : g.zero)
            if (s[1 + z] != 0) return false;
        for (auto [i, v] : g.exact)
            if (s[1 + i] != v) return false;
        return !g.empty_stack || !cp_.has_stack() || s[1 + n_] == 0;
    }

    // Counter values as 64-bit for the pruner.
    void values(const std::uint32_t* s, std::vector<std::uint64_t>& v) const {
        v.assign(s + 1, s + 1 + n_);
    }

  private:
    const Compiled& cp_;
    const Budget& b_;
    std::size_t n_, width_;
    StackTrie trie_;
};

Run run_from_ids(const std::vector<std::uint32_t>& ids, const StateTable& table, const Packed& pk, Run::End end) {
    Run r;
    r.end = end;
    for (auto id : ids) r.configs.push_back(pk.unpack(table.get(id)));
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Breadth-first reachability

SearchResult search(const Compiled& cp, const Configuration& init, const Budget& b, const SearchOptions& opt) {
    b.validate();
    SearchResult res;
    Packed pk(cp, b);
    StateTable table(pk.width());
    std::vector<std::uint32_t> parent;
    std::optional<RelaxationPruner> pruner;
    if (opt.prune && opt.goal) pruner.emplace(cp, *opt.goal);
    const std::size_t W = pk.width();

    auto w0 = pk.pack(init);
    table.insert(w0.data());
    parent.push_back(UINT32_MAX);
    std::vector<std::uint32_t> frontier{0}, next;
    std::vector<std::uint32_t> goal_ids;
    unsigned workers = std::max(1u, opt.workers ? opt.workers : b.workers);

    struct Out {
        std::vector<std::uint32_t> succ;          // packed successors
        std::vector<std::uint32_t> owner;         // index into frontier, one per successor
        std::vector<std::uint8_t> status;         // per frontier entry: 0 ok, 1 truncated, 2 pruned, 3 scope, 4 final
    };

    std::uint64_t depth = 0;
    bool stop = false;
    while (!frontier.empty() && !stop) {
        if (depth > b.max_steps) {
            res.truncation.hit("max_steps");
            break;
        }
        ++depth;
        std::size_t F = frontier.size();
        unsigned nw = static_cast<unsigned>(std::min<std::size_t>(workers, (F + 255) / 256));
        nw = std::max(1u, nw);
        std::vector<Out> outs(nw);
        auto work = [&](unsigned w) {
            std::size_t lo = F * w / nw, hi = F * (w + 1) / nw;
            Out& o = outs[w];
            o.status.assign(hi - lo, 0);
            std::vector<std::uint64_t> vals;
            for (std::size_t k = lo; k < hi; ++k) {
                const std::uint32_t* s = table.get(frontier[k]);
                if (s[0] == cp.halt()) {
                    o.status[k - lo] = 4;
                    continue;
                }
                if (opt.in_scope && !opt.in_scope(pk.unpack(s))) {
                    o.status[k - lo] = 3;
                    continue;
                }
                if (pruner && cp.lines[s[0] - 1].is_goto) {
                    pk.values(s, vals);
                    if (!pruner->may_reach(s[0], vals.data())) {
                        o.status[k - lo] = 2;
                        continue;
                    }
                }
                std::size_t before = o.succ.size();
                if (pk.expand(s, o.succ) == Expansion::Truncated) {
                    bool relevant = true;
                    if (pruner) {
                        pk.values(s, vals);
                        relevant = pruner->may_reach(s[0], vals.data());
                    }
                    o.status[k - lo] = relevant ? 1 : 2;
                }
                for (std::size_t q = before; q < o.succ.size(); q += W) o.owner.push_back(static_cast<std::uint32_t>(k));
            }
        };
        if (nw == 1) {
            work(0);
        } else {
            std::vector<std::thread> ts;
            for (unsigned w = 0; w < nw; ++w) ts.emplace_back(work, w);
            for (auto& t : ts) t.join();
        }
        next.clear();
        for (unsigned w = 0; w < nw && !stop; ++w) {
            std::size_t lo = F * w / nw;
            for (std::size_t k = 0; k < outs[w].status.size(); ++k) {
                std::uint32_t id = frontier[lo + k];
                switch (outs[w].status[k]) {
                case 1: res.truncation.hit("max_counter_value_or_stack_height"); break;
                case 2: ++res.pruned; break;
                case 3: ++res.scope_cuts; break;
                case 4: {
                    const std::uint32_t* s = table.get(id);
                    if (!opt.goal || pk.goal(*opt.goal, s)) {
                        goal_ids.push_back(id);
                        if (opt.stop_at_goal) stop = true;
                    }
                    break;
                }
                default: break;
                }
                if (stop) break;
            }
            const auto& o = outs[w];
            for (std::size_t q = 0; q < o.owner.size() && !stop; ++q) {
                auto [id, fresh] = table.insert(o.succ.data() + q * W);
                if (!fresh) continue;
                parent.push_back(frontier[o.owner[q]]);
                next.push_back(id);
                if (table.size() > b.max_states) {
                    res.truncation.hit("max_states");
                    stop = true;
                }
            }
        }
        frontier.swap(next);
    }
    res.states = table.size();
    for (auto id : goal_ids) res.finals.push_back(pk.unpack(table.get(id)));
    std::sort(res.finals.begin(), res.finals.end());
    if (!goal_ids.empty()) {
        std::vector<std::uint32_t> ids;
        for (std::uint32_t id = goal_ids.front(); id != UINT32_MAX; id = parent[id]) ids.push_back(id);
        std::reverse(ids.begin(), ids.end());
        res.witness = run_from_ids(ids, table, pk, Run::End::Complete);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Z-compute: DFS counting line sequences to Z-zeroing finals

std::string to_string(ZComputeResult::Kind k) {
    switch (k) {
    case ZComputeResult::Kind::UniqueRun: return "UniqueRun";
    case ZComputeResult::Kind::Nothing: return "Nothing";
    case ZComputeResult::Kind::Multiple: return "Multiple";
    case ZComputeResult::Kind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

ZComputeResult z_compute(const Compiled& cp, const Configuration& init, const std::vector<std::string>& Z,
                         const Budget& b, const ZComputeOptions& opt) {
    b.validate();
    ZComputeResult res;
    Goal goal = goal_zeroing(cp, Z);
    Packed pk(cp, b);
    StateTable table(pk.width());
    std::optional<RelaxationPruner> pruner;
    if (opt.prune) pruner.emplace(cp, goal);
    const std::size_t W = pk.width();
    constexpr std::uint64_t kSat = UINT64_MAX;

    std::vector<std::uint64_t> count, height;
    std::vector<std::uint8_t> color;  // 0 new, 1 on stack, 2 done
    std::vector<std::uint32_t> back_targets;
    std::vector<std::uint32_t> goal_ids;
    std::uint64_t scope_cuts = 0;

    auto add_state = [&](const std::uint32_t* w) {
        auto r = table.insert(w);
        if (r.second) {
            count.push_back(0);
            height.push_back(0);
            color.push_back(0);
        }
        return r.first;
    };

    struct Frame {
        std::uint32_t id;
        std::vector<std::uint32_t> succ;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    std::vector<std::uint32_t> buf;
    std::vector<std::uint64_t> vals;

    // Opens a state; returns true when it needs its successors explored.
    auto open = [&](std::uint32_t id) -> bool {
        color[id] = 1;
        const std::uint32_t* s = table.get(id);
        if (s[0] == cp.halt()) {
            if (pk.goal(goal, s)) {
                count[id] = 1;
                goal_ids.push_back(id);
            }
            color[id] = 2;
            return false;
        }
        if (opt.in_scope && !opt.in_scope(pk.unpack(s))) {
            ++scope_cuts;
            color[id] = 2;
            return false;
        }
        if (pruner && cp.lines[s[0] - 1].is_goto) {
            pk.values(s, vals);
            if (!pruner->may_reach(s[0], vals.data())) {
                ++res.pruned;
                color[id] = 2;
                return false;
            }
        }
        buf.clear();
        Expansion e = pk.expand(s, buf);
        Frame f{id, {}, 0};
        if (e == Expansion::Truncated) {
            bool relevant = true;
            if (pruner) {
                pk.values(table.get(id), vals);
                relevant = pruner->may_reach(s[0], vals.data());
            }
            if (relevant) res.truncation.hit("max_counter_value_or_stack_height");
            else ++res.pruned;
        }
        std::vector<std::uint32_t> local(buf);
        for (std::size_t q = 0; q < local.size(); q += W) f.succ.push_back(add_state(local.data() + q));
        if (table.size() > b.max_states) res.truncation.hit("max_states");
        stack.push_back(std::move(f));
        return true;
    };

    std::uint32_t root = add_state(pk.pack(init).data());
    open(root);
    while (!stack.empty() && !res.truncation.limits.count("max_states")) {
        Frame& f = stack.back();
        if (f.next < f.succ.size()) {
            std::uint32_t c = f.succ[f.next++];
            if (color[c] == 1) back_targets.push_back(c);
            else if (color[c] == 0) open(c);
            continue;
        }
        std::uint64_t total = 0, h = 0;
        bool reaches = false;
        for (auto c : f.succ) {
            if (color[c] != 2) continue;  // back edge
            if (count[c] == 0) continue;
            reaches = true;
            total = (total > kSat - count[c]) ? kSat : total + count[c];
            h = std::max(h, height[c] + 1);
        }
        // A state repeated along a successor list (duplicate goto targets are already merged).
        count[f.id] = total;
        height[f.id] = reaches ? h : 0;
        color[f.id] = 2;
        stack.pop_back();
    }

    res.states = table.size();
    for (auto t : back_targets)
        if (count[t] > 0) {
            res.truncation.hit("max_steps");
            res.detail = "a cycle can reach a Z-zeroing final: runs of unbounded length";
            break;
        }
    res.longest_run = height[root];
    if (count[root] > 0 && height[root] > b.max_steps) res.truncation.hit("max_steps");
    res.run_count = count[root];
    res.run_count_saturated = count[root] == kSat;
    std::vector<std::uint32_t> reachable_goals;
    for (auto id : goal_ids)
        if (count[id] > 0) reachable_goals.push_back(id);
    for (auto id : reachable_goals) res.finals.push_back(pk.unpack(table.get(id)));
    std::sort(res.finals.begin(), res.finals.end());
    if (scope_cuts) res.detail += (res.detail.empty() ? "" : "; ") + std::to_string(scope_cuts) + " states outside scope";

    if (res.truncation.fired()) {
        res.kind = ZComputeResult::Kind::Inconclusive;
    } else if (res.run_count == 0) {
        res.kind = ZComputeResult::Kind::Nothing;
    } else if (res.run_count == 1) {
        res.kind = ZComputeResult::Kind::UniqueRun;
        std::vector<std::uint32_t> ids{root};
        std::uint32_t cur = root;
        while (table.get(cur)[0] != cp.halt()) {
            buf.clear();
            pk.expand(table.get(cur), buf);
            std::vector<std::uint32_t> local(buf);
            std::optional<std::uint32_t> nxt;
            for (std::size_t q = 0; q < local.size(); q += W) {
                auto id = table.find(local.data() + q);
                if (id && count[*id] > 0) nxt = *id;
            }
            cur = *nxt;
            ids.push_back(cur);
        }
        res.run = run_from_ids(ids, table, pk, Run::End::Complete);
    } else {
        res.kind = ZComputeResult::Kind::Multiple;
    }
    return res;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json configuration_json(const Compiled& cp, const Configuration& c) {
    nlohmann::json v = nlohmann::json::object();
    for (std::size_t i = 0; i < cp.counters.size(); ++i) v[cp.counters[i]] = c.values[i];
    nlohmann::json st = nlohmann::json::array();
    for (auto s : c.stack) st.push_back(cp.alphabet[s]);
    return {{"pc", c.pc}, {"valuation", v}, {"stack", st}};
}

nlohmann::json run_json(const Compiled& cp, const Run& r) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& c : r.configs) steps.push_back(configuration_json(cp, c));
    const char* end = r.end == Run::End::Complete ? "complete" : r.end == Run::End::Blocked ? "blocked" : "truncated";
    return {{"format_version", kFormatVersion}, {"end", end}, {"steps", steps}};
}

nlohmann::json ZComputeResult::to_json(const Compiled& cp) const {
    nlohmann::json fj = nlohmann::json::array();
    for (const auto& f : finals) fj.push_back(configuration_json(cp, f));
    nlohmann::json j{{"kind", vassforge::to_string(kind)},
                     {"finals", fj},
                     {"run_count", run_count_saturated ? nlohmann::json(">=2^64-1") : nlohmann::json(run_count)},
                     {"distinct_finals", finals.size()},
                     {"states", states},
                     {"pruned", pruned},
                     {"longest_run", longest_run},
                     {"truncation", truncation.to_json()}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

}  // namespace vassforge
