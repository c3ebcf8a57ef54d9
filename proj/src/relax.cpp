#include "vassforge/relax.hpp"

#include <algorithm>

namespace vassforge {

RelaxationPruner::RelaxationPruner(const Compiled& cp, Goal goal, Options opt)
    : cp_(cp), goal_(std::move(goal)), opt_(opt) {
    if (cp.has_stack()) {
        applicable_ = false;
        return;
    }
    std::size_t n = cp.counters.size();
    effects_.resize(cp.lines.size());
    for (std::size_t l = 0; l < cp.lines.size(); ++l) {
        auto& e = effects_[l];
        e.delta.assign(n, 0);
        for (const auto& a : cp.lines[l].atoms) {
            if (a.op == CompiledAtom::Inc) ++e.delta[a.index];
            else if (a.op == CompiledAtom::Dec) {
                --e.delta[a.index];
                if (std::find(e.decremented.begin(), e.decremented.end(), a.index) == e.decremented.end())
                    e.decremented.push_back(a.index);
            } else if (a.op == CompiledAtom::Zero) {
                e.zero_tested.push_back(a.index);
            }
        }
    }
    flat_.resize(cp.lines.size());
    body_end_.assign(cp.lines.size() + 2, 0);
    for (const auto& lp : detect_loops(cp.source)) {
        body_end_[lp.entry] = lp.exit;
        if (!lp.flat) continue;
        FlatLoop f;
        f.exit = lp.exit;
        f.delta.assign(n, 0);
        bool ok = true;
        for (LineNo l = lp.entry + 1; l < lp.back; ++l) {
            const auto& e = effects_[l - 1];
            if (!e.zero_tested.empty()) ok = false;
            for (std::size_t i = 0; i < n; ++i) f.delta[i] += e.delta[i];
            for (auto d : e.decremented)
                if (std::find(f.decremented.begin(), f.decremented.end(), d) == f.decremented.end())
                    f.decremented.push_back(d);
        }
        if (ok) flat_[lp.entry - 1] = std::move(f);
    }
}

// Affine expressions over the loop variables introduced along one path.
struct SymState {
    std::size_t nvars = 0;
    std::vector<std::vector<std::int64_t>> coef;  // per counter, size nvars
    std::vector<std::int64_t> constant;           // per counter
    std::vector<lp::Row> rows;

    lp::Row row_of(std::uint32_t i, bool eq) const {
        lp::Row r;
        r.coef = coef[i];
        r.constant = constant[i];
        r.equality = eq;
        return r;
    }
    bool is_constant(std::uint32_t i) const {
        return std::all_of(coef[i].begin(), coef[i].end(), [](std::int64_t v) { return v == 0; });
    }
    // Adds the constraint; false when it is constant and violated.
    bool require(std::uint32_t i, bool eq) {
        if (is_constant(i)) return eq ? constant[i] == 0 : constant[i] >= 0;
        rows.push_back(row_of(i, eq));
        return true;
    }
    bool same_exprs(const SymState& o) const {
        if (nvars != o.nvars) {
            for (std::size_t i = 0; i < coef.size(); ++i) {
                if (constant[i] != o.constant[i]) return false;
                std::size_t m = std::max(nvars, o.nvars);
                for (std::size_t k = 0; k < m; ++k) {
                    std::int64_t a = k < nvars ? coef[i][k] : 0, b = k < o.nvars ? o.coef[i][k] : 0;
                    if (a != b) return false;
                }
            }
            return true;
        }
        return coef == o.coef && constant == o.constant;
    }
};

class SymbolicExplorer {
  public:
    explicit SymbolicExplorer(const RelaxationPruner& pr) : pr_(pr) {}

    bool run(LineNo pc, const std::uint64_t* values) {
        SymState s;
        std::size_t n = pr_.cp_.counters.size();
        s.coef.assign(n, {});
        s.constant.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.constant[i] = static_cast<std::int64_t>(values[i]);
        std::vector<Visit> hist;
        return explore(pc, std::move(s), std::move(hist));
    }

  private:
    struct Visit {
        LineNo head;
        SymState last;
        int guard = -1;
        std::int64_t allowed = 0;
        std::int64_t revisits = 0;
    };

    // Difference prev - cur of counter g, if it is a constant.
    static std::optional<std::int64_t> const_drop(const SymState& prev, const SymState& cur, std::size_t g) {
        std::size_t m = std::max(prev.nvars, cur.nvars);
        for (std::size_t k = 0; k < m; ++k) {
            std::int64_t a = k < prev.nvars ? prev.coef[g][k] : 0, b = k < cur.nvars ? cur.coef[g][k] : 0;
            if (a != b) return std::nullopt;
        }
        return prev.constant[g] - cur.constant[g];
    }

    bool give_up() { return true; }

    bool explore(LineNo pc, SymState s, std::vector<Visit> hist) {
        const Compiled& cp = pr_.cp_;
        for (;;) {
            if (pc == cp.halt()) {
                if (++paths_ > pr_.opt_.max_paths) return give_up();
                for (auto z : pr_.goal_.zero)
                    if (!s.require(z, true)) return false;
                if (s.rows.empty()) return true;
                return lp::feasible(s.rows, s.nvars).status != lp::Status::Infeasible;
            }
            const CompiledLine& line = cp.lines[pc - 1];
            if (!line.is_goto) {
                const auto& e = pr_.effects_[pc - 1];
                // Zero tests are checked against the value at their position.
                if (!e.zero_tested.empty()) {
                    std::vector<std::int64_t> off(s.constant.size(), 0);
                    for (const auto& a : line.atoms) {
                        if (a.op == CompiledAtom::Inc) ++off[a.index];
                        else if (a.op == CompiledAtom::Dec) --off[a.index];
                        else if (a.op == CompiledAtom::Zero) {
                            s.constant[a.index] += off[a.index];
                            bool ok = s.require(a.index, true);
                            s.constant[a.index] -= off[a.index];
                            if (!ok) return false;
                        }
                    }
                }
                for (std::size_t i = 0; i < s.constant.size(); ++i) s.constant[i] += e.delta[i];
                for (auto d : e.decremented)
                    if (!s.require(d, false)) return false;
                ++pc;
                continue;
            }
            if (const auto& f = pr_.flat_[pc - 1]) {
                std::size_t k = s.nvars++;
                for (std::size_t i = 0; i < s.coef.size(); ++i) {
                    s.coef[i].resize(s.nvars, 0);
                    s.coef[i][k] = f->delta[i];
                }
                for (auto& r : s.rows) r.coef.resize(s.nvars, 0);
                for (auto d : f->decremented)
                    if (!s.require(d, false)) return false;
                pc = f->exit;
                continue;
            }
            // General branch point.
            if (++paths_ > pr_.opt_.max_paths) return give_up();
            auto it = std::find_if(hist.begin(), hist.end(), [&](const Visit& v) { return v.head == pc; });
            if (it != hist.end()) {
                if (s.same_exprs(it->last)) return false;  // a cycle with no net effect can be skipped
                if (it->guard < 0) {
                    int guard = -1;
                    for (std::size_t g = 0; g < s.constant.size(); ++g) {
                        auto drop = const_drop(it->last, s, g);
                        if (drop && *drop >= 1) {
                            guard = static_cast<int>(g);
                            break;
                        }
                    }
                    if (guard < 0) return give_up();
                    const SymState& first = it->last;
                    std::int64_t bound;
                    if (first.is_constant(static_cast<std::uint32_t>(guard))) {
                        bound = first.constant[guard];
                    } else {
                        auto r = lp::maximise(first.rows, first.nvars, first.coef[guard], first.constant[guard]);
                        if (r.status == lp::Status::Infeasible) return false;
                        if (r.status == lp::Status::Unbounded) return give_up();
                        bound = r.floor_value;
                    }
                    it->guard = guard;
                    it->allowed = bound;
                } else {
                    auto drop = const_drop(it->last, s, static_cast<std::size_t>(it->guard));
                    if (!drop || *drop < 1) return give_up();
                }
                if (++it->revisits > it->allowed) return false;
                it->last = s;
                // Loops nested in this one start afresh on every iteration.
                if (LineNo end = pr_.body_end_[pc]) {
                    hist.erase(std::remove_if(hist.begin(), hist.end(),
                                              [&](const Visit& v) { return v.head > pc && v.head < end; }),
                               hist.end());
                    it = std::find_if(hist.begin(), hist.end(), [&](const Visit& v) { return v.head == pc; });
                }
            } else {
                hist.push_back({pc, s});
            }
            if (line.t1 == line.t2) {
                pc = line.t1;
                continue;
            }
            if (explore(line.t1, s, hist)) return true;
            pc = line.t2;
        }
    }

    const RelaxationPruner& pr_;
    std::size_t paths_ = 0;
};

bool RelaxationPruner::may_reach(LineNo pc, const std::uint64_t* values) const {
    if (!applicable_) return true;
    SymbolicExplorer ex(*this);
    return ex.run(pc, values);
}

}  // namespace vassforge
