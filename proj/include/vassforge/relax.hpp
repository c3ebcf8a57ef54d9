#pragma once

#include "vassforge/semantics.hpp"

namespace vassforge {

// Sound over-approximation of "some run from this state reaches a halting
// configuration satisfying the goal". Follows the control flow symbolically,
// summarises flat loops by a nonnegative rational iteration count and checks
// each halting path with an exact LP. Answers true whenever it cannot decide.
class RelaxationPruner {
  public:
    struct Options {
        std::size_t max_paths = 4096;
    };

    RelaxationPruner(const Compiled& cp, Goal goal, Options opt);
    RelaxationPruner(const Compiled& cp, Goal goal) : RelaxationPruner(cp, std::move(goal), Options{}) {}

    bool applicable() const { return applicable_; }
    bool may_reach(LineNo pc, const std::uint64_t* values) const;
    bool may_reach(const Configuration& c) const { return may_reach(c.pc, c.values.data()); }

    struct LineEffect {
        std::vector<std::int64_t> delta;
        std::vector<std::uint32_t> decremented;
        std::vector<std::uint32_t> zero_tested;
    };
    struct FlatLoop {
        LineNo exit = 0;
        std::vector<std::int64_t> delta;
        std::vector<std::uint32_t> decremented;
    };

  private:
    friend class SymbolicExplorer;
    const Compiled& cp_;
    Goal goal_;
    Options opt_;
    bool applicable_ = true;
    std::vector<LineEffect> effects_;            // per line (index pc-1)
    std::vector<std::optional<FlatLoop>> flat_;  // per line: flat loop entered here
    std::vector<LineNo> body_end_;               // per loop head: exit line, 0 otherwise
};

namespace lp {

// Rows read coef·k + constant (>= 0 or == 0) over variables k >= 0.
struct Row {
    std::vector<std::int64_t> coef;
    std::int64_t constant = 0;
    bool equality = false;
};

enum class Status { Feasible, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    // Floor of the optimum for maximise(); meaningful when status == Feasible.
    std::int64_t floor_value = 0;
};

Result feasible(const std::vector<Row>& rows, std::size_t nvars);
Result maximise(const std::vector<Row>& rows, std::size_t nvars, const std::vector<std::int64_t>& objective,
                std::int64_t objective_constant);

}  // namespace lp

}  // namespace vassforge
