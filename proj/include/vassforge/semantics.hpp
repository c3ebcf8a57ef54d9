#pragma once

#include "vassforge/program.hpp"

#include <compare>
#include <functional>
#include <memory>
#include <optional>
#include <set>

namespace vassforge {

struct CompiledAtom {
    enum Op : std::uint8_t { Inc, Dec, Zero, Push, Pop } op;
    std::uint32_t index;  // counter or symbol
};

struct CompiledLine {
    bool is_goto = false;
    LineNo t1 = 0, t2 = 0;
    std::vector<CompiledAtom> atoms;
};

// Index-based form used by every search; built from a desugared program.
struct Compiled {
    Program source;  // flat
    Layout layout;
    std::vector<std::string> counters, alphabet;
    std::vector<CompiledLine> lines;

    LineNo halt() const { return static_cast<LineNo>(lines.size() + 1); }
    std::size_t counter_index(const std::string& name) const;  // throws on unknown
    std::size_t symbol_index(const std::string& name) const;
    bool has_stack() const { return !alphabet.empty(); }
};

Compiled compile(const Program& p, const Library& lib = {});

struct Configuration {
    LineNo pc = 1;
    std::vector<std::uint64_t> values;  // in Compiled::counters order
    std::vector<std::uint32_t> stack;   // symbol indices, top = back()

    auto operator<=>(const Configuration&) const = default;
    bool operator==(const Configuration&) const = default;
};

using Valuation = std::map<std::string, std::uint64_t>;

Configuration make_configuration(const Compiled& cp, const Valuation& v, const std::vector<std::string>& stack = {},
                                 LineNo pc = 1);
Valuation valuation_of(const Compiled& cp, const Configuration& c);  // counters only
std::string stack_word(const Compiled& cp, const Configuration& c);

struct Budget {
    std::uint64_t max_steps = 10'000'000;
    std::uint64_t max_counter_value = 1u << 20;
    std::uint64_t max_stack_height = 1u << 16;
    std::uint64_t max_enumerated_runs = 1'000'000;
    std::uint64_t max_states = 60'000'000;
    unsigned workers = 1;  // search threads; not a limit

    void validate() const;  // throws ProgramError on zero limits
    nlohmann::json to_json() const;
    static Budget from_json(const nlohmann::json& j, Budget base);
    static Budget from_json(const nlohmann::json& j) { return from_json(j, Budget{}); }
    static Budget from_env(Budget base);  // VASSFORGE_BUDGET
    static Budget from_env() { return from_env(Budget{}); }
};

struct Truncation {
    std::set<std::string> limits;  // which limits fired
    std::uint64_t cut_states = 0;

    bool fired() const { return !limits.empty(); }
    void hit(const std::string& limit) {
        limits.insert(limit);
        ++cut_states;
    }
    nlohmann::json to_json() const;
};

struct StepResult {
    std::vector<Configuration> successors;
    bool truncated = false;
};

// Executes the line at c.pc; atoms left to right, blocking on the first failure.
StepResult step(const Compiled& cp, const Configuration& c, const Budget& b = {});

struct Run {
    std::vector<Configuration> configs;
    enum class End { Complete, Blocked, Truncated } end = End::Blocked;
    bool complete() const { return end == End::Complete; }
};

struct LoopVisit {
    LineNo entry = 0;
    std::size_t begin = 0, end = 0;  // indices into Run::configs
    std::uint64_t iterations = 0;
    bool flat = false;
    std::optional<bool> maximal;  // empty when the loop is not flat or never exited
};

struct CallVisit {
    std::string name;
    int depth = 0;
    std::size_t begin = 0, end = 0;
    bool finished = false;
    std::optional<bool> zeroing;  // empty when no end set was supplied for the callee
};

struct RunAnnotations {
    std::vector<LoopVisit> loops;
    std::vector<CallVisit> calls;
    bool all_flat_loops_maximal() const;
    nlohmann::json to_json() const;
};

RunAnnotations classify_run(const Compiled& cp, const Run& r,
                            const std::map<std::string, std::vector<std::string>>& call_end_sets = {});

struct EnumerationReport {
    std::uint64_t runs = 0;
    Truncation truncation;
};

// DFS over runs without merging; the callback returns false to stop early.
EnumerationReport enumerate_runs(const Compiled& cp, const Configuration& init, const Budget& b,
                                 const std::function<bool(const Run&)>& on_run);

// Halt-time target: listed counters are zero (and optionally the stack is empty).
struct Goal {
    std::vector<std::uint32_t> zero;
    bool empty_stack = false;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> exact;  // counter index, required value
    bool matches(const Configuration& c) const;
};

Goal goal_zeroing(const Compiled& cp, const std::vector<std::string>& names, bool empty_stack = false);
Goal goal_all_but(const Compiled& cp, const std::vector<std::string>& keep, bool empty_stack = false);

class RelaxationPruner;

struct SearchOptions {
    std::optional<Goal> goal;  // halting states kept as finals only if they match
    bool prune = false;        // use the rational relaxation to discard hopeless states
    bool stop_at_goal = false;
    unsigned workers = 0;  // 0 uses Budget::workers
    // Out-of-scope states are cut and counted separately from truncation.
    std::function<bool(const Configuration&)> in_scope;
};

struct SearchResult {
    std::vector<Configuration> finals;  // sorted
    std::optional<Run> witness;         // to the first goal final found
    std::uint64_t states = 0;
    std::uint64_t pruned = 0;
    std::uint64_t scope_cuts = 0;
    Truncation truncation;
};

// Memoised BFS over configurations.
SearchResult search(const Compiled& cp, const Configuration& init, const Budget& b, const SearchOptions& opt = {});

struct ZComputeResult {
    enum class Kind { UniqueRun, Nothing, Multiple, Inconclusive } kind = Kind::Nothing;
    std::vector<Configuration> finals;  // distinct Z-zeroing finals
    std::uint64_t run_count = 0;        // distinct line sequences, saturating
    bool run_count_saturated = false;
    std::optional<Run> run;  // the unique run
    std::uint64_t states = 0;
    std::uint64_t pruned = 0;
    std::uint64_t longest_run = 0;
    Truncation truncation;
    std::string detail;

    nlohmann::json to_json(const Compiled& cp) const;
};

std::string to_string(ZComputeResult::Kind k);

struct ZComputeOptions {
    bool prune = true;
    std::function<bool(const Configuration&)> in_scope;
};

ZComputeResult z_compute(const Compiled& cp, const Configuration& init, const std::vector<std::string>& Z,
                         const Budget& b, const ZComputeOptions& opt = {});

nlohmann::json configuration_json(const Compiled& cp, const Configuration& c);
nlohmann::json run_json(const Compiled& cp, const Run& r);

}  // namespace vassforge
