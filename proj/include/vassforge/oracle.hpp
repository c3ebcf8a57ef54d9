#pragma once

#include "vassforge/semantics.hpp"

namespace vassforge::oracle {

// Name-keyed configuration; the oracle never sees the engine's index-based form.
struct OConfig {
    LineNo pc = 1;
    std::map<std::string, std::uint64_t> values;
    std::vector<std::string> stack;  // top = back()

    auto operator<=>(const OConfig&) const = default;
    bool operator==(const OConfig&) const = default;
};

OConfig from_engine(const Compiled& cp, const Configuration& c);
Configuration to_engine(const Compiled& cp, const OConfig& c);
nlohmann::json to_json(const OConfig& c);

struct OracleVerdict {
    enum class Kind { Reachable, Unreachable, Unknown } kind = Kind::Unknown;
    std::vector<OConfig> witness;  // src .. dst when Reachable
    std::set<std::string> limits;  // fired budget limits when Unknown
    std::uint64_t visited = 0;
    nlohmann::json to_json() const;
};

std::string to_string(OracleVerdict::Kind k);

// Exhaustive depth-bounded DFS. Counter values above max_counter_value and stacks above
// max_stack_height are cut and make a negative answer Unknown.
OracleVerdict reach_oracle(const Program& p, const OConfig& src, const OConfig& dst, const Budget& b,
                           const Library& lib = {});

struct FinalsResult {
    std::set<OConfig> finals;  // halting configurations
    std::set<std::string> limits;
    std::uint64_t visited = 0;
    bool truncated() const { return !limits.empty(); }
};

// Every halting configuration reachable inside the budget box.
FinalsResult oracle_finals(const Program& p, const OConfig& src, const Budget& b, const Library& lib = {});

// True iff every consecutive pair is a step of the main engine.
bool replay(const Compiled& cp, const std::vector<OConfig>& witness, const Budget& b = {});

struct ShapeLimits {
    std::size_t max_lines = 6;
    std::size_t max_counters = 3;
    std::uint64_t max_value = 8;
};

struct Divergence {
    std::uint64_t seed = 0;
    std::string program;  // minimized DSL text
    nlohmann::json init;
    std::string reason;
};

struct DifferentialReport {
    std::uint64_t programs = 0, agreements = 0, truncated = 0;
    std::uint64_t engine_finals = 0;        // summed over programs
    bool workers_deterministic = true;      // 1 worker vs N workers
    std::vector<Divergence> divergences;
    nlohmann::json to_json() const;
};

struct DifferentialOptions {
    std::uint64_t first_seed = 1;
    unsigned workers = 4;
    bool corrupt_engine = false;  // harness self-test: drops one engine final
};

// Random program for a seed, with an initial valuation.
std::pair<Program, std::map<std::string, std::uint64_t>> random_program(std::uint64_t seed, const ShapeLimits& s);

DifferentialReport differential_check(std::uint64_t count, const ShapeLimits& s, const Budget& b,
                                      const DifferentialOptions& opt = {});

}  // namespace vassforge::oracle
