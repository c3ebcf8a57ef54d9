// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include "vassforge/amplifiers.hpp"
#include "vassforge/hierarchy.hpp"
#include "vassforge/oracle.hpp"
#include "vassforge/pvass.hpp"
#include "vassforge/reduction.hpp"
#include "vassforge/zeroelim.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace vassforge;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> failures;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            failures.push_back(what);
        }
    }
};

Program load(const std::string& name) {
    std::ifstream in(std::string(VASSFORGE_PROGRAMS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string str(std::uint64_t v) { return std::to_string(v); }

using Pair = std::pair<std::uint64_t, std::uint64_t>;

Program random_two_counter_program(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t lines = 3 + rng() % 6;
    std::ostringstream os;
    os << "counters: x y\n";
    for (std::size_t l = 1; l <= lines; ++l) {
        const char* ctr = rng() % 2 ? "x" : "y";
        switch (rng() % 4) {
        case 0: os << "inc " << ctr << "\n"; break;
        case 1: os << "dec " << ctr << "\n"; break;
        case 2: os << "zero? " << ctr << "\n"; break;
        default: os << "goto " << 1 + rng() % (lines + 1) << " " << 1 + rng() % (lines + 1) << "\n"; break;
        }
    }
    return parse(os.str());
}

Outcome triples_and_invariants() {
    Outcome o;
    TripleRoles roles{"a", "b", "c", {"a", "b", "c", "t"}};
    for (std::uint64_t A = 0; A <= 8; ++A)
        for (std::uint64_t B = 0; B <= 3; ++B) {
            auto v = make_triple(A, B, roles);
            std::uint64_t c = A * ((std::uint64_t(1) << (2 * B)) - 1);
            o.expect(v.at("c") == c, "make_triple c for " + str(A) + "," + str(B));
            o.expect(recognize_triple(v, roles) == std::optional<Pair>({A, B}), "round trip " + str(A) + "," + str(B));
        }
    o.expect(!recognize_triple({{"a", 1}, {"b", 1}, {"c", 2}, {"t", 0}}, roles), "c mismatch recognized");
    o.expect(recognize_triple({{"a", 0}, {"b", 5}, {"c", 0}, {"t", 0}}, roles) == std::optional<Pair>({0, 5}), "a=0 triple");

    auto spec = InvariantSpec::p1();
    TripleRoles p1{"a", "b'", "c'", {"a", "b", "c", "b'", "c'", "t"}};
    for (auto [A, B] : std::vector<Pair>{{1, 1}, {4, 2}, {16, 3}})
        o.expect(eval_invariant(spec, make_triple(A, B, p1)) == InvariantStatus::Holds, "Holds at " + str(A) + "," + str(B));
    for (std::uint64_t A = 0; A <= 8; ++A)
        for (std::uint64_t B = 0; B <= 3; ++B)
            o.expect(eval_invariant(spec, make_triple(A, B, p1)) == InvariantStatus::Holds, "P1 family " + str(A) + "," + str(B));
    // (1)*4 = 4 < 5
    o.expect(eval_invariant(spec, {{"a", 1}, {"b", 0}, {"c", 0}, {"b'", 1}, {"c'", 4}, {"t", 0}}) == InvariantStatus::Broken,
             "Broken example");
    // 3 = 3 with t = 1
    o.expect(eval_invariant(spec, {{"a", 2}, {"b", 0}, {"c", 0}, {"b'", 0}, {"c'", 0}, {"t", 1}}) == InvariantStatus::Neither,
             "Neither example");
    return o;
}

Outcome gadget_lemma() {
    Outcome o;
    for (const char* target : {"x", "y"}) {
        auto r = check_gadget_lemma(target, 6, 2);
        o.expect(r.verdict == Verdict::Verified, std::string("lemma for ") + target + ": " + r.to_json().dump());
        o.expect(r.failures == 0, std::string("failures for ") + target);
        o.expect(r.good_starts > 0 && r.broken_starts > 0, std::string("coverage for ") + target);
    }
    return o;
}

Outcome p1_amplifier() {
    Outcome o;
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    std::vector<Pair> yes{{1, 1}, {4, 2}, {16, 3}, {64, 3}}, no{{2, 2}, {3, 2}, {8, 3}};
    std::vector<Pair> all = yes;
    all.insert(all.end(), no.begin(), no.end());
    auto r = verify_amplifier(p1, all, Budget{});
    o.expect(r.verdict == Verdict::Verified, "verify_amplifier verdict");
    for (std::size_t i = 0; i < r.cases.size(); ++i) {
        const auto& c = r.cases[i];
        std::string tag = str(c.A) + "," + str(c.B);
        if (i >= yes.size()) {
            o.expect(c.result.kind == ZComputeResult::Kind::Nothing, "Nothing at " + tag);
            continue;
        }
        if (c.result.kind != ZComputeResult::Kind::UniqueRun || c.result.finals.size() != 1) {
            o.expect(false, "unique run at " + tag);
            continue;
        }
        auto v = valuation_of(cp, c.result.finals[0]);
        std::uint64_t total = c.A << (2 * c.B);
        std::uint64_t a = c.A >> (2 * (c.B - 1));  // A * 4^(B - (2B-1))
        o.expect(v.at("a") == a, "a at " + tag);
        o.expect(v.at("b") == 2 * c.B - 1, "b at " + tag);
        o.expect(v.at("c") == total - a, "c at " + tag);
        for (const auto& z : p1.Z) o.expect(v.at(z) == 0, z + " at " + tag);
    }
    return o;
}

Outcome lift_correctness() {
    Outcome o;
    auto p2 = gen_Pd(2);
    NatFunction inner = [](const BigNat& n) { return F(1, n); };
    for (auto [A, B] : std::vector<Pair>{{1, 2}, {4, 2}, {1, 3}}) {
        std::string tag = str(A) + "," + str(B);
        auto t = checkpoint_trace(p2, A, B, Budget{}, inner);
        o.expect(t.verdict == Verdict::Verified, "checkpoints at " + tag + ": " + t.detail);
        for (const auto& row : t.rows)
            o.expect(row.match, "checkpoint " + to_string(row.kind) + str(row.index) + " at " + tag);
        o.expect(t.run_class && t.run_class->good, "unique run is good at " + tag);
        auto c = check_lift_claims(p2, A, B, Budget{});
        o.expect(c.verdict == Verdict::Verified, "lift claims at " + tag + ": " + c.detail);
        o.expect(c.bad_run_claim, "non-good runs fail zeroing at " + tag);
        o.expect(c.sum_static && c.sum_violations == 0, "sum conservation at " + tag);
    }
    return o;
}

Outcome pushdown_simulation() {
    Outcome o;
    auto r = check_simulation(gen_Q1(), gen_P1(), {{1, 1}, {4, 2}}, Budget{});
    o.expect(r.verdict == Verdict::Verified, "simulation verdict");
    for (const auto& c : r.cases) {
        o.expect(c.witness_ok, "witness at " + str(c.A) + "," + str(c.B) + ": " + c.detail);
        for (const auto& f : c.forward) o.expect(f.unmatched == 0, "forward from " + f.stack);
    }
    for (unsigned d = 1; d <= 6; ++d) {
        auto q = gen_Qd(d);
        o.expect(q.counters().size() == d / 2 + 4, "counters of Q" + str(d));
        o.expect(q.end_counters().size() == d / 2, "end counters of Q" + str(d));
    }
    auto s = check_shuffle(2, 4);
    o.expect(s.expected == 15 && s.produced == 15 && s.missing.empty() && s.unexpected.empty(), "shuffle orderings");
    return o;
}

Outcome zero_test_elimination() {
    Outcome o;
    Program toy = load("toy3tests.vp");
    auto yes = verify_zeroelim(toy, 3, 0, Budget{});
    o.expect(yes.verdict == Verdict::Verified && yes.lhs && yes.witness_A && yes.witness_maps_back, "B=3 accepted");
    auto no = verify_zeroelim(toy, 2, 0, Budget{});
    o.expect(no.verdict == Verdict::Verified && !no.lhs && !no.witness_A, "B=2 rejected");

    const double bound = static_cast<double>(atom_count(eliminate_zero_tests(parse("counters: x y\nzero? x"))));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Program p = random_two_counter_program(seed);
        double ratio = static_cast<double>(atom_count(eliminate_zero_tests(p))) / static_cast<double>(atom_count(p));
        o.expect(ratio <= bound, "size ratio for seed " + str(seed));
    }
    return o;
}

Outcome end_to_end_reduction() {
    Outcome o;
    ReductionOptions plain;
    plain.unroll_bprime = false;
    plain.reuse_counters = false;
    struct Case {
        const char* file;
        std::uint64_t n;
        bool accept;
    };
    for (const auto& [opts, mode] : std::vector<std::pair<ReductionOptions, std::string>>{{ReductionOptions{}, "optimized"},
                                                                                          {plain, "unoptimized"}})
        for (const Case& c : {Case{"single_test.vp", 1, true}, Case{"toy3tests.vp", 2, true}, Case{"toy2tests.vp", 2, false}}) {
            auto r = verify_reduction(load(c.file), c.n, 1, Budget{}, opts);
            std::string tag = std::string(c.file) + " " + mode;
            o.expect(r.verdict == Verdict::Verified, "verdict for " + tag + ": " + r.detail);
            o.expect(r.lhs == c.accept && r.rhs == c.accept && r.lhs_positive == c.accept, "agreement for " + tag);
        }
    Program src = load("single_test.vp");
    std::size_t opt = compile(build_Ppp(src, 1, 1).program).counters.size();
    std::size_t unopt = compile(build_Ppp(src, 1, 1, plain).program).counters.size();
    std::size_t q2 = compile(build_Qpp(src, 1, 2).program).counters.size();
    o.expect(opt == 5, "optimized P'' has " + str(opt) + " counters, expected 5");
    o.expect(unopt == 9, "unoptimized P'' has " + str(unopt) + " counters, expected 9");
    o.expect(q2 == 7, "Q'' at d=2 has " + str(q2) + " counters, expected 7");
    return o;
}

Outcome structural_counts() {
    Outcome o;
    std::vector<std::int64_t> sizes;
    for (unsigned d = 1; d <= 6; ++d) {
        auto s = gen_Pd(d);
        o.expect(s.counters().size() == 2 * d + 4, "counters of P" + str(d));
        o.expect(s.Z.size() == d, "end counters of P" + str(d));
        sizes.push_back(static_cast<std::int64_t>(s.instruction_count()));
    }
    for (std::size_t i = 2; i < sizes.size(); ++i)
        o.expect(sizes[i] - 2 * sizes[i - 1] + sizes[i - 2] == 0, "second difference at d=" + str(i + 1));
    return o;
}

Outcome differential() {
    Outcome o;
    Budget b;
    b.max_counter_value = 16;
    b.max_steps = 200;
    oracle::DifferentialOptions opt;
    opt.workers = std::max(2u, std::thread::hardware_concurrency());
    auto r = oracle::differential_check(100, oracle::ShapeLimits{6, 3, 8}, b, opt);
    o.expect(r.programs == 100, "program count");
    o.expect(r.divergences.empty(), str(r.divergences.size()) + " divergences");
    o.expect(r.workers_deterministic, "1 worker vs " + str(opt.workers) + " workers");
    return o;
}

Outcome hierarchy() {
    Outcome o;
    for (std::uint64_t n = 1; n <= 20; ++n) {
        o.expect(F(0, n) == n + 2, "F0(" + str(n) + ")");
        o.expect(F(1, n) == 2 * n - 1, "F1(" + str(n) + ")");
    }
    for (unsigned i = 0; i <= 8; ++i) o.expect(i == 0 ? F(0, 1) == 3 : F(i, 1) == 1, "F" + str(i) + "(1)");
    auto m = measured_function(gen_P1(), 3, [](std::uint64_t B) {
        std::vector<std::uint64_t> out;
        for (std::uint64_t k = 0; k <= B; ++k) out.push_back(std::uint64_t(1) << (2 * k));
        return out;
    }, Budget{});
    for (std::uint64_t B = 1; B <= 3; ++B) {
        auto it = m.table.find(B);
        o.expect(it != m.table.end() && it->second.kind == MeasuredEntry::Kind::Triple && it->second.b_out == F(1, B),
                 "measured P1 at B=" + str(B));
    }
    for (unsigned i = 2; i <= 8; ++i) o.expect(literally_degenerate(i) && F(i, 5) == 1, "degeneracy of F" + str(i));
    o.expect(!literally_degenerate(1) && !degeneracy_note().empty(), "degeneracy note");
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "triple and invariant suite", 1, triples_and_invariants},
        {2, "zero-test gadget lemma, a+x+y+t <= 6, b <= 2", 30, gadget_lemma},
        {3, "P1 is an F1-amplifier", 300, p1_amplifier},
        {4, "lift correctness for P2", 900, lift_correctness},
        {5, "pushdown simulation", 600, pushdown_simulation},
        {6, "zero-test elimination", 300, zero_test_elimination},
        {7, "end-to-end reduction at d=1", 1800, end_to_end_reduction},
        {8, "structural counts of P_d", 1, structural_counts},
        {9, "differential testing against the oracle", 600, differential},
        {10, "hierarchy functions", 1, hierarchy},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.expect(secs < c.limit_s, "runtime over the limit");
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        line << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << secs
             << " s, limit " << c.limit_s << " s)";
        for (const auto& f : o.failures) line << "\n    " << f;
        std::cout << line.str() << std::endl;
        if (!o.pass) ++failed;
    }
    std::cout << (10 - failed) << "/10 criteria pass" << std::endl;
    return failed;
}
