#include "vassforge/amplifiers.hpp"

#include <gtest/gtest.h>

using namespace vassforge;

namespace {

TripleRoles roles() { return TripleRoles{"a", "b", "c", {"a", "b", "c", "t"}}; }

}  // namespace

TEST(Triple, Construction) {
    auto v = make_triple(1, 1, roles());
    EXPECT_EQ(v, (Valuation{{"a", 1}, {"b", 1}, {"c", 3}, {"t", 0}}));
    v = make_triple(4, 2, roles());
    EXPECT_EQ(v["c"], 60u);
    for (const auto& [k, x] : make_triple(0, 0, roles())) EXPECT_EQ(x, 0u) << k;
}

TEST(Triple, RoundTrip) {
    for (std::uint64_t A = 0; A <= 8; ++A)
        for (std::uint64_t B = 0; B <= 3; ++B) {
            auto r = recognize_triple(make_triple(A, B, roles()), roles());
            ASSERT_TRUE(r);
            EXPECT_EQ(r->first, A);
            // With A = 0 the exponent is still read from b.
            EXPECT_EQ(r->second, B);
        }
}

TEST(Triple, Recognition) {
    EXPECT_FALSE(recognize_triple({{"a", 1}, {"b", 1}, {"c", 2}, {"t", 0}}, roles()));
    EXPECT_EQ(recognize_triple({{"a", 0}, {"b", 5}, {"c", 0}, {"t", 0}}, roles()),
              (std::optional<std::pair<std::uint64_t, std::uint64_t>>{{0, 5}}));
    EXPECT_FALSE(recognize_triple({{"a", 1}, {"b", 1}, {"c", 3}, {"t", 1}}, roles()));
}

TEST(Invariant, TriplesHoldForP1) {
    auto spec = InvariantSpec::p1();
    TripleRoles r{"a", "b'", "c'", {"a", "b", "c", "b'", "c'", "t"}};
    for (auto [A, B] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{1, 1}, {4, 2}, {16, 3}})
        EXPECT_EQ(eval_invariant(spec, make_triple(A, B, r)), InvariantStatus::Holds);
}

TEST(Invariant, BrokenAndNeither) {
    auto spec = InvariantSpec::p1();
    Valuation broken{{"a", 1}, {"b", 0}, {"c", 0}, {"b'", 1}, {"c'", 4}, {"t", 0}};
    EXPECT_EQ(eval_invariant(spec, broken), InvariantStatus::Broken);
    Valuation neither{{"a", 2}, {"b", 0}, {"c", 0}, {"b'", 0}, {"c'", 0}, {"t", 1}};
    EXPECT_EQ(eval_invariant(spec, neither), InvariantStatus::Neither);
}

TEST(StrongConditions, P1RunsFromFourTwoConserveTheTotal) {
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    Budget b;
    b.max_counter_value = amplifier_counter_cap(4, 2);
    b.max_enumerated_runs = 5000;
    std::uint64_t seen = 0;
    enumerate_runs(cp, input_configuration(p1, cp, 4, 2), b, [&](const vassforge::Run& r) {
        auto s = check_strong_conditions(p1, cp, r);
        EXPECT_TRUE(s.sum_preserved);
        EXPECT_EQ(s.sum_start, 64);  // A * 4^B
        EXPECT_TRUE(s.inequality_preserved);
        return ++seen < 2000;
    });
    EXPECT_GT(seen, 0u);
}

TEST(StrongConditions, EmptyRunHoldsTrivially) {
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    vassforge::Run r;
    r.configs.push_back(input_configuration(p1, cp, 1, 1));
    auto s = check_strong_conditions(p1, cp, r);
    EXPECT_TRUE(s.sum_preserved);
    EXPECT_TRUE(s.inequality_preserved);
}

TEST(StrongConditions, FailedAntecedentIsVacuous) {
    auto p1 = gen_P1();
    Compiled cp = p1.compile();
    vassforge::Run r;
    // Sum 2 and c' = 0: (2 - 0) * 4 >= 2.
    r.configs.push_back(make_configuration(cp, {{"a", 2}, {"b'", 1}}));
    r.configs.push_back(make_configuration(cp, {{"a", 1}, {"t", 1}, {"b'", 1}}, {}, 2));
    auto s = check_strong_conditions(p1, cp, r);
    EXPECT_FALSE(s.antecedent);
    EXPECT_TRUE(s.inequality_preserved);
}
