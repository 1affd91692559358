#include "argmerge/dfquad.hpp"
#include "argmerge/errors.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace argmerge;

TEST(FAggregate, EmptyIsZero) {
    EXPECT_EQ(f_aggregate({}), 0.0);
}

TEST(FAggregate, HandValues) {
    const std::vector<double> one{0.3};
    EXPECT_DOUBLE_EQ(f_aggregate(one), 0.3);
    const std::vector<double> two{0.5, 0.5};
    EXPECT_DOUBLE_EQ(f_aggregate(two), 0.75);
    const std::vector<double> saturating{1.0, 0.2};
    EXPECT_DOUBLE_EQ(f_aggregate(saturating), 1.0);
    const std::vector<double> bad{0.5, 1.2};
    EXPECT_THROW(f_aggregate(bad), DomainError);
}

TEST(CCombine, EqualAggregatesKeepBaseScore) {
    for (int i = 0; i <= 49; ++i) {
        const double v = i / 49.0;
        for (double v0 : {0.0, 0.3, 0.5, 1.0}) {
            EXPECT_EQ(c_combine(v0, v, v), v0);
        }
    }
}

TEST(CCombine, ThreeCases) {
    EXPECT_DOUBLE_EQ(c_combine(0.5, 0.8, 0.2), 0.5 - 0.5 * 0.6);
    EXPECT_DOUBLE_EQ(c_combine(0.5, 0.2, 0.8), 0.5 + 0.5 * 0.6);
    EXPECT_DOUBLE_EQ(c_combine(0.0, 0.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(c_combine(1.0, 1.0, 0.0), 0.0);
    EXPECT_THROW(c_combine(1.1, 0.0, 0.0), DomainError);
    EXPECT_THROW(c_combine(0.5, -0.1, 0.0), DomainError);
}

TEST(EvaluateStrengths, SenateQ1) {
    const TreeQbaf q1 = fixtures::senate()[0];
    const StrengthMap s = evaluate_strengths(q1);
    // Leaves keep their base scores; a: F = 0.2 attack, 0.8 support.
    EXPECT_DOUBLE_EQ(s.at("b"), 0.2);
    EXPECT_DOUBLE_EQ(s.at("c"), 0.8);
    const double hand = 0.5 + (1.0 - 0.5) * (0.8 - 0.2);
    EXPECT_NEAR(s.at("a"), hand, 1e-12);
    EXPECT_NEAR(s.at("a"), oracle::naive_strength(q1.qbaf(), "a"), 1e-12);
    EXPECT_NEAR(s.at("a"), 0.8, 1e-12);
    EXPECT_THROW(s.at("zz"), UnknownArgument);
}

TEST(EvaluateStrengths, SenateQ2) {
    const TreeQbaf q2 = fixtures::senate()[1];
    const StrengthMap s = evaluate_strengths(q2);
    // b' is supported by e (0.3) and e' (0.1): F = 1 - 0.7*0.9 = 0.37.
    const double bp = 0.7 + 0.3 * 0.37;
    EXPECT_NEAR(s.at("b'"), bp, 1e-12);
    EXPECT_NEAR(s.at("a"), 0.5 - 0.5 * (bp - 0.4), 1e-12);
}

TEST(EvaluateStrengths, MatchesNaiveRecursionOnRandomTrees) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = oracle::random_tree(rng, {.size = 1 + static_cast<std::size_t>(rng() % 40)});
        const StrengthMap s = evaluate_strengths(t);
        for (const auto& a : t.qbaf().arguments()) {
            const double v = s.at(a.id);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            EXPECT_NEAR(v, oracle::naive_strength(t.qbaf(), a.id.str()), 1e-12) << a.id.str();
        }
    }
}

TEST(Verdict, ThresholdTieIsAccepted) {
    const auto q = TreeQbaf::make(QbafBuilder().add_argument("a", "", 0.5).build(), "a");
    const StrengthMap s = evaluate_strengths(q);
    EXPECT_TRUE(verdict(s, "a").accepted());
    EXPECT_FALSE(verdict(s, "a", 0.6).accepted());
    EXPECT_EQ(verdict(s, "a").strength, 0.5);
}
