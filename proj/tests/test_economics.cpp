#include <gtest/gtest.h>

#include "post/harness.hpp"

using namespace post;

TEST(AlphaBound, Arithmetic)
{
    const Rational q(2, 3);
    EXPECT_EQ(alphaBoundFor(Rational(1, 2), q), Rational(1, 3));
    EXPECT_EQ(alphaBoundFor(Rational(5, 9), q), Rational(2, 5));
    EXPECT_EQ(alphaBoundFor(Rational(1, 3), q), 0);
    EXPECT_EQ(alphaBoundFor(Rational(1, 4), q), 0);
    EXPECT_EQ(alphaBoundFor(Rational(7, 10), Rational(3, 4)), Rational(2, 7));
}

TEST(AlphaRatio, UndefinedOrZeroIsOne)
{
    EXPECT_EQ(alphaRatio(std::nullopt, 5), 1);
    EXPECT_EQ(alphaRatio(Rational(3), 0), 1);
    EXPECT_EQ(alphaRatio(Rational(3), 6), Rational(1, 2));
}

TEST(Investment, CanonicalClauses)
{
    auto r = runScenario(preset("happy"));
    TraceIndex ix(r.trace);
    CanonicalInvestment inv(ix);
    EXPECT_EQ(inv.of(1, 10), Rational(25));
    EXPECT_EQ(inv.of(99, 10), 0);
    EXPECT_FALSE(inv.tf());
    auto v = computeVerdict(ix);
    EXPECT_EQ(v.classification, EaacClass::NoViolation);
}

TEST(Investment, SlashedStaysInvestedButLosesValue)
{
    auto r = runScenario(preset("equivocation", json{{"rho", "5/9"}}));
    TraceIndex ix(r.trace);
    CanonicalInvestment inv(ix);
    ASSERT_TRUE(inv.tf());
    ASSERT_FALSE(inv.slashed().empty());
    auto id = *inv.slashed().begin();
    EXPECT_EQ(inv.of(id, *inv.tf()), Rational(ix.stake().params().quantum()));
    auto owner = ix.ownerOf(id);
    ASSERT_TRUE(owner);
    auto value = canonicalValuation(inv, ix, {*owner}, *inv.tf(), {}, findViolations(ix).omniscient);
    ASSERT_TRUE(value);
    EXPECT_LT(*value, inv.ofPlayer(*owner, *inv.tf()));
}

TEST(Investment, ValuationUndefinedBetweenViolationAndRecovery)
{
    auto r = runScenario(preset("equivocation", json{{"rho", "0.4"}}));
    TraceIndex ix(r.trace);
    CanonicalInvestment inv(ix);
    auto v = computeVerdict(ix);
    ASSERT_TRUE(v.tStar && v.tF);
    ASSERT_LT(*v.tStar, *v.tF);
    EXPECT_FALSE(canonicalValuation(inv, ix, ix.honest(), *v.tStar, {}, v.tStar));
    EXPECT_TRUE(canonicalValuation(inv, ix, ix.honest(), *v.tStar - 1, {}, v.tStar));
}

TEST(GammaLiquidity, OneSlotIsTooShort)
{
    auto r = runScenario(preset("unstake"));
    TraceIndex ix(r.trace);
    auto ce = checkGammaLiquidity(ix, 1);
    ASSERT_TRUE(ce);
    EXPECT_GT(ce->residual, 0);
    EXPECT_FALSE(checkGammaLiquidity(ix, 200));
}

TEST(Theorem2, LiquidStakeCashedOutByGst)
{
    auto cfg = preset("theorem2");
    auto r = runScenario(cfg);
    TraceIndex ix(r.trace);
    LiquidInvestment inv(ix, cfg.gamma);
    for (Identifier id : {2u, 3u}) {
        auto out = inv.cashedOut(id);
        ASSERT_TRUE(out);
        EXPECT_LE(*out, ix.net().gst);
    }
    auto v = computeVerdict(ix, cfg.prices, &inv);
    EXPECT_EQ(v.classification, EaacClass::Cheap);
    EXPECT_EQ(v.alphaB, 1);
}

TEST(Theorem2, LongerGammaKeepsStakeInvestedAtGst)
{
    auto cfg = preset("theorem2", json{{"gamma", 104}});
    auto r = runScenario(cfg);
    TraceIndex ix(r.trace);
    LiquidInvestment longer(ix, 10 * cfg.gamma);
    EXPECT_GT(longer.ofPlayer(1, ix.net().gst), 0);
}
