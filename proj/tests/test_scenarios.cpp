#include <gtest/gtest.h>

#include <sstream>

#include "post/harness.hpp"

using namespace post;

TEST(Config, RoundTripsThroughJson)
{
    for (const auto& name : presetNames()) {
        auto c = preset(name);
        auto again = configFromJson(configToJson(c));
        EXPECT_EQ(configToJson(again), configToJson(c)) << name;
    }
}

TEST(Config, RejectsInactiveStakedHonestPlayer)
{
    auto c = preset("happy");
    c.activity.windows[1] = {{1, 50}};
    EXPECT_THROW(validateConfig(c), ScenarioError);
}

TEST(Config, RejectsDynamicallyAvailableSetting)
{
    auto c = preset("happy");
    c.setting = Setting::DynamicallyAvailable;
    EXPECT_THROW(validateConfig(c), ScenarioError);
}

TEST(Config, RejectsQuorumOutsideRange)
{
    auto c = preset("happy");
    c.protocol.q = Rational(1, 2);
    EXPECT_THROW(validateConfig(c), ScenarioError);
    c.protocol.q = 1;
    EXPECT_THROW(validateConfig(c), ScenarioError);
}

TEST(Config, RejectsStakeInPermissionedPayments)
{
    auto c = preset("tendermint");
    c.injections.push_back(Injection{5, 0, TxKind::RemoveEscrow, 1, 0});
    EXPECT_THROW(validateConfig(c), ScenarioError);
}

TEST(Config, RejectsShortEpochs)
{
    auto c = preset("happy");
    c.protocol.x = 2 * static_cast<std::int64_t>(c.stake.xstar);
    EXPECT_THROW(validateConfig(c), ScenarioError);
}

TEST(Config, QuorumCount)
{
    EXPECT_EQ(quorumCount(4, Rational(2, 3)), 3);
    EXPECT_EQ(quorumCount(9, Rational(2, 3)), 6);
    EXPECT_EQ(quorumCount(8, Rational(3, 4)), 6);
}

TEST(Scenario, HappyPathConfirmsWithinBound)
{
    auto r = runScenario(preset("happy"));
    TraceIndex ix(r.trace);
    auto l = measureLiveness(ix);
    EXPECT_TRUE(l.allConfirmed);
    EXPECT_EQ(l.kstar, 1);
    EXPECT_EQ(l.bound, 24);
    EXPECT_LE(l.maxLag, l.bound);
    EXPECT_FALSE(findViolations(ix).omniscient);
    EXPECT_TRUE(checkDeliveries(ix).ok);
}

TEST(Scenario, LeaderRotationFollowsBaseView)
{
    auto r = runScenario(preset("happy"));
    TraceIndex ix(r.trace);
    bool seen = false;
    for (const auto& rec : r.trace.records()) {
        const auto* b = rec.k == "send" ? ix.block(rec.d) : nullptr;
        if (!b || b->e != 0 || b->v != 6)
            continue;
        EXPECT_EQ(b->proposer, 3u);
        seen = true;
    }
    EXPECT_TRUE(seen);
}

TEST(Scenario, ReplayIsBitForBit)
{
    auto c = preset("safety-random", json{{"seed", 7}});
    auto a = runScenario(c);
    auto b = runScenario(c);
    EXPECT_EQ(a.trace.serialize(), b.trace.serialize());
}

TEST(Scenario, StoredTraceGivesSameReport)
{
    auto r = runScenario(preset("equivocation", json{{"rho", "0.65"}}));
    std::stringstream ss(r.trace.serialize());
    auto back = TraceLog::read(ss);
    EXPECT_EQ(reportJson(back), reportJson(r.trace));
}

TEST(Scenario, UnstakeLowersValidatingStake)
{
    auto r = runScenario(preset("unstake"));
    TraceIndex ix(r.trace);
    CanonicalInvestment inv(ix);
    EXPECT_EQ(inv.of(4, 1), Rational(25));
    auto exit = inv.exitTime({4});
    ASSERT_TRUE(exit);
    EXPECT_EQ(inv.of(4, *exit), 0);
    EXPECT_EQ(inv.of(1, ix.horizon()), Rational(25));
}

TEST(Scenario, TendermintModeSanity)
{
    auto r = runScenario(preset("tendermint"));
    TraceIndex ix(r.trace);
    EXPECT_FALSE(findViolations(ix).omniscient);
    auto l = measureLiveness(ix);
    EXPECT_TRUE(l.allConfirmed);
    EXPECT_LE(l.maxLag, l.bound);
    EXPECT_EQ(rhoBounded(ix).maxByzantineShare, Rational(1, 4));
}

TEST(Scenario, WorkerPoolMatchesSerialRuns)
{
    std::vector<ScenarioConfig> cfgs;
    for (std::uint64_t s = 1; s <= 4; ++s)
        cfgs.push_back(preset("safety-random", json{{"seed", s}}));
    auto pooled = runMany(cfgs);
    for (std::size_t i = 0; i < cfgs.size(); ++i)
        EXPECT_EQ(pooled[i].trace.serialize(), runScenario(cfgs[i]).trace.serialize());
}

TEST(Theorem1, IndistinguishableUntilTStar)
{
    auto r = runTheorem1(1, 3);
    EXPECT_EQ(r.tstar, 2 * (1 + r.tl));
    EXPECT_FALSE(r.diffYEx3Ex2) << *r.diffYEx3Ex2;
    EXPECT_FALSE(r.diffXEx4Ex1) << *r.diffXEx4Ex1;
    EXPECT_TRUE(r.ex3.omniscient == r.tstar || r.ex4.omniscient == r.tstar);
}

TEST(Theorem1, InputsDifferAfterTStar)
{
    auto r = runTheorem1(1, 3);
    auto x = playerInputs(r.traces[3], 0, r.tstar + 1);
    auto y = playerInputs(r.traces[0], 0, r.tstar + 1);
    EXPECT_NE(x, y);
}
