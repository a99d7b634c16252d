#include <gtest/gtest.h>

#include "post/harness.hpp"
#include "post/recovery.hpp"

using namespace post;

namespace {

ds::ByzantineSends silent()
{
    return [](int, const std::set<ds::Chain>&) { return std::map<int, std::vector<ds::Chain>>{}; };
}

} // namespace

TEST(DolevStrong, HonestLeaderInputIsOutput)
{
    for (int input : {0, 1}) {
        auto out = ds::run({4, 1, 0, {3}, input}, silent());
        for (int p : {0, 1, 2})
            EXPECT_EQ(out.output.at(p), std::optional<int>(input));
    }
}

TEST(DolevStrong, SilentByzantineLeaderGivesBottom)
{
    auto out = ds::run({4, 1, 0, {0}, 0}, silent());
    for (int p : {1, 2, 3}) {
        EXPECT_TRUE(out.O.at(p).empty());
        EXPECT_EQ(out.output.at(p), std::nullopt);
    }
}

TEST(DolevStrong, EquivocatingLeaderGivesCommonBottom)
{
    auto adv = [](int round, const std::set<ds::Chain>&) {
        std::map<int, std::vector<ds::Chain>> out;
        if (round == 1) {
            out[1] = {{0, {0}}};
            out[2] = {{1, {0}}};
            out[3] = {{1, {0}}};
        }
        return out;
    };
    auto out = ds::run({4, 1, 0, {0}, 0}, adv);
    for (int p : {1, 2, 3}) {
        EXPECT_EQ(out.O.at(p), (std::set<int>{0, 1}));
        EXPECT_EQ(out.output.at(p), std::nullopt);
    }
}

TEST(DolevStrong, LateLeaderChainIsIgnored)
{
    auto adv = [](int round, const std::set<ds::Chain>&) {
        std::map<int, std::vector<ds::Chain>> out;
        if (round == 2)
            out[1] = {{1, {0}}};
        return out;
    };
    auto out = ds::run({4, 1, 0, {0}, 0}, adv);
    EXPECT_EQ(out.output.at(1), std::nullopt);
    EXPECT_TRUE(out.O.at(1).empty());
}

TEST(DolevStrong, ForgedHonestSignatureIsRejected)
{
    auto adv = [](int round, const std::set<ds::Chain>&) {
        std::map<int, std::vector<ds::Chain>> out;
        if (round == 2)
            out[2] = {{1, {0, 3}}};
        return out;
    };
    auto out = ds::run({4, 1, 0, {3}, 0}, adv);
    for (int p : {0, 1, 2})
        EXPECT_EQ(out.output.at(p), std::optional<int>(0));
}

TEST(RecoverySchedule, EpochZeroExample)
{
    auto s = recoverySchedule(0, 10, 1, 9, 4);
    EXPECT_EQ(s.init, 84);
    EXPECT_EQ(s.instanceStart(0), 84);
    EXPECT_EQ(s.instanceStart(1), 129);
}

TEST(RecoverySchedule, LaterEpochStartsLater)
{
    auto s0 = recoverySchedule(0, 10, 1, 9, 4);
    auto s1 = recoverySchedule(1, 10, 1, 9, 4);
    EXPECT_GT(s1.init, s0.init);
    EXPECT_EQ(s1.k, 4);
}

TEST(Recovery, NineValidatorsFiveByzantine)
{
    auto r = runScenario(preset("equivocation", json{{"rho", "5/9"}}));
    TraceIndex ix(r.trace);
    auto rec = checkLemma6(ix);
    ASSERT_TRUE(rec.result.ok) << rec.result.detail;
    EXPECT_EQ(rec.implicated.size(), 3u);
    for (auto id : rec.implicated)
        EXPECT_TRUE(ix.byzantineId(id));
    EXPECT_EQ(rec.implicatedShare, Rational(1, 3));
    EXPECT_EQ(rec.outputShare, Rational(2, 3));
    EXPECT_TRUE(checkLemma1(ix).ok);
}

TEST(Recovery, DumpedOsetsAgreeOnFinalGenesis)
{
    auto r = runScenario(preset("equivocation", json{{"rho", "0.4"}}));
    TraceIndex ix(r.trace);
    std::set<std::string> outputs;
    for (const auto* e : ix.honestEvents("recend"))
        outputs.insert(hex(e->d));
    EXPECT_EQ(outputs.size(), 1u);
}
