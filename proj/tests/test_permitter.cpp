#include <gtest/gtest.h>

#include "post/permitter.hpp"

using namespace post;

TEST(Permitter, LeadingZeroBits)
{
    Tau t{};
    EXPECT_EQ(leadingZeroBits(t), 256);
    t[0] = 0x80;
    EXPECT_EQ(leadingZeroBits(t), 0);
    t[0] = 0x01;
    EXPECT_EQ(leadingZeroBits(t), 7);
    t[0] = 0;
    t[2] = 0x20;
    EXPECT_EQ(leadingZeroBits(t), 18);
}

TEST(Permitter, RejectsEmptyAndOverBalanceQueries)
{
    SignatureRegistry reg;
    Permitter p({UseMode::Single, false, 2}, [](PlayerId, Timeslot) -> std::uint64_t { return 2; }, 1, reg);
    EXPECT_THROW(p.submitQuery(0, 1, {0, "s"}), QueryRejected);
    EXPECT_THROW(p.submitQuery(0, 1, {3, "s"}), QueryRejected);
    EXPECT_NO_THROW(p.submitQuery(0, 1, {1, "s"}));
    EXPECT_NO_THROW(p.submitQuery(0, 1, {1, "s"}));
    EXPECT_THROW(p.submitQuery(0, 1, {1, "s"}), QueryRejected);
    EXPECT_NO_THROW(p.submitQuery(0, 2, {2, "s"}));
    EXPECT_EQ(p.accepted(), 3u);
    EXPECT_EQ(p.rejected(), 3u);
}

TEST(Permitter, MultiUseChargesPerQueryOnly)
{
    SignatureRegistry reg;
    Permitter p({UseMode::Multi, false, 2}, [](PlayerId, Timeslot) -> std::uint64_t { return 2; }, 1, reg);
    for (int i = 0; i < 5; ++i)
        EXPECT_NO_THROW(p.submitQuery(0, 1, {2, "s"}));
}

TEST(Permitter, InactivePlayerHasNoBudget)
{
    SignatureRegistry reg;
    Permitter p({}, [](PlayerId q, Timeslot) -> std::uint64_t { return q == 0 ? 1 : 0; }, 1, reg);
    EXPECT_THROW(p.submitQuery(1, 1, {1, "s"}), QueryRejected);
}

TEST(Permitter, ResponsesAreSeededAndSigned)
{
    SignatureRegistry r1, r2;
    auto one = [](PlayerId, Timeslot) -> std::uint64_t { return 1; };
    Permitter a({}, one, 5, r1), b({}, one, 5, r2), c({}, one, 6, r2);
    auto x = a.submitQuery(0, 3, {1, "s"});
    auto y = b.submitQuery(0, 3, {1, "s"});
    auto z = c.submitQuery(0, 3, {1, "s"});
    EXPECT_EQ(x.tau, y.tau);
    EXPECT_NE(x.tau, z.tau);
    EXPECT_EQ(x.sigma, "s");
    EXPECT_TRUE(r1.verify(x.sig));
}

TEST(Permitter, DeterministicModeIgnoresPlayer)
{
    SignatureRegistry reg;
    auto one = [](PlayerId, Timeslot) -> std::uint64_t { return 1; };
    Permitter p({UseMode::Single, true, 1}, one, 5, reg);
    EXPECT_EQ(p.submitQuery(0, 3, {1, "s"}).tau, p.submitQuery(1, 3, {1, "s"}).tau);
}

TEST(Permitter, MinimumOfMoreSamplesIsSmallerOnAverage)
{
    SignatureRegistry reg;
    auto many = [](PlayerId, Timeslot) -> std::uint64_t { return 64; };
    Permitter p({UseMode::Multi, false, 64}, many, 9, reg);
    int one = 0, sixtyFour = 0;
    for (Timeslot t = 1; t <= 2000; ++t) {
        one += leadingZeroBits(p.submitQuery(0, t, {1, "s"}).tau);
        sixtyFour += leadingZeroBits(p.submitQuery(1, t, {64, "s"}).tau);
    }
    // E[zeros] is about 1 for one sample and about 7 for the minimum of 64.
    EXPECT_LT(one, 2 * 2000 / 1.5);
    EXPECT_GT(sixtyFour, 6 * 2000);
}
