#include <gtest/gtest.h>

#include <algorithm>

#include "post/identity.hpp"
#include "post/permitter.hpp"

using namespace post;

namespace {

const StakeParams params{100, 4};
const InitialDistribution sstar{{1, 25}, {2, 25}};
constexpr Identifier idA = 9;

} // namespace

TEST(Stake, AddedIdentifierStakesAtEpochEnd)
{
    SignatureRegistry reg;
    reg.assign(0, idA);
    EXPECT_EQ(evalStake(sstar, params, {makeAddEscrow(idA, reg), makeEpochMarker(0)}, idA), 25u);
}

TEST(Stake, NoMarkerMeansInitialDistribution)
{
    SignatureRegistry reg;
    reg.assign(0, idA);
    std::vector<TxPtr> T{makeAddEscrow(idA, reg)};
    EXPECT_EQ(evalStake(sstar, params, T, idA), evalStake(sstar, params, {}, idA));
    EXPECT_EQ(evalStake(sstar, params, T, 1), 25u);
}

TEST(Stake, GuiltZeroesImplicatedIdentifier)
{
    SignatureRegistry reg;
    reg.assign(0, idA);
    std::vector<TxPtr> T{makeAddEscrow(idA, reg), makeGuiltTx(nullptr, 0, {idA}, 77), makeEpochMarker(0)};
    EXPECT_EQ(evalStake(sstar, params, T, idA), 0u);
    EXPECT_EQ(evalStake(sstar, params, T, 1), 25u);
}

TEST(Stake, ZeroOutSet)
{
    SignatureRegistry reg;
    EXPECT_TRUE(zeroOutSet(sstar, {}, reg).empty());
    auto one = zeroOutSet(sstar, {1}, reg);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0]->type, TxKind::RemoveEscrow);
    EXPECT_EQ(one[0]->target, 1u);

    auto both = zeroOutSet(sstar, {1, 2}, reg);
    std::vector<TxPtr> pay{makePayment(5, reg)};
    std::sort(both.begin(), both.end());
    do {
        auto T = pay;
        T.insert(T.end(), both.begin(), both.end());
        T.push_back(makeEpochMarker(0));
        EXPECT_EQ(evalStake(sstar, params, T, 1), 0u);
        EXPECT_EQ(evalStake(sstar, params, T, 2), 0u);
    } while (std::next_permutation(both.begin(), both.end()));
}

TEST(Stake, PrefixComparable)
{
    EXPECT_TRUE(prefixComparable({1, 2}, {1, 2, 3}));
    EXPECT_TRUE(prefixComparable({}, {4}));
    EXPECT_FALSE(prefixComparable({1, 2}, {1, 3}));
}

TEST(ExternalRho, Arithmetic)
{
    auto equal = [](PlayerId, Timeslot) -> std::uint64_t { return 1; };
    std::set<PlayerId> players{0, 1, 2, 3};
    EXPECT_FALSE(checkExternalRhoBounded(equal, players, {}, 0, 4, 10));
    EXPECT_FALSE(checkExternalRhoBounded(equal, players, {3}, Rational(1, 3), 4, 10));
    EXPECT_FALSE(checkExternalRhoBounded(equal, players, {2, 3}, Rational(1, 2), 4, 10));
    EXPECT_EQ(checkExternalRhoBounded(equal, players, {2, 3}, Rational(49, 100), 4, 10), Timeslot{1});
    auto noY = [](PlayerId p, Timeslot) -> std::uint64_t { return p < 2 ? 1 : 0; };
    EXPECT_FALSE(checkExternalRhoBounded(noY, players, {2, 3}, 0, 4, 10));
}
