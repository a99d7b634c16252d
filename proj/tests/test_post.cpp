#include <gtest/gtest.h>

#include "post/validator.hpp"

using namespace post;

namespace {

struct Net {
    SignatureRegistry reg;
    TraceLog trace;
    StakeParams sp{100, 4};
    InitialDistribution sstar;
    std::unique_ptr<StakeCache> stake;
    std::unique_ptr<Kernel> k;
    std::vector<PostNode*> nodes;

    Net(int n, ProtocolParams pp, Timeslot horizon)
    {
        KernelConfig kc;
        for (int p = 0; p < n; ++p) {
            kc.players.push_back(p);
            reg.assign(p, p + 1);
            sstar[p + 1] = sp.quantum();
        }
        kc.net.delta = pp.delta;
        kc.horizon = horizon;
        stake = std::make_unique<StakeCache>(sstar, sp);
        k = std::make_unique<Kernel>(kc, reg, trace);
        for (int p = 0; p < n; ++p) {
            auto node = std::make_unique<PostNode>(p, std::vector<Identifier>{static_cast<Identifier>(p + 1)}, pp,
                                                   *stake, reg);
            nodes.push_back(node.get());
            k->setProcess(p, std::move(node));
        }
    }
};

} // namespace

TEST(PostNode, HonestRunConfirmsAndAdvancesEpochs)
{
    ProtocolParams pp;
    pp.x = 10;
    pp.delta = 1;
    pp.deltaStar = 9;
    Net net(4, pp, 200);
    net.k->inject(0, 1, makePayment(1, net.reg));
    net.k->run();
    for (auto* n : net.nodes) {
        ASSERT_TRUE(n->tip());
        EXPECT_GE(n->epoch(), 3);
        EXPECT_FALSE(n->sawViolation());
        EXPECT_FALSE(n->rec());
        EXPECT_TRUE(n->store().block(*n->tip())->Tr.contains(makePayment(1, net.reg)->digest));
    }
}
