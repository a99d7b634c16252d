#include <gtest/gtest.h>

#include "post/kernel.hpp"

using namespace post;

TEST(Network, SynchronousBound)
{
    NetworkModel n{Regime::Synchronous, 1};
    EXPECT_EQ(n.latest(5), 6);
    n.delta = 3;
    EXPECT_FALSE(n.check(10, 12));
    EXPECT_TRUE(n.check(10, 14));
}

TEST(Network, PartialSynchronyWaitsForGst)
{
    NetworkModel n{Regime::PartialSynchrony, 2, 100};
    EXPECT_EQ(n.latest(5), 102);
    EXPECT_FALSE(n.check(5, 102));
    EXPECT_TRUE(n.check(5, 103));
    EXPECT_EQ(n.latest(150), 152);
}

TEST(Network, StarBoundedBeforeGst)
{
    NetworkModel n{Regime::StarBounded, 1, 1000000, 9};
    EXPECT_EQ(n.latest(5), 14);
    EXPECT_FALSE(n.check(5, 14));
    EXPECT_TRUE(n.check(5, 15));
}

TEST(Network, RelaxedBoundAppliesFromT0Star)
{
    NetworkModel n{Regime::StarBounded, 1, 1000000, 9, true};
    EXPECT_EQ(n.latest(5), 1000001);
    n.t0star = 20;
    EXPECT_EQ(n.latest(25), 34);
}

TEST(Activity, WindowsAreInclusive)
{
    ActivitySchedule a;
    a.windows[1] = {{3, 5}};
    EXPECT_TRUE(a.active(0, 100));
    EXPECT_FALSE(a.active(1, 2));
    EXPECT_TRUE(a.active(1, 3));
    EXPECT_TRUE(a.active(1, 5));
    EXPECT_FALSE(a.active(1, 6));
    a.setInactive(2);
    EXPECT_FALSE(a.active(2, 1));
}

namespace {

struct Recorder : Process {
    std::vector<std::pair<Timeslot, Digest>> got;
    std::map<Timeslot, MsgPtr> send;

    void step(NodeContext& ctx) override
    {
        for (const auto& r : ctx.inbox())
            got.emplace_back(ctx.t(), r.env->msg->digest);
        if (auto it = send.find(ctx.t()); it != send.end())
            ctx.disseminate(it->second);
    }
};

struct Harness {
    SignatureRegistry reg;
    TraceLog trace;
    std::vector<Recorder*> rec;
    std::unique_ptr<Kernel> k;

    explicit Harness(ActivitySchedule act = {})
    {
        KernelConfig kc;
        kc.players = {0, 1};
        kc.activity = std::move(act);
        kc.horizon = 20;
        k = std::make_unique<Kernel>(kc, reg, trace);
        for (PlayerId p : kc.players) {
            auto r = std::make_unique<Recorder>();
            rec.push_back(r.get());
            k->setProcess(p, std::move(r));
        }
    }
};

} // namespace

TEST(Kernel, SenderReceivesOwnMessageNextSlot)
{
    Harness h;
    auto m = makePayment(1, h.reg);
    h.rec[0]->send[8] = m;
    h.k->run();
    ASSERT_EQ(h.rec[0]->got.size(), 1u);
    EXPECT_EQ(h.rec[0]->got[0], std::make_pair(Timeslot{9}, m->digest));
    ASSERT_EQ(h.rec[1]->got.size(), 1u);
    EXPECT_EQ(h.rec[1]->got[0].first, 9);
}

TEST(Kernel, InactiveReceiverGetsMessageWhenActive)
{
    ActivitySchedule act;
    act.windows[1] = {{1, 8}, {12, 20}};
    Harness h(act);
    h.rec[0]->send[8] = makePayment(1, h.reg);
    h.k->run();
    ASSERT_EQ(h.rec[1]->got.size(), 1u);
    EXPECT_EQ(h.rec[1]->got[0].first, 12);
}

TEST(Kernel, SameSlotMessagesKeepDisseminationOrder)
{
    Harness h;
    auto a = makePayment(1, h.reg);
    auto b = makePayment(2, h.reg);
    h.rec[0]->send[3] = a;
    h.rec[1]->send[3] = b;
    h.k->run();
    for (auto* r : h.rec) {
        ASSERT_EQ(r->got.size(), 2u);
        EXPECT_EQ(r->got[0], std::make_pair(Timeslot{4}, a->digest));
        EXPECT_EQ(r->got[1], std::make_pair(Timeslot{4}, b->digest));
    }
}
