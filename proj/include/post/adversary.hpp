#pragma once

#include <array>
#include <random>

#include "post/validator.hpp"

namespace post {

struct ByzantinePlayer {
    PlayerId p = 0;
    std::vector<Identifier> ids;
};

// Runs an honest shadow node for every Byzantine player, all fed the union
// of the Byzantine inboxes, and lets subclasses rewrite what gets sent.
class ShadowAdversary : public Adversary {
public:
    ShadowAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                    SignatureRegistry& reg);

    void step(AdversaryContext& ctx) override;
    // Delivery choices need the live network model, including t0*.
    void bind(const Kernel& k) { net_ = &k.network(); }
    PostNode& shadow(PlayerId p) { return *shadows_.at(p); }
    const std::vector<ByzantinePlayer>& byzantine() const { return byz_; }

protected:
    virtual void beforeShadows(AdversaryContext&) {}
    virtual void route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m) { ctx.disseminate(p, m); }
    virtual void afterShadows(AdversaryContext&) {}
    virtual bool hide(const Received&) const { return false; }

    PlayerId ownerOf(Identifier id) const;
    PostNode& firstShadow() { return *shadows_.begin()->second; }

    std::vector<ByzantinePlayer> byz_;
    ProtocolParams params_;
    StakeCache& stake_;
    SignatureRegistry& reg_;
    std::map<PlayerId, std::unique_ptr<PostNode>> shadows_;
    const NetworkModel* net_ = nullptr;
    std::set<std::uint64_t> seenUid_;
};

// Byzantine players that never send anything.
class SilentAdversary : public Adversary {};

struct RandomAdversaryConfig {
    std::uint64_t seed = 1;
    // Probabilities in percent.
    int dropPct = 10;
    int delayPct = 50;
    int equivocatePct = 50;
    int doubleVotePct = 20;
    int honestDelayPct = 50;
};

// Admissible but arbitrary: withholds, delays within the regime, equivocates
// as leader and double-votes across stages and blocks.
class RandomAdversary : public ShadowAdversary {
public:
    RandomAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                    SignatureRegistry& reg, RandomAdversaryConfig cfg, std::vector<PlayerId> players);

    Timeslot deliveryTime(const Envelope& env, PlayerId to, Timeslot dflt) override;

protected:
    void route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m) override;
    void afterShadows(AdversaryContext& ctx) override;

private:
    Timeslot randomDelivery(Timeslot sent);
    bool chance(int pct);

    RandomAdversaryConfig cfg_;
    std::vector<PlayerId> players_;
    std::mt19937_64 rng_;
    std::set<Digest> doubleVoted_;
};

enum class RecoveryBehavior : std::uint8_t { Silent, Cooperate };

struct EquivocationConfig {
    std::int64_t attackView = 0;
    std::set<PlayerId> h1;
    std::set<PlayerId> h2;
    // Byzantine identifiers voting for b and for b' respectively.
    std::set<Identifier> s1;
    std::set<Identifier> s2;
    // Honest cross-group traffic sent in [4v-1, 4v+3] is held as long as the regime allows.
    // b carries the pivot transaction; b' carries altTx in its place, which the
    // Byzantine shadows never see.
    Digest pivotTx = 0;
    TxPtr altTx;
    RecoveryBehavior recovery = RecoveryBehavior::Silent;
};

// A Byzantine leader proposes b and b' in one view; the two honest groups each
// see one block and a quorum of Byzantine votes for it.
class EquivocationAdversary : public ShadowAdversary {
public:
    EquivocationAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                          SignatureRegistry& reg, EquivocationConfig cfg);

    Timeslot deliveryTime(const Envelope& env, PlayerId to, Timeslot dflt) override;
    std::optional<Digest> blockB() const { return b_ ? std::optional<Digest>(b_->digest) : std::nullopt; }
    std::optional<Digest> blockBPrime() const { return bp_ ? std::optional<Digest>(bp_->digest) : std::nullopt; }

protected:
    void route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m) override;
    void afterShadows(AdversaryContext& ctx) override;
    bool hide(const Received& r) const override;

private:
    bool inWindow(Timeslot t) const;
    std::map<PlayerId, Timeslot> side(Timeslot t, bool toH1) const;
    Timeslot slow(Timeslot sent) const;
    void emitVotes(AdversaryContext& ctx, const Block& b, int s, const std::set<Identifier>& ids, bool toH1);

    EquivocationConfig cfg_;
    BlockPtr b_;
    BlockPtr bp_;
    std::set<Digest> hidden_;
};

struct WithholdingConfig {
    std::int64_t view = 0;
    PlayerId hs = 0;
    // Two-stage: stage-2 votes for b are released once honest players reach this epoch.
    std::int64_t releaseEpoch = 2;
    // Replaces the ordinary transactions of b' and is kept from the Byzantine shadows.
    TxPtr altTx;
};

// Builds a stage-1 QC for b seen by one honest player only, then a conflicting
// sibling b' one view later; stage-2 votes for b are withheld (two-stage) or
// shown to that player in-view (three-stage).
class WithholdingAdversary : public ShadowAdversary {
public:
    WithholdingAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                         SignatureRegistry& reg, WithholdingConfig cfg, std::vector<PlayerId> honest);

    std::optional<Timeslot> releasedAt() const { return released_; }

protected:
    void route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m) override;
    void afterShadows(AdversaryContext& ctx) override;
    bool hide(const Received& r) const override;

private:
    void emitVotes(AdversaryContext& ctx, const Block& b, int s, const std::map<PlayerId, Timeslot>& at);
    std::map<PlayerId, Timeslot> onlyFast(Timeslot t) const;

    WithholdingConfig cfg_;
    std::vector<PlayerId> honest_;
    BlockPtr b_;
    BlockPtr bp_;
    std::optional<Timeslot> released_;
};

// Every Byzantine player runs two honest personas. Persona 0 acts as if the Z
// group were silent until GST and persona 1 as if the X group were; each
// persona's output reaches the opposite group only at GST.
class SplitPersonaAdversary : public Adversary {
public:
    SplitPersonaAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                          SignatureRegistry& reg, std::set<PlayerId> x, std::set<PlayerId> z, Timeslot gst);

    void step(AdversaryContext& ctx) override;
    Timeslot deliveryTime(const Envelope& env, PlayerId to, Timeslot dflt) override;

private:
    // 0 for the X side, 1 for the Z side, -1 when neither.
    int sideOf(const Envelope& env) const;
    int groupOf(PlayerId p) const;

    std::vector<ByzantinePlayer> byz_;
    std::set<PlayerId> x_;
    std::set<PlayerId> z_;
    Timeslot gst_;
    std::map<PlayerId, std::array<std::unique_ptr<PostNode>, 2>> personas_;
    std::map<std::uint64_t, int> uidSide_;
    std::set<std::uint64_t> seen_;
    std::vector<Received> held_[2];
};

} // namespace post
