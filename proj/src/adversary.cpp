#include "post/adversary.hpp"

#include <algorithm>

namespace post {

ShadowAdversary::ShadowAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                                 SignatureRegistry& reg)
    : byz_(std::move(byz)), params_(params), stake_(stake), reg_(reg)
{
    for (const auto& b : byz_)
        shadows_[b.p] = std::make_unique<PostNode>(b.p, b.ids, params_, stake_, reg_);
}

PlayerId ShadowAdversary::ownerOf(Identifier id) const
{
    for (const auto& b : byz_)
        if (std::find(b.ids.begin(), b.ids.end(), id) != b.ids.end())
            return b.p;
    throw ScenarioError("identifier " + std::to_string(id) + " is not Byzantine");
}

void ShadowAdversary::step(AdversaryContext& ctx)
{
    if (!net_)
        net_ = &ctx.net();
    beforeShadows(ctx);
    std::vector<Received> all;
    for (const auto& [p, in] : ctx.inboxes())
        for (const auto& r : in)
            if (seenUid_.insert(r.env->uid).second && !hide(r))
                all.push_back(r);
    std::stable_sort(all.begin(), all.end(), [](const Received& a, const Received& b) {
        return std::tie(a.env->sent, a.env->sender, a.env->seq) < std::tie(b.env->sent, b.env->sender, b.env->seq);
    });
    for (auto& [p, node] : shadows_) {
        if (!ctx.active(p))
            continue;
        for (auto& m : node->advance(ctx.t(), all, nullptr))
            route(ctx, p, m);
    }
    afterShadows(ctx);
}

RandomAdversary::RandomAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params, StakeCache& stake,
                                 SignatureRegistry& reg, RandomAdversaryConfig cfg, std::vector<PlayerId> players)
    : ShadowAdversary(std::move(byz), params, stake, reg), cfg_(cfg), players_(std::move(players)), rng_(cfg.seed)
{
}

bool RandomAdversary::chance(int pct)
{
    return std::uniform_int_distribution<int>(0, 99)(rng_) < pct;
}

Timeslot RandomAdversary::randomDelivery(Timeslot sent)
{
    Timeslot hi = net_->latest(sent);
    return std::uniform_int_distribution<Timeslot>(sent + 1, hi)(rng_);
}

Timeslot RandomAdversary::deliveryTime(const Envelope& env, PlayerId, Timeslot dflt)
{
    if (!net_)
        return dflt;
    bool byz = shadows_.count(env.sender) > 0;
    return chance(byz ? cfg_.delayPct : cfg_.honestDelayPct) ? randomDelivery(env.sent) : dflt;
}

void RandomAdversary::route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m)
{
    if (chance(cfg_.dropPct))
        return;
    if (m->kind != MsgKind::Block || !chance(cfg_.equivocatePct)) {
        ctx.disseminate(p, m);
        return;
    }
    auto b = std::static_pointer_cast<const Block>(m);
    auto parent = shadow(p).store().block(b->par);
    std::vector<TxPtr> T = b->T;
    auto firstTx = std::find_if(T.begin(), T.end(), [](const TxPtr& tx) { return tx->type != TxKind::EpochMarker; });
    if (!parent || firstTx == T.end()) {
        ctx.disseminate(p, m);
        return;
    }
    if (chance(50) || T.size() < 2 || T[1]->type == TxKind::EpochMarker)
        T.erase(firstTx);
    else
        std::swap(T[0], T[1]);
    auto b2 = makeBlock(p, b->proposer, b->v, b->e, *parent, b->qcprev, std::move(T), ctx.reg());
    std::map<PlayerId, Timeslot> atB;
    std::map<PlayerId, Timeslot> atB2;
    for (auto q : players_) {
        bool first = chance(50);
        Timeslot late = randomDelivery(ctx.t());
        atB[q] = first ? ctx.t() + 1 : late;
        atB2[q] = first ? late : ctx.t() + 1;
    }
    ctx.disseminate(p, b, atB);
    ctx.disseminate(p, b2, atB2);
}

void RandomAdversary::afterShadows(AdversaryContext& ctx)
{
    for (const auto& byz : byz_) {
        if (!ctx.active(byz.p) || !chance(cfg_.doubleVotePct))
            continue;
        const auto& store = shadow(byz.p).store();
        const auto& arrival = store.arrival();
        if (arrival.empty())
            continue;
        std::size_t window = std::min<std::size_t>(arrival.size(), 12);
        auto d = arrival[arrival.size() - 1 -
                         std::uniform_int_distribution<std::size_t>(0, window - 1)(rng_)];
        if (!store.valid(d))
            continue;
        auto b = store.block(d);
        if (b->genesis)
            continue;
        int s = std::uniform_int_distribution<int>(1, params_.stages())(rng_);
        for (auto id : byz.ids) {
            auto c = stake_.stake(b->Tval, id);
            if (c == 0)
                continue;
            auto v = makeVote(byz.p, d, c, s, id, store.viewOf(b->par), ctx.reg());
            if (doubleVoted_.insert(v->digest).second)
                ctx.disseminate(byz.p, v);
        }
    }
}

EquivocationAdversary::EquivocationAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params,
                                             StakeCache& stake, SignatureRegistry& reg, EquivocationConfig cfg)
    : ShadowAdversary(std::move(byz), params, stake, reg), cfg_(std::move(cfg))
{
}

bool EquivocationAdversary::inWindow(Timeslot t) const
{
    Timeslot s = 4 * params_.delta * cfg_.attackView;
    return t >= s - params_.delta && t <= s + 3 * params_.delta;
}

Timeslot EquivocationAdversary::slow(Timeslot sent) const
{
    return net_->latest(sent);
}

std::map<PlayerId, Timeslot> EquivocationAdversary::side(Timeslot t, bool toH1) const
{
    std::map<PlayerId, Timeslot> at;
    for (auto p : cfg_.h1)
        at[p] = toH1 ? t + params_.delta : slow(t);
    for (auto p : cfg_.h2)
        at[p] = toH1 ? slow(t) : t + params_.delta;
    return at;
}

Timeslot EquivocationAdversary::deliveryTime(const Envelope& env, PlayerId to, Timeslot dflt)
{
    if (!net_ || !inWindow(env.sent))
        return dflt;
    bool cross = (cfg_.h1.count(env.sender) && cfg_.h2.count(to)) || (cfg_.h2.count(env.sender) && cfg_.h1.count(to));
    return cross ? slow(env.sent) : dflt;
}

bool EquivocationAdversary::hide(const Received& r) const
{
    const auto& m = r.env->msg;
    if (hidden_.count(m->digest) || (cfg_.altTx && m->digest == cfg_.altTx->digest))
        return true;
    if (m->kind == MsgKind::Vote)
        return hidden_.count(std::static_pointer_cast<const Vote>(m)->block) > 0;
    return false;
}

void EquivocationAdversary::route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m)
{
    if (cfg_.recovery == RecoveryBehavior::Silent &&
        (m->kind == MsgKind::ChainProposal || m->kind == MsgKind::OutputVote))
        return;
    if (m->kind == MsgKind::Block) {
        auto b = std::static_pointer_cast<const Block>(m);
        if (b->v == cfg_.attackView && !b_) {
            auto it = std::find_if(b->T.begin(), b->T.end(),
                                   [&](const TxPtr& tx) { return tx->digest == cfg_.pivotTx; });
            if (it == b->T.end())
                throw ScenarioError("equivocating leader's block lacks the pivot transaction");
            std::vector<TxPtr> T = b->T;
            T.erase(T.begin() + (it - b->T.begin()));
            if (cfg_.altTx)
                T.insert(T.begin() + (it - b->T.begin()), cfg_.altTx);
            auto parent = shadow(p).store().block(b->par);
            b_ = b;
            bp_ = makeBlock(p, b->proposer, b->v, b->e, *parent, b->qcprev, std::move(T), ctx.reg());
            hidden_.insert(bp_->digest);
            ctx.disseminate(p, b_, side(ctx.t(), true));
            ctx.disseminate(p, bp_, side(ctx.t(), false));
            return;
        }
    }
    if (m->kind == MsgKind::Vote && b_ && std::static_pointer_cast<const Vote>(m)->block == b_->digest)
        return;
    ctx.disseminate(p, m);
}

void EquivocationAdversary::emitVotes(AdversaryContext& ctx, const Block& b, int s, const std::set<Identifier>& ids,
                                      bool toH1)
{
    std::int64_t vprev = firstShadow().store().viewOf(b.par);
    for (auto id : ids) {
        PlayerId p = ownerOf(id);
        if (!ctx.active(p))
            continue;
        auto c = stake_.stake(b.Tval, id);
        if (c > 0)
            ctx.disseminate(p, makeVote(p, b.digest, c, s, id, vprev, ctx.reg()), side(ctx.t(), toH1));
    }
}

void EquivocationAdversary::afterShadows(AdversaryContext& ctx)
{
    if (!b_)
        return;
    Timeslot off = ctx.t() - 4 * params_.delta * cfg_.attackView;
    if (off <= 0 || off % params_.delta != 0)
        return;
    int s = static_cast<int>(off / params_.delta);
    if (s > params_.stages())
        return;
    emitVotes(ctx, *b_, s, cfg_.s1, true);
    emitVotes(ctx, *bp_, s, cfg_.s2, false);
}

WithholdingAdversary::WithholdingAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params,
                                           StakeCache& stake, SignatureRegistry& reg, WithholdingConfig cfg,
                                           std::vector<PlayerId> honest)
    : ShadowAdversary(std::move(byz), params, stake, reg), cfg_(cfg), honest_(std::move(honest))
{
}

std::map<PlayerId, Timeslot> WithholdingAdversary::onlyFast(Timeslot t) const
{
    std::map<PlayerId, Timeslot> at;
    for (auto p : honest_)
        at[p] = p == cfg_.hs ? t + params_.delta : net_->latest(t);
    return at;
}

void WithholdingAdversary::route(AdversaryContext& ctx, PlayerId p, const MsgPtr& m)
{
    auto attacked = [&](std::int64_t v) { return v == cfg_.view || v == cfg_.view + 1; };
    if (m->kind == MsgKind::Block) {
        auto b = std::static_pointer_cast<const Block>(m);
        if (b->v == cfg_.view && !b_) {
            b_ = b;
            ctx.disseminate(p, b);
            return;
        }
        if (attacked(b->v))
            return;
    }
    if (m->kind == MsgKind::Vote) {
        auto v = std::static_pointer_cast<const Vote>(m);
        auto blk = firstShadow().store().block(v->block);
        if ((b_ && v->block == b_->digest) || (bp_ && v->block == bp_->digest) || (blk && attacked(blk->v)))
            return;
    }
    ctx.disseminate(p, m);
}

void WithholdingAdversary::emitVotes(AdversaryContext& ctx, const Block& b, int s,
                                     const std::map<PlayerId, Timeslot>& at)
{
    std::int64_t vprev = firstShadow().store().viewOf(b.par);
    for (const auto& byz : byz_) {
        if (!ctx.active(byz.p))
            continue;
        for (auto id : byz.ids) {
            auto c = stake_.stake(b.Tval, id);
            if (c > 0)
                ctx.disseminate(byz.p, makeVote(byz.p, b.digest, c, s, id, vprev, ctx.reg()), at);
        }
    }
}

void WithholdingAdversary::afterShadows(AdversaryContext& ctx)
{
    if (!b_)
        return;
    Timeslot d = params_.delta;
    Timeslot t = ctx.t();
    Timeslot vx = 4 * d * cfg_.view;
    Timeslot vy = 4 * d * (cfg_.view + 1);
    if (t == vx + d)
        emitVotes(ctx, *b_, 1, onlyFast(t));
    if (!params_.twoStage && (t == vx + 2 * d || t == vx + 3 * d))
        emitVotes(ctx, *b_, static_cast<int>((t - vx) / d), onlyFast(t));
    if (t == vy) {
        auto& sh = firstShadow();
        auto base = sh.epochBase(b_->e);
        auto parent = sh.store().block(b_->par);
        if (!base || !parent)
            throw ScenarioError("withholding: no epoch base or parent for the sibling block");
        const Block& bb = *sh.store().block(*base);
        auto ids = sh.positiveIds(bb.Tr);
        Identifier lead = ids[static_cast<std::size_t>((cfg_.view + 1 - bb.v) % static_cast<std::int64_t>(ids.size()))];
        PlayerId p = ownerOf(lead);
        std::vector<TxPtr> T = b_->T;
        if (cfg_.altTx) {
            T = {cfg_.altTx};
            for (const auto& tx : b_->T)
                if (tx->type == TxKind::EpochMarker)
                    T.push_back(tx);
        }
        bp_ = makeBlock(p, lead, cfg_.view + 1, b_->e, *parent, b_->qcprev, std::move(T), ctx.reg());
        ctx.disseminate(p, bp_);
    }
    if (bp_ && t > vy && t <= vy + params_.stages() * d && (t - vy) % d == 0)
        emitVotes(ctx, *bp_, static_cast<int>((t - vy) / d), {});
    if (params_.twoStage && !released_ && firstShadow().epoch() >= cfg_.releaseEpoch) {
        emitVotes(ctx, *b_, 2, {});
        released_ = t;
    }
}

bool WithholdingAdversary::hide(const Received& r) const
{
    return cfg_.altTx && r.env->msg->digest == cfg_.altTx->digest;
}

SplitPersonaAdversary::SplitPersonaAdversary(std::vector<ByzantinePlayer> byz, const ProtocolParams& params,
                                             StakeCache& stake, SignatureRegistry& reg, std::set<PlayerId> x,
                                             std::set<PlayerId> z, Timeslot gst)
    : byz_(std::move(byz)), x_(std::move(x)), z_(std::move(z)), gst_(gst)
{
    for (const auto& b : byz_)
        for (auto& node : personas_[b.p])
            node = std::make_unique<PostNode>(b.p, b.ids, params, stake, reg);
}

int SplitPersonaAdversary::groupOf(PlayerId p) const
{
    if (x_.count(p))
        return 0;
    if (z_.count(p))
        return 1;
    return -1;
}

int SplitPersonaAdversary::sideOf(const Envelope& env) const
{
    int g = groupOf(env.sender);
    if (g >= 0)
        return g;
    auto it = uidSide_.find(env.uid);
    return it == uidSide_.end() ? -1 : it->second;
}

Timeslot SplitPersonaAdversary::deliveryTime(const Envelope& env, PlayerId to, Timeslot dflt)
{
    int from = groupOf(env.sender);
    int dest = groupOf(to);
    if (from >= 0 && dest >= 0 && from != dest)
        return std::max(gst_, env.sent + 1);
    return dflt;
}

void SplitPersonaAdversary::step(AdversaryContext& ctx)
{
    std::vector<Received> fresh;
    for (const auto& [p, in] : ctx.inboxes())
        for (const auto& r : in)
            if (seen_.insert(r.env->uid).second)
                fresh.push_back(r);
    std::stable_sort(fresh.begin(), fresh.end(), [](const Received& a, const Received& b) {
        return std::tie(a.env->sent, a.env->sender, a.env->seq) < std::tie(b.env->sent, b.env->sender, b.env->seq);
    });
    std::vector<Received> feed[2];
    for (int k = 0; k < 2; ++k)
        if (ctx.t() >= gst_ && !held_[k].empty()) {
            feed[k] = std::move(held_[k]);
            held_[k].clear();
        }
    for (const auto& r : fresh) {
        int s = sideOf(*r.env);
        for (int k = 0; k < 2; ++k) {
            if (s >= 0 && s != k && r.env->sent < gst_ && ctx.t() < gst_)
                held_[k].push_back(r);
            else
                feed[k].push_back(r);
        }
    }
    for (const auto& b : byz_) {
        if (!ctx.active(b.p))
            continue;
        for (int k = 0; k < 2; ++k) {
            const auto& other = k == 0 ? z_ : x_;
            std::map<PlayerId, Timeslot> at;
            for (PlayerId q : other)
                at[q] = std::max(gst_, ctx.t() + 1);
            for (auto& m : personas_[b.p][k]->advance(ctx.t(), feed[k], nullptr))
                uidSide_[ctx.disseminate(b.p, m, at)] = k;
        }
    }
}

} // namespace post
