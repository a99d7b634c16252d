#include "post/longest_chain.hpp"

#include <algorithm>

namespace post {

json PowBlock::describe() const
{
    json txs = json::array();
    for (const auto& tx : T)
        txs.push_back(hex(tx->digest));
    return json{{"kind", "block"}, {"pow", hex(permit.digest)}, {"h", h},        {"v", 0},
                {"e", 0},          {"par", hex(par)},           {"qcprev", json::array()},
                {"T", txs},        {"tr", hex(Tr.digest())},    {"proposer", miner}};
}

void PowBlock::nested(std::vector<const Message*>& out) const
{
    for (const auto& tx : T)
        out.push_back(tx.get());
}

std::string powSigma(Digest parent, const TxSeq& T)
{
    return "pow|" + hex(parent) + "|" + hex(T.digest());
}

namespace {

TxSeq seqOf(const std::vector<TxPtr>& T)
{
    return TxSeq::of(T);
}

} // namespace

LongestChainNode::LongestChainNode(PlayerId self, LongestChainParams params, SignatureRegistry& reg)
    : self_(self), params_(params), reg_(reg), tip_(genesisBlock()->digest)
{
}

void LongestChainNode::step(NodeContext& ctx)
{
    auto query = [&](const PermitterQuery& q) { return ctx.query(q); };
    for (auto& m : advance(ctx.t(), ctx.inbox(), query, &ctx.trace()))
        ctx.disseminate(std::move(m));
}

std::int64_t LongestChainNode::height(Digest d) const
{
    auto it = blocks_.find(d);
    return it == blocks_.end() ? 0 : it->second->h;
}

bool LongestChainNode::accept(const PowBlockPtr& b) const
{
    if (b->h != height(b->par) + 1)
        return false;
    if (!reg_.verify(b->permit.sig) || b->permit.sig.signer != kOracleSigner || b->permit.sig.payload != b->permit.digest)
        return false;
    if (b->permit.sigma != powSigma(b->par, seqOf(b->T)) || leadingZeroBits(b->permit.tau) < params_.difficulty)
        return false;
    const TxSeq parentTr = b->par == genesisBlock()->digest ? TxSeq() : blocks_.at(b->par)->Tr;
    for (const auto& tx : b->T)
        if (!reg_.verify(tx->sig) || tx->sig.payload != tx->digest || parentTr.contains(tx->digest))
            return false;
    return b->Tr.digest() == TxSeq::extend(parentTr, b->T).digest();
}

void LongestChainNode::insert(const PowBlockPtr& b)
{
    bool known = b->par == genesisBlock()->digest || blocks_.count(b->par);
    if (!known) {
        orphans_[b->par].push_back(b);
        return;
    }
    if (blocks_.count(b->digest) || !accept(b))
        return;
    blocks_[b->digest] = b;
    auto it = orphans_.find(b->digest);
    if (it == orphans_.end())
        return;
    auto kids = std::move(it->second);
    orphans_.erase(it);
    for (const auto& k : kids)
        insert(k);
}

void LongestChainNode::chooseTip()
{
    for (const auto& [d, b] : blocks_) {
        std::int64_t h = height(tip_);
        if (b->h > h || (b->h == h && d < tip_))
            tip_ = d;
    }
}

Digest LongestChainNode::ancestorAt(Digest d, std::int64_t h) const
{
    while (height(d) > h)
        d = blocks_.at(d)->par;
    return d;
}

bool LongestChainNode::isAncestor(Digest a, Digest b) const
{
    return ancestorAt(b, height(a)) == a;
}

TxSeq LongestChainNode::confirmed() const
{
    if (!conf_)
        return TxSeq();
    return blocks_.at(*conf_)->Tr;
}

std::vector<MsgPtr> LongestChainNode::advance(Timeslot t, const std::vector<Received>& inbox, const QueryFn& query,
                                              TraceLog* trace)
{
    std::vector<MsgPtr> out;
    for (const auto& r : inbox) {
        const MsgPtr& m = r.env->msg;
        if (m->kind == MsgKind::Transaction) {
            auto tx = std::static_pointer_cast<const Transaction>(m);
            if (reg_.verify(tx->sig) && tx->sig.payload == tx->digest && tstarSet_.insert(tx->digest).second) {
                tstar_.push_back(tx);
                out.push_back(tx);
            }
        } else if (m->kind == MsgKind::ChainBlock) {
            insert(std::static_pointer_cast<const PowBlock>(m));
        }
    }
    chooseTip();

    std::int64_t ch = height(tip_) - params_.kappa;
    if (ch >= 1) {
        Digest c = ancestorAt(tip_, ch);
        if (!conf_ || *conf_ != c) {
            bool consistent = !conf_ || isAncestor(*conf_, c);
            conf_ = c;
            if (trace) {
                trace->add("conf", t, self_, c, json{{"h", ch}});
                if (!consistent && !sighted_)
                    trace->add("sight", t, self_, c, json{{"e", 0}});
            }
            if (!consistent)
                sighted_ = true;
        }
    }

    const TxSeq tipTr = tip_ == genesisBlock()->digest ? TxSeq() : blocks_.at(tip_)->Tr;
    std::vector<TxPtr> T;
    for (const auto& tx : tstar_)
        if (!tipTr.contains(tx->digest))
            T.push_back(tx);
    auto r = query(PermitterQuery{1, powSigma(tip_, seqOf(T))});
    if (leadingZeroBits(r.tau) >= params_.difficulty) {
        auto b = std::make_shared<PowBlock>();
        b->par = tip_;
        b->h = height(tip_) + 1;
        b->T = T;
        b->Tr = TxSeq::extend(tipTr, T);
        b->miner = self_;
        b->permit = r;
        Hasher hs;
        hs.add(std::string_view("powblock")).add(b->par).add(b->h).add(b->Tr.digest()).add(self_).add(r.digest);
        b->digest = hs.finish();
        out.push_back(b);
    }
    for (const auto& m : out)
        sent_.emplace_back(t, m);
    return out;
}

} // namespace post
