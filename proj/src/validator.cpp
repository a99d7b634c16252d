#include "post/validator.hpp"

#include <algorithm>

namespace post {

PostNode::PostNode(PlayerId self, std::vector<Identifier> ids, ProtocolParams params, StakeCache& stake,
                   SignatureRegistry& reg)
    : self_(self), ids_(std::move(ids)), params_(std::move(params)), stake_(stake), reg_(reg),
      store_(params_, stake, reg)
{
    std::sort(ids_.begin(), ids_.end());
    lockBlock_ = genesisBlock()->digest;
}

void PostNode::step(NodeContext& ctx)
{
    for (auto& m : advance(ctx.t(), ctx.inbox(), &ctx.trace()))
        ctx.disseminate(std::move(m));
}

void PostNode::log(const std::string& k, Timeslot t, Digest d, json extra)
{
    if (trace_)
        trace_->add(k, t, self_, d, std::move(extra));
}

std::optional<Timeslot> PostNode::epochBegan(std::int64_t e) const
{
    auto it = began_.find(e);
    if (it == began_.end())
        return std::nullopt;
    return it->second;
}

std::vector<MsgPtr> PostNode::advance(Timeslot t, const std::vector<Received>& inbox, TraceLog* trace)
{
    trace_ = trace;
    out_.clear();
    ingest(t, inbox);
    store_.refresh();
    afterRefresh(t);

    if (!end_) {
        eupdate(t);
        if (readyForRecovery(t)) {
            rec_ = true;
            if (holdsCog(e_ - 1))
                --e_;
            end_ = true;
            log("rec", t, 0, json{{"e", e_}});
        }
    }
    if (!end_) {
        Timeslot d = params_.delta;
        std::int64_t v = t / (4 * d);
        Timeslot r = t % (4 * d);
        if (v > 0) {
            if (r == 0)
                propose(v);
            else if (r == d)
                vote(v, 1);
            else if (r == 2 * d)
                vote(v, 2);
            else if (r == 3 * d && !params_.twoStage)
                vote(v, 3);
        }
    }
    if (rec_)
        recoveryStep(t);
    return std::exchange(out_, {});
}

void PostNode::ingest(Timeslot, const std::vector<Received>& inbox)
{
    for (const auto& r : inbox) {
        const MsgPtr& m = r.env->msg;
        switch (m->kind) {
        case MsgKind::Transaction: {
            auto tx = std::static_pointer_cast<const Transaction>(m);
            bool envTx = tx->type == TxKind::Payment || tx->type == TxKind::AddEscrow || tx->type == TxKind::RemoveEscrow;
            if (!envTx || !reg_.verify(tx->sig) || tx->sig.payload != tx->digest)
                break;
            if (tstarSet_.insert(tx->digest).second) {
                tstar_.push_back(tx);
                emit(tx);
            }
            break;
        }
        case MsgKind::Block:
        case MsgKind::Vote: store_.add(m); break;
        case MsgKind::ChainProposal: {
            auto c = std::static_pointer_cast<const ChainMessage>(m);
            if (!chainSeen_.insert(c->digest).second)
                break;
            if (const auto& g = c->y->cog) {
                store_.add(g->b);
                store_.add(g->bprime);
                for (const auto& v : g->q2.votes)
                    store_.add(v);
                for (const auto& v : g->q1.votes)
                    store_.add(v);
            }
            chains_.push_back(c);
            break;
        }
        default: break;
        }
    }
}

void PostNode::afterRefresh(Timeslot t)
{
    bool moved = false;
    for (auto d : store_.drainConfirmed()) {
        const Block& b = *store_.block(d);
        if (params_.epochEnding(b.h, b.e)) {
            endingByEpoch_[b.e].push_back(d);
            maxEnding_ = std::max(maxEnding_, b.e);
            log("econf", t, d, json{{"e", b.e}, {"v", b.v}});
        }
        bool consistent = true;
        if (!tip_) {
            tip_ = d;
            moved = true;
        } else if (b.h > store_.block(*tip_)->h) {
            consistent = store_.isAncestor(*tip_, d);
            tip_ = d;
            moved = true;
        } else {
            consistent = store_.isAncestor(d, *tip_);
        }
        if (!consistent && !sighted_) {
            sighted_ = true;
            log("sight", t, d, json{{"e", b.e}});
        }
    }
    if (moved && !recend_)
        log("conf", t, *tip_, json{{"h", store_.block(*tip_)->h}});
    for (const auto& g : store_.drainCogs()) {
        cogEpochs_.insert(g->epoch);
        json ids = g->implicated;
        log("cog", t, g->digest,
            json{{"e", g->epoch}, {"implicated", ids}, {"b", hex(g->b->digest)}, {"bp", hex(g->bprime->digest)}});
    }
}

std::optional<Digest> PostNode::epochBase(std::int64_t e) const
{
    if (e == 0)
        return genesisBlock()->digest;
    auto it = endingByEpoch_.find(e - 1);
    if (it == endingByEpoch_.end() || it->second.size() != 1)
        return std::nullopt;
    return it->second.front();
}

std::vector<Identifier> PostNode::positiveIds(const TxSeq& seq) const
{
    std::vector<Identifier> out;
    for (const auto& [id, c] : store_.stakeMap(seq))
        if (c > 0)
            out.push_back(id);
    return out;
}

std::optional<Identifier> PostNode::leader(std::int64_t v) const
{
    auto base = epochBase(e_);
    if (!base)
        return std::nullopt;
    const Block& b = *store_.block(*base);
    auto ids = positiveIds(b.Tr);
    std::int64_t i = v - b.v;
    if (ids.empty() || i <= 0)
        return std::nullopt;
    return ids[static_cast<std::size_t>(i % static_cast<std::int64_t>(ids.size()))];
}

void PostNode::eupdate(Timeslot t)
{
    e_ = maxEnding_ + 1;
    if (began_.emplace(e_, t).second) {
        log("epoch", t, 0, json{{"e", e_}});
        setQset();
    }
}

void PostNode::setQset()
{
    if (e_ == 0) {
        lockBlock_ = genesisBlock()->digest;
        lockView_ = 0;
        return;
    }
    const auto& cands = endingByEpoch_[e_ - 1];
    std::optional<Digest> best;
    for (auto d : cands) {
        if (!best || store_.viewOf(d) > store_.viewOf(*best))
            best = d;
    }
    if (best) {
        lockBlock_ = *best;
        lockView_ = store_.viewOf(*best);
    }
}

bool PostNode::readyForRecovery(Timeslot t) const
{
    if (holdsCog(e_ - 1))
        return true;
    auto began = epochBegan(e_);
    return began && *began < t - 2 * params_.deltaStar && holdsCog(e_);
}

bool PostNode::admissible(const Block& b, std::int64_t v) const
{
    if (!store_.valid(b.digest) || b.v != v || b.e != e_)
        return false;
    auto lead = leader(v);
    if (!lead || *lead != b.proposer)
        return false;
    return lockView_ <= store_.viewOf(b.par);
}

void PostNode::propose(std::int64_t v)
{
    auto lead = leader(v);
    if (!lead || !std::binary_search(ids_.begin(), ids_.end(), *lead))
        return;
    BlockPtr parent;
    for (auto d : store_.arrival()) {
        auto* bi = store_.info(d);
        if (!bi->valid || !bi->qc[1] || bi->b->e != e_)
            continue;
        if (!parent || bi->b->v > parent->v)
            parent = bi->b;
    }
    if (!parent) {
        std::int64_t saved = lockView_;
        Digest savedBlock = lockBlock_;
        setQset();
        parent = store_.block(lockBlock_);
        lockView_ = saved;
        lockBlock_ = savedBlock;
    }
    if (!parent)
        return;
    std::set<Digest> have;
    for (const auto& tx : parent->Tr.items())
        have.insert(tx->digest);
    std::vector<TxPtr> T;
    for (const auto& tx : tstar_)
        if (!have.count(tx->digest))
            T.push_back(tx);
    if (params_.epochEnding(parent->h + 1, e_))
        T.push_back(makeEpochMarker(e_));
    std::vector<VotePtr> qcprev;
    if (!parent->genesis)
        qcprev = store_.qc(parent->digest, 1).votes;
    emit(makeBlock(self_, *lead, v, e_, *parent, std::move(qcprev), std::move(T), reg_));
}

void PostNode::vote(std::int64_t v, int s)
{
    if (s == 1) {
        bstar_.reset();
        for (auto d : store_.arrival()) {
            const Block& b = *store_.block(d);
            if (admissible(b, v)) {
                bstar_ = d;
                bstarT_ = b.Tval;
                bstarVprev_ = store_.viewOf(b.par);
                break;
            }
        }
    } else {
        if (!bstar_ || !store_.hasQC(*bstar_, s - 1))
            return;
        if (s == 2) {
            lockBlock_ = *bstar_;
            lockView_ = store_.viewOf(*bstar_);
        }
    }
    if (!bstar_)
        return;
    for (auto id : ids_) {
        auto c = store_.stakeUnder(bstarT_, id);
        if (c > 0)
            emit(makeVote(self_, *bstar_, c, s, id, bstarVprev_, reg_));
    }
}

CogPtr PostNode::bestCog() const
{
    CogPtr best;
    for (const auto& g : store_.cogs()) {
        if (g->epoch != e_)
            continue;
        if (!best || g->implicated.size() > best->implicated.size() ||
            (g->implicated.size() == best->implicated.size() && g->digest < best->digest))
            best = g;
    }
    return best;
}

bool PostNode::chainValid(const ChainMessage& m, std::int64_t i) const
{
    const auto& y = *m.y;
    if (y.instance != i || y.epoch != e_ || y.base != recBase_ || !y.cog || y.cog->epoch != e_)
        return false;
    if (!chainSignaturesValid(m, reg_))
        return false;
    auto signers = m.signers();
    auto k = static_cast<std::int64_t>(recIds_.size());
    if (signers.front() != recIds_[static_cast<std::size_t>(i % k)])
        return false;
    for (auto id : signers)
        if (!std::binary_search(recIds_.begin(), recIds_.end(), id))
            return false;
    if (y.marker->type != TxKind::EpochMarker || y.guilt->type != TxKind::Guilt || y.guilt->nonce != y.cog->digest ||
        y.guilt->implicated != y.cog->implicated)
        return false;
    if (y.bg != TxSeq::extend(recT_, {y.guilt, y.marker}).digest())
        return false;
    return store_.verifyCog(*y.cog);
}

void PostNode::recoveryStep(Timeslot t)
{
    if (!recInit_) {
        auto s = recoverySchedule(e_, params_.x, params_.delta, params_.deltaStar, 0);
        if (t < s.init)
            return;
        auto base = epochBase(e_);
        if (!base)
            return;
        recBase_ = *base;
        recT_ = store_.block(recBase_)->Tr;
        recIds_ = positiveIds(recT_);
        if (recIds_.empty())
            return;
        sched_ = recoverySchedule(e_, params_.x, params_.delta, params_.deltaStar,
                                  static_cast<std::int64_t>(recIds_.size()));
        recInit_ = true;
        log("recinit", t, recBase_, json{{"e", e_}, {"k", sched_.k}, {"init", sched_.init}});
    }
    if (recend_)
        return;
    Timeslot L = (sched_.k + 1) * sched_.deltaStar;
    Timeslot off = t - sched_.init;
    std::int64_t i = off / L;
    Timeslot o = off % L;
    if (i != instance_) {
        instance_ = i;
        O_.clear();
        Ovals_.clear();
    }
    if (o == 0) {
        Identifier lead = recIds_[static_cast<std::size_t>(i % sched_.k)];
        if (std::binary_search(ids_.begin(), ids_.end(), lead)) {
            if (auto g = bestCog()) {
                auto y = makeProposal(e_, i, *store_.block(recBase_), g);
                log("prop", t, y->bg, json{{"i", i}, {"guilt", hex(y->guilt->digest)}});
                emit(startChain(y, self_, lead, reg_));
            }
        }
        return;
    }
    if (o % sched_.deltaStar != 0)
        return;
    std::int64_t j = o / sched_.deltaStar;
    std::size_t before = O_.size();
    for (const auto& m : chains_) {
        if (static_cast<std::int64_t>(m->sigs.size()) != j || !chainValid(*m, i))
            continue;
        if (O_.count(m->y->digest))
            continue;
        if (j < sched_.k) {
            auto signers = m->signers();
            for (auto id : ids_) {
                if (!std::binary_search(recIds_.begin(), recIds_.end(), id) ||
                    std::find(signers.begin(), signers.end(), id) != signers.end())
                    continue;
                emit(extendChain(*m, self_, id, reg_));
            }
        }
        O_.insert(m->y->digest);
        Ovals_[m->y->digest] = m->y;
    }
    if (O_.size() != before || j == sched_.k) {
        json values = json::array();
        for (const auto& [d, y] : Ovals_)
            values.push_back(hex(y->bg));
        log("oset", t, 0, json{{"i", i}, {"j", j}, {"O", values}});
    }
    if (j == sched_.k && O_.size() == 1) {
        const auto& y = Ovals_.begin()->second;
        for (auto id : ids_) {
            auto c = store_.stakeUnder(recT_, id);
            if (c > 0)
                emit(makeOutputVote(self_, y->bg, i, c, id, reg_));
        }
        recend_ = true;
        bg_ = y->bg;
        json ids = y->guilt->implicated;
        log("recend", t, y->bg,
            json{{"i", i}, {"e", e_}, {"implicated", ids}, {"guilt", hex(y->guilt->digest)}, {"base", hex(recBase_)}});
        log("conf", t, y->bg, json{{"gen", true}});
    }
}

} // namespace post
