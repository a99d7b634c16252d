#include "post/post.hpp"

#include <algorithm>

namespace post {

json Vote::describe() const
{
    return json{{"kind", "vote"}, {"b", hex(block)}, {"c", c}, {"s", s}, {"id", id}, {"vprev", vprev}};
}

Digest voteDigest(Digest block, std::uint64_t c, int s, Identifier id, std::int64_t vprev)
{
    return Hasher().add(std::string_view("vote")).add(block).add(c).add(s).add(id).add(vprev).finish();
}

VotePtr makeVote(PlayerId p, Digest block, std::uint64_t c, int s, Identifier id, std::int64_t vprev,
                 SignatureRegistry& reg)
{
    auto v = std::make_shared<Vote>();
    v->block = block;
    v->c = c;
    v->s = s;
    v->id = id;
    v->vprev = vprev;
    v->digest = voteDigest(block, c, s, id, vprev);
    v->sig = reg.sign(p, id, v->digest);
    return v;
}

json Block::describe() const
{
    if (genesis)
        return json{{"kind", "block"}, {"genesis", true}};
    json qc = json::array();
    for (const auto& v : qcprev)
        qc.push_back(hex(v->digest));
    json txs = json::array();
    for (const auto& tx : T)
        txs.push_back(hex(tx->digest));
    return json{{"kind", "block"}, {"h", h},          {"v", v},
                {"e", e},          {"par", hex(par)}, {"qcprev", qc},
                {"T", txs},        {"tr", hex(Tr.digest())}, {"tval", hex(Tval.digest())},
                {"proposer", proposer}};
}

void Block::nested(std::vector<const Message*>& out) const
{
    for (const auto& tx : T)
        out.push_back(tx.get());
    for (const auto& v : qcprev)
        out.push_back(v.get());
}

Digest Block::computeDigest() const
{
    if (genesis)
        return Hasher().add(std::string_view("genesis")).finish();
    Hasher hs;
    hs.add(std::string_view("block")).add(h).add(v).add(e).add(par);
    hs.add(static_cast<std::uint64_t>(qcprev.size()));
    for (const auto& q : qcprev)
        hs.add(q->digest);
    hs.add(static_cast<std::uint64_t>(T.size()));
    for (const auto& tx : T)
        hs.add(tx->digest);
    hs.add(Tr.digest()).add(Tval.digest()).add(proposer);
    return hs.finish();
}

BlockPtr genesisBlock()
{
    static const BlockPtr g = [] {
        auto b = std::make_shared<Block>();
        b->genesis = true;
        b->digest = b->computeDigest();
        return b;
    }();
    return g;
}

BlockPtr makeBlock(PlayerId p, Identifier proposer, std::int64_t v, std::int64_t e, const Block& parent,
                   std::vector<VotePtr> qcprev, std::vector<TxPtr> T, SignatureRegistry& reg)
{
    auto b = std::make_shared<Block>();
    b->h = parent.h + 1;
    b->v = v;
    b->e = e;
    b->par = parent.digest;
    b->qcprev = std::move(qcprev);
    b->T = std::move(T);
    b->Tr = TxSeq::extend(parent.Tr, b->T);
    b->Tval = e == parent.e ? parent.Tval : parent.Tr;
    b->proposer = proposer;
    b->digest = b->computeDigest();
    b->sig = reg.sign(p, proposer, b->digest);
    return b;
}

std::set<Identifier> QuorumCertificate::ids() const
{
    std::set<Identifier> out;
    for (const auto& v : votes)
        out.insert(v->id);
    return out;
}

Digest QuorumCertificate::digest() const
{
    std::vector<Digest> ds;
    for (const auto& v : votes)
        ds.push_back(v->digest);
    std::sort(ds.begin(), ds.end());
    Hasher hs;
    hs.add(std::string_view("qc")).add(block).add(s);
    for (auto d : ds)
        hs.add(d);
    return hs.finish();
}

CogPtr makeCog(std::int64_t epoch, QuorumCertificate q2, QuorumCertificate q1, BlockPtr b, BlockPtr bprime)
{
    auto g = std::make_shared<CertificateOfGuilt>();
    g->epoch = epoch;
    auto a = q2.ids();
    auto c = q1.ids();
    std::set_intersection(a.begin(), a.end(), c.begin(), c.end(), std::back_inserter(g->implicated));
    g->digest = Hasher().add(std::string_view("cog")).add(epoch).add(q2.digest()).add(q1.digest()).finish();
    g->q2 = std::move(q2);
    g->q1 = std::move(q1);
    g->b = std::move(b);
    g->bprime = std::move(bprime);
    return g;
}

TxPtr guiltTx(const CogPtr& g)
{
    return makeGuiltTx(g, g->epoch, g->implicated, g->digest);
}

MessageStore::MessageStore(const ProtocolParams& params, StakeCache& stake, const SignatureRegistry& reg)
    : params_(params), stake_(stake), reg_(reg)
{
    auto g = genesisBlock();
    BlockInfo gi;
    gi.b = g;
    gi.valid = true;
    gi.votesOpen = true;
    gi.qc[1] = true;
    blocks_.emplace(g->digest, std::move(gi));
    seen_.insert(g->digest);
}

bool MessageStore::add(const MsgPtr& m)
{
    if (!seen_.insert(m->digest).second)
        return false;
    if (m->kind == MsgKind::Block) {
        addBlock(std::static_pointer_cast<const Block>(m));
        return true;
    }
    if (m->kind == MsgKind::Vote) {
        addVote(std::static_pointer_cast<const Vote>(m));
        return true;
    }
    return false;
}

void MessageStore::addBlock(const BlockPtr& b)
{
    if (b->genesis || b->computeDigest() != b->digest)
        return;
    BlockInfo bi;
    bi.b = b;
    bi.arrival = arrival_.size();
    auto& ref = blocks_.emplace(b->digest, std::move(bi)).first->second;
    arrival_.push_back(b->digest);
    unsettled_.push_back(b->digest);
    byEpoch_[b->e].push_back(b->digest);
    children_[b->par].push_back(b->digest);
    for (const auto& v : b->qcprev)
        if (seen_.insert(v->digest).second)
            addVote(v);
    if (blocks_.count(b->par))
        openVotes(ref);
    auto kids = children_.find(b->digest);
    if (kids != children_.end())
        for (auto c : kids->second)
            openVotes(blocks_.at(c));
}

void MessageStore::openVotes(BlockInfo& bi)
{
    if (bi.votesOpen)
        return;
    bi.votesOpen = true;
    bi.N = stake_.total(bi.b->Tval);
    auto it = pendingVotes_.find(bi.b->digest);
    if (it == pendingVotes_.end())
        return;
    auto votes = std::move(it->second);
    pendingVotes_.erase(it);
    for (const auto& v : votes)
        recordVote(bi, v);
}

void MessageStore::addVote(const VotePtr& v)
{
    auto it = blocks_.find(v->block);
    if (it == blocks_.end() || !it->second.votesOpen) {
        pendingVotes_[v->block].push_back(v);
        return;
    }
    recordVote(it->second, v);
}

void MessageStore::recordVote(BlockInfo& bi, const VotePtr& v)
{
    const Block& b = *bi.b;
    if (b.genesis || v->s < 1 || v->s > params_.stages())
        return;
    if (v->digest != voteDigest(v->block, v->c, v->s, v->id, v->vprev))
        return;
    if (!reg_.verify(v->sig) || v->sig.signer != v->id || v->sig.payload != v->digest)
        return;
    if (v->vprev != blocks_.at(b.par).b->v)
        return;
    if (v->c == 0 || v->c != stake_.stake(b.Tval, v->id))
        return;
    if (!bi.votes[v->s].emplace(v->id, v).second)
        return;
    bi.sum[v->s] += v->c;
    if (!bi.qc[v->s] && meetsQuorum(bi.sum[v->s], bi.N)) {
        bi.qc[v->s] = true;
        qcEvents_.emplace_back(b.digest, v->s);
    }
}

bool MessageStore::meetsQuorum(std::uint64_t sum, std::uint64_t N) const
{
    if (sum == 0)
        return false;
    using boost::multiprecision::cpp_int;
    return cpp_int(sum) * boost::multiprecision::denominator(params_.q) >=
           cpp_int(N) * boost::multiprecision::numerator(params_.q);
}

bool MessageStore::checkValid(const BlockInfo& bi) const
{
    const Block& b = *bi.b;
    auto pit = blocks_.find(b.par);
    if (pit == blocks_.end() || !pit->second.valid)
        return false;
    const BlockInfo& pi = pit->second;
    const Block& par = *pi.b;
    if (b.h != par.h + 1)
        return false;
    bool parEnding = !par.genesis && params_.epochEnding(par.h, par.e);
    if (parEnding ? (b.e != par.e && b.e != par.e + 1) : b.e != par.e)
        return false;
    if (b.e == par.e + 1 && !pi.confirmed)
        return false;

    if (par.genesis) {
        if (!b.qcprev.empty())
            return false;
    } else {
        std::set<Identifier> ids;
        std::uint64_t sum = 0;
        for (const auto& v : b.qcprev) {
            if (v->block != par.digest || v->s != 1 || !ids.insert(v->id).second)
                return false;
            auto it = pi.votes[1].find(v->id);
            if (it == pi.votes[1].end() || it->second->digest != v->digest)
                return false;
            sum += v->c;
        }
        if (!meetsQuorum(sum, pi.N))
            return false;
    }

    bool ending = params_.epochEnding(b.h, b.e);
    for (std::size_t i = 0; i < b.T.size(); ++i) {
        const auto& tx = *b.T[i];
        bool last = i + 1 == b.T.size();
        if (tx.type == TxKind::EpochMarker) {
            if (!last || !ending || tx.epoch != b.e)
                return false;
            continue;
        }
        if (tx.type == TxKind::Guilt)
            return false;
        if (!reg_.verify(tx.sig) || tx.sig.signer != kEnvironmentSigner || tx.sig.payload != tx.digest)
            return false;
    }
    bool endsWithMarker = !b.T.empty() && b.T.back()->type == TxKind::EpochMarker;
    if (ending != endsWithMarker)
        return false;

    if (b.Tr.digest() != TxSeq::extend(par.Tr, b.T).digest())
        return false;
    if (b.Tval.digest() != (b.e == par.e ? par.Tval.digest() : par.Tr.digest()))
        return false;
    if (!reg_.verify(b.sig) || b.sig.signer != b.proposer || b.sig.payload != b.digest)
        return false;
    return true;
}

void MessageStore::refresh()
{
    bool changed = true;
    while (changed || !qcEvents_.empty()) {
        changed = false;
        std::vector<Digest> still;
        for (auto d : unsettled_) {
            auto& bi = blocks_.at(d);
            if (checkValid(bi)) {
                bi.valid = true;
                changed = true;
                for (int s = 1; s <= 3; ++s)
                    if (bi.qc[s])
                        qcEvents_.emplace_back(d, s);
            } else {
                still.push_back(d);
            }
        }
        unsettled_ = std::move(still);
        auto events = std::move(qcEvents_);
        qcEvents_.clear();
        std::size_t before = confirmedList_.size();
        for (auto [d, s] : events)
            if (blocks_.at(d).valid)
                onQC(d, s);
        if (confirmedList_.size() != before)
            changed = true;
    }
}

void MessageStore::onQC(Digest d, int s)
{
    auto& bi = blocks_.at(d);
    bool all = true;
    for (int k = 1; k <= params_.stages(); ++k)
        all = all && bi.qc[k];
    if (all && !bi.certified)
        certify(bi);
    if (s <= 2)
        pairGuilt(d, s);
}

void MessageStore::certify(BlockInfo& bi)
{
    bi.certified = true;
    std::int64_t e = bi.b->e;
    BlockInfo* cur = &bi;
    while (!cur->b->genesis && cur->b->e == e) {
        if (cur->b->h <= (e + 1) * params_.x) {
            if (cur->confirmed)
                break;
            cur->confirmed = true;
            confirmedList_.push_back(cur->b->digest);
            newConfirmed_.push_back(cur->b->digest);
        }
        cur = &blocks_.at(cur->b->par);
    }
}

void MessageStore::pairGuilt(Digest d, int s)
{
    const auto& bi = blocks_.at(d);
    const Block& b = *bi.b;
    for (auto o : byEpoch_[b.e]) {
        if (o == d)
            continue;
        const auto& oi = blocks_.at(o);
        if (!oi.valid)
            continue;
        const Block& ob = *oi.b;
        if (s == 2) {
            if (oi.qc[1] && ob.v >= b.v && viewOf(ob.par) < b.v && incompatible(d, o))
                addCog(bi, oi);
        } else {
            if (oi.qc[2] && b.v >= ob.v && viewOf(b.par) < ob.v && incompatible(d, o))
                addCog(oi, bi);
        }
    }
}

void MessageStore::addCog(const BlockInfo& b2, const BlockInfo& b1)
{
    if (!cogPairs_.insert({b2.b->digest, b1.b->digest}).second)
        return;
    auto g = makeCog(b2.b->e, qc(b2.b->digest, 2), qc(b1.b->digest, 1), b2.b, b1.b);
    cogs_.push_back(g);
    newCogs_.push_back(g);
}

bool MessageStore::verifyCog(const CertificateOfGuilt& g) const
{
    if (!g.b || !g.bprime)
        return false;
    auto* bi = info(g.b->digest);
    auto* pi = info(g.bprime->digest);
    if (!bi || !pi || !bi->valid || !pi->valid)
        return false;
    if (bi->b->e != g.epoch || pi->b->e != g.epoch || !incompatible(bi->b->digest, pi->b->digest))
        return false;
    if (pi->b->v < bi->b->v || viewOf(pi->b->par) >= bi->b->v)
        return false;
    auto checkQC = [&](const QuorumCertificate& q, const BlockInfo& target, int s) {
        if (q.block != target.b->digest || q.s != s)
            return false;
        std::set<Identifier> ids;
        std::uint64_t sum = 0;
        for (const auto& v : q.votes) {
            auto it = target.votes[s].find(v->id);
            if (it == target.votes[s].end() || it->second->digest != v->digest || !ids.insert(v->id).second)
                return false;
            sum += v->c;
        }
        return meetsQuorum(sum, target.N);
    };
    if (!checkQC(g.q2, *bi, 2) || !checkQC(g.q1, *pi, 1))
        return false;
    auto a = g.q2.ids();
    auto c = g.q1.ids();
    std::vector<Identifier> both;
    std::set_intersection(a.begin(), a.end(), c.begin(), c.end(), std::back_inserter(both));
    return both == g.implicated &&
           g.digest == Hasher().add(std::string_view("cog")).add(g.epoch).add(g.q2.digest()).add(g.q1.digest()).finish();
}

const MessageStore::BlockInfo* MessageStore::info(Digest d) const
{
    auto it = blocks_.find(d);
    return it == blocks_.end() ? nullptr : &it->second;
}

BlockPtr MessageStore::block(Digest d) const
{
    auto* bi = info(d);
    return bi ? bi->b : nullptr;
}

bool MessageStore::valid(Digest d) const
{
    auto* bi = info(d);
    return bi && bi->valid;
}

bool MessageStore::confirmed(Digest d) const
{
    auto* bi = info(d);
    return bi && bi->confirmed;
}

bool MessageStore::hasQC(Digest d, int s) const
{
    auto* bi = info(d);
    return bi && s >= 1 && s <= 3 && bi->qc[s];
}

QuorumCertificate MessageStore::qc(Digest d, int s) const
{
    QuorumCertificate q;
    q.block = d;
    q.s = s;
    if (auto* bi = info(d))
        for (const auto& [id, v] : bi->votes[s])
            q.votes.push_back(v);
    return q;
}

std::int64_t MessageStore::viewOf(Digest d) const
{
    auto* bi = info(d);
    return bi ? bi->b->v : -1;
}

bool MessageStore::isAncestor(Digest a, Digest b) const
{
    auto* ai = info(a);
    if (!ai)
        return false;
    std::int64_t ha = ai->b->h;
    Digest cur = b;
    while (auto* ci = info(cur)) {
        if (cur == a)
            return true;
        if (ci->b->genesis || ci->b->h <= ha)
            return false;
        cur = ci->b->par;
    }
    return false;
}

std::vector<Digest> MessageStore::drainConfirmed()
{
    return std::exchange(newConfirmed_, {});
}

std::vector<CogPtr> MessageStore::drainCogs()
{
    return std::exchange(newCogs_, {});
}

} // namespace post
