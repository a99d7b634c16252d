#include "post/identity.hpp"

#include <algorithm>

namespace post {

const char* kindName(MsgKind k)
{
    switch (k) {
    case MsgKind::Transaction: return "tx";
    case MsgKind::Block: return "block";
    case MsgKind::Vote: return "vote";
    case MsgKind::ChainProposal: return "chain";
    case MsgKind::OutputVote: return "ovote";
    case MsgKind::ChainBlock: return "lcblock";
    }
    return "?";
}

const char* txKindName(TxKind k)
{
    switch (k) {
    case TxKind::Payment: return "pay";
    case TxKind::AddEscrow: return "add";
    case TxKind::RemoveEscrow: return "remove";
    case TxKind::EpochMarker: return "epoch";
    case TxKind::Guilt: return "guilt";
    }
    return "?";
}

void SignatureRegistry::assign(PlayerId p, Identifier id)
{
    auto [it, inserted] = owners_.emplace(id, p);
    if (!inserted && it->second != p)
        throw ScenarioError("identifier " + std::to_string(id) + " assigned to two players");
}

std::optional<PlayerId> SignatureRegistry::owner(Identifier id) const
{
    auto it = owners_.find(id);
    if (it == owners_.end())
        return std::nullopt;
    return it->second;
}

SignatureToken SignatureRegistry::sign(PlayerId p, Identifier id, Digest payload)
{
    auto o = owner(id);
    if (!o || *o != p)
        throw ScenarioError("player " + std::to_string(p) + " cannot sign for identifier " + std::to_string(id));
    minted_.insert({id, payload});
    return {id, payload};
}

SignatureToken SignatureRegistry::signAsOracle(Digest payload)
{
    minted_.insert({kOracleSigner, payload});
    return {kOracleSigner, payload};
}

SignatureToken SignatureRegistry::signAsEnvironment(Digest payload)
{
    minted_.insert({kEnvironmentSigner, payload});
    return {kEnvironmentSigner, payload};
}

bool SignatureRegistry::verify(const SignatureToken& tok) const
{
    return minted_.count({tok.signer, tok.payload}) > 0;
}

json Transaction::describe() const
{
    json j{{"kind", "tx"}, {"type", txKindName(type)}};
    switch (type) {
    case TxKind::Payment: j["nonce"] = nonce; break;
    case TxKind::AddEscrow:
    case TxKind::RemoveEscrow:
        j["id"] = target;
        j["nonce"] = nonce;
        break;
    case TxKind::EpochMarker: j["epoch"] = epoch; break;
    case TxKind::Guilt:
        j["epoch"] = epoch;
        j["implicated"] = implicated;
        j["cert"] = hex(nonce);
        break;
    }
    return j;
}

bool Transaction::implicates(Identifier id) const
{
    return type == TxKind::Guilt && std::binary_search(implicated.begin(), implicated.end(), id);
}

namespace {

std::shared_ptr<Transaction> envTx(TxKind type, Identifier target, std::uint64_t nonce, SignatureRegistry& reg)
{
    auto tx = std::make_shared<Transaction>();
    tx->type = type;
    tx->target = target;
    tx->nonce = nonce;
    tx->digest = Hasher().add(std::string_view(txKindName(type))).add(target).add(nonce).finish();
    tx->sig = reg.signAsEnvironment(tx->digest);
    return tx;
}

} // namespace

TxPtr makePayment(std::uint64_t nonce, SignatureRegistry& reg)
{
    return envTx(TxKind::Payment, 0, nonce, reg);
}

TxPtr makeAddEscrow(Identifier id, SignatureRegistry& reg, std::uint64_t nonce)
{
    return envTx(TxKind::AddEscrow, id, nonce, reg);
}

TxPtr makeRemoveEscrow(Identifier id, SignatureRegistry& reg, std::uint64_t nonce)
{
    return envTx(TxKind::RemoveEscrow, id, nonce, reg);
}

TxPtr makeEpochMarker(std::int64_t epoch)
{
    auto tx = std::make_shared<Transaction>();
    tx->type = TxKind::EpochMarker;
    tx->epoch = epoch;
    tx->digest = Hasher().add(std::string_view("epoch")).add(epoch).finish();
    return tx;
}

TxPtr makeGuiltTx(std::shared_ptr<const CertificateOfGuilt> g, std::int64_t epoch,
                  std::vector<Identifier> implicated, Digest certDigest)
{
    auto tx = std::make_shared<Transaction>();
    tx->type = TxKind::Guilt;
    tx->epoch = epoch;
    tx->guilt = std::move(g);
    std::sort(implicated.begin(), implicated.end());
    tx->implicated = std::move(implicated);
    tx->nonce = certDigest;
    tx->digest = Hasher().add(std::string_view("guilt")).add(certDigest).finish();
    return tx;
}

TxPtr txFromJson(const json& j, Digest digest)
{
    auto tx = std::make_shared<Transaction>();
    std::string type = j.at("type");
    if (type == "pay") {
        tx->type = TxKind::Payment;
        tx->nonce = j.at("nonce");
    } else if (type == "add" || type == "remove") {
        tx->type = type == "add" ? TxKind::AddEscrow : TxKind::RemoveEscrow;
        tx->target = j.at("id");
        tx->nonce = j.at("nonce");
    } else if (type == "epoch") {
        tx->type = TxKind::EpochMarker;
        tx->epoch = j.at("epoch");
    } else if (type == "guilt") {
        tx->type = TxKind::Guilt;
        tx->epoch = j.at("epoch");
        tx->implicated = j.at("implicated").get<std::vector<Identifier>>();
        tx->nonce = parseHex(j.at("cert").get<std::string>());
    } else {
        throw ScenarioError("unknown transaction type " + type);
    }
    tx->digest = digest;
    return tx;
}

TxSeq::TxSeq() : items_(std::make_shared<const std::vector<TxPtr>>()), digest_(Hasher().add(std::string_view("txseq")).finish()) {}

TxSeq TxSeq::extend(const TxSeq& base, const std::vector<TxPtr>& more)
{
    if (more.empty())
        return base;
    auto v = std::make_shared<std::vector<TxPtr>>(*base.items_);
    Digest d = base.digest_;
    for (const auto& tx : more) {
        v->push_back(tx);
        d = Hasher().add(d).add(tx->digest).finish();
    }
    TxSeq out;
    out.items_ = std::move(v);
    out.digest_ = d;
    return out;
}

bool TxSeq::isPrefixOf(const TxSeq& other) const
{
    if (size() > other.size())
        return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (items()[i]->digest != other.items()[i]->digest)
            return false;
    return true;
}

bool TxSeq::contains(Digest tx) const
{
    return std::any_of(items_->begin(), items_->end(), [&](const TxPtr& t) { return t->digest == tx; });
}

bool prefixComparable(const std::vector<Digest>& a, const std::vector<Digest>& b)
{
    std::size_t n = std::min(a.size(), b.size());
    return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), b.begin());
}

namespace {

struct EscrowState {
    bool escrowed = false;
    bool slashed = false;
};

std::map<Identifier, EscrowState> scanEscrow(const InitialDistribution& sstar, const std::vector<TxPtr>& T,
                                             std::size_t end)
{
    std::map<Identifier, EscrowState> st;
    for (const auto& [id, units] : sstar)
        if (units > 0)
            st[id].escrowed = true;
    for (std::size_t i = 0; i < end; ++i) {
        const auto& tx = *T[i];
        switch (tx.type) {
        case TxKind::AddEscrow: st[tx.target].escrowed = true; break;
        case TxKind::RemoveEscrow: st[tx.target].escrowed = false; break;
        case TxKind::Guilt:
            for (auto id : tx.implicated)
                st[id].slashed = true;
            break;
        default: break;
        }
    }
    return st;
}

std::optional<std::size_t> lastMarker(const std::vector<TxPtr>& T)
{
    for (std::size_t i = T.size(); i-- > 0;)
        if (T[i]->type == TxKind::EpochMarker)
            return i;
    return std::nullopt;
}

} // namespace

std::uint64_t evalStake(const InitialDistribution& sstar, const StakeParams& params,
                        const std::vector<TxPtr>& T, Identifier id)
{
    auto m = stakeMap(sstar, params, T);
    auto it = m.find(id);
    return it == m.end() ? 0 : it->second;
}

StakeMap stakeMap(const InitialDistribution& sstar, const StakeParams& params, const std::vector<TxPtr>& T)
{
    StakeMap out;
    auto last = lastMarker(T);
    if (!last) {
        for (const auto& [id, units] : sstar)
            if (units > 0)
                out[id] = units;
        return out;
    }
    for (const auto& [id, st] : scanEscrow(sstar, T, *last + 1))
        if (st.escrowed && !st.slashed)
            out[id] = params.quantum();
    return out;
}

const StakeMap& StakeCache::get(const TxSeq& seq)
{
    auto it = cache_.find(seq.digest());
    if (it != cache_.end())
        return it->second;
    return cache_.emplace(seq.digest(), stakeMap(sstar_, params_, seq.items())).first->second;
}

std::uint64_t StakeCache::stake(const TxSeq& seq, Identifier id)
{
    const auto& m = get(seq);
    auto it = m.find(id);
    return it == m.end() ? 0 : it->second;
}

std::uint64_t StakeCache::total(const TxSeq& seq)
{
    std::uint64_t sum = 0;
    for (const auto& [id, c] : get(seq))
        sum += c;
    return sum;
}

std::vector<TxPtr> zeroOutSet(const InitialDistribution&, const std::set<Identifier>& ids, SignatureRegistry& reg)
{
    std::vector<TxPtr> out;
    for (auto id : ids)
        out.push_back(makeRemoveEscrow(id, reg));
    return out;
}

} // namespace post
