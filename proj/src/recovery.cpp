#include "post/recovery.hpp"

#include <algorithm>

namespace post {

ProposalPtr makeProposal(std::int64_t epoch, std::int64_t instance, const Block& base, CogPtr g)
{
    auto y = std::make_shared<GenesisProposal>();
    y->epoch = epoch;
    y->instance = instance;
    y->base = base.digest;
    y->baseTr = base.Tr;
    y->guilt = guiltTx(g);
    y->cog = std::move(g);
    y->marker = makeEpochMarker(epoch);
    y->bg = y->transactions().digest();
    y->digest = Hasher().add(std::string_view("proposal")).add(y->bg).add(instance).finish();
    return y;
}

json ChainMessage::describe() const
{
    return json{{"kind", "chain"},
                {"e", y->epoch},
                {"i", y->instance},
                {"base", hex(y->base)},
                {"bg", hex(y->bg)},
                {"guilt", hex(y->guilt->digest)},
                {"marker", hex(y->marker->digest)},
                {"signers", signers()}};
}

void ChainMessage::nested(std::vector<const Message*>& out) const
{
    out.push_back(y->guilt.get());
    out.push_back(y->marker.get());
}

std::vector<Identifier> ChainMessage::signers() const
{
    std::vector<Identifier> out;
    for (const auto& s : sigs)
        out.push_back(s.signer);
    return out;
}

Digest chainPayload(Digest y, const std::vector<Identifier>& prefix)
{
    Hasher hs;
    hs.add(std::string_view("chainsig")).add(y);
    for (auto id : prefix)
        hs.add(id);
    return hs.finish();
}

namespace {

ChainPtr finishChain(std::shared_ptr<ChainMessage> m)
{
    Hasher hs;
    hs.add(std::string_view("chain")).add(m->y->digest);
    for (const auto& s : m->sigs)
        hs.add(s.signer);
    m->digest = hs.finish();
    return m;
}

} // namespace

ChainPtr startChain(ProposalPtr y, PlayerId p, Identifier id, SignatureRegistry& reg)
{
    auto m = std::make_shared<ChainMessage>();
    m->y = std::move(y);
    m->sigs.push_back(reg.sign(p, id, chainPayload(m->y->digest, {id})));
    return finishChain(m);
}

ChainPtr extendChain(const ChainMessage& base, PlayerId p, Identifier id, SignatureRegistry& reg)
{
    auto m = std::make_shared<ChainMessage>(base);
    auto ids = base.signers();
    ids.push_back(id);
    m->sigs.push_back(reg.sign(p, id, chainPayload(m->y->digest, ids)));
    return finishChain(m);
}

bool chainSignaturesValid(const ChainMessage& m, const SignatureRegistry& reg)
{
    std::vector<Identifier> prefix;
    std::set<Identifier> seen;
    for (const auto& s : m.sigs) {
        if (!seen.insert(s.signer).second)
            return false;
        prefix.push_back(s.signer);
        if (s.payload != chainPayload(m.y->digest, prefix) || !reg.verify(s))
            return false;
    }
    return !m.sigs.empty();
}

json OutputVote::describe() const
{
    return json{{"kind", "ovote"}, {"bg", hex(bg)}, {"i", instance}, {"c", c}, {"id", id}};
}

OutputVotePtr makeOutputVote(PlayerId p, Digest bg, std::int64_t instance, std::uint64_t c, Identifier id,
                             SignatureRegistry& reg)
{
    auto v = std::make_shared<OutputVote>();
    v->bg = bg;
    v->instance = instance;
    v->c = c;
    v->id = id;
    v->digest = Hasher().add(std::string_view("ovote")).add(bg).add(instance).add(c).add(id).finish();
    v->sig = reg.sign(p, id, v->digest);
    return v;
}

RecoverySchedule recoverySchedule(std::int64_t e, std::int64_t x, Timeslot delta, Timeslot deltaStar, std::int64_t k)
{
    return {4 * delta * ((e + 2) * x + 1), k, deltaStar};
}

namespace ds {

Outcome run(const Setup& s, const ByzantineSends& adversary)
{
    auto honest = [&](int p) { return !s.byzantine.count(p); };
    std::set<Chain> produced;
    std::set<Chain> known;
    std::map<int, std::vector<Chain>> inbox;
    Outcome out;
    for (int p = 0; p < s.n; ++p)
        if (honest(p))
            out.O[p];

    auto deliver = [&](int to, const Chain& c) {
        inbox[to].push_back(c);
        if (!honest(to))
            known.insert(c);
    };
    auto validChain = [&](const Chain& c, int r) {
        if (static_cast<int>(c.signers.size()) != r || c.signers.front() != s.leader)
            return false;
        std::set<int> seen;
        for (std::size_t j = 0; j < c.signers.size(); ++j) {
            int id = c.signers[j];
            if (id < 0 || id >= s.n || !seen.insert(id).second)
                return false;
            Chain prefix{c.value, std::vector<int>(c.signers.begin(), c.signers.begin() + j + 1)};
            if (honest(id) && !produced.count(prefix))
                return false;
        }
        return true;
    };

    if (honest(s.leader)) {
        Chain c{s.input, {s.leader}};
        produced.insert(c);
        for (int q = 0; q < s.n; ++q)
            deliver(q, c);
    }
    for (int r = 1; r <= s.f + 1; ++r) {
        for (auto& [to, cs] : adversary(r, known))
            for (auto& c : cs)
                inbox[to].push_back(c);
        auto current = std::move(inbox);
        inbox.clear();
        for (int p = 0; p < s.n; ++p) {
            if (!honest(p))
                continue;
            auto cs = current[p];
            std::sort(cs.begin(), cs.end());
            for (const auto& c : cs) {
                if (!validChain(c, r) || out.O[p].count(c.value))
                    continue;
                if (r < s.f + 1 && std::find(c.signers.begin(), c.signers.end(), p) == c.signers.end()) {
                    Chain next = c;
                    next.signers.push_back(p);
                    produced.insert(next);
                    for (int q = 0; q < s.n; ++q)
                        deliver(q, next);
                }
                out.O[p].insert(c.value);
            }
        }
    }
    for (auto& [p, O] : out.O)
        out.output[p] = O.size() == 1 ? std::optional<int>(*O.begin()) : std::nullopt;
    return out;
}

} // namespace ds

} // namespace post
