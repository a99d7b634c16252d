#include "post/analysis.hpp"

#include <algorithm>
#include <unordered_set>

namespace post {

TraceIndex::TraceIndex(const TraceLog& log) : log_(log)
{
    const json& h = log.header();
    for (const auto& pj : h.at("players")) {
        PlayerInfo pi;
        pi.p = pj.at("p");
        pi.ids = pj.at("ids").get<std::vector<Identifier>>();
        pi.byzantine = pj.value("byzantine", false);
        if (pi.byzantine)
            byzIds_.insert(pi.ids.begin(), pi.ids.end());
        players_.push_back(std::move(pi));
    }
    const json& pp = h.at("params");
    params_.x = pp.at("x");
    params_.delta = pp.at("delta");
    params_.deltaStar = pp.at("deltaStar");
    params_.q = parseRational(pp.at("q").get<std::string>());
    params_.twoStage = pp.value("twoStage", false);
    const json& nj = h.at("net");
    net_.regime = parseRegime(nj.at("regime"));
    net_.delta = nj.at("delta");
    net_.gst = nj.value("gst", Timeslot{0});
    net_.deltaStar = nj.value("deltaStar", net_.delta);
    net_.relaxed = nj.value("relaxed", false);
    if (h.contains("activity"))
        for (auto it = h["activity"].begin(); it != h["activity"].end(); ++it) {
            auto& w = activity_.windows[static_cast<PlayerId>(std::stoul(it.key()))];
            for (const auto& pr : it.value())
                w.emplace_back(pr.at(0).get<Timeslot>(), pr.at(1).get<Timeslot>());
        }
    horizon_ = h.at("horizon");
    const json& sj = h.at("stake");
    StakeParams sp;
    sp.N = sj.at("N");
    sp.xstar = sj.at("xstar");
    InitialDistribution sstar;
    for (const auto& e : sj.at("sstar"))
        sstar[e.at(0).get<Identifier>()] = e.at(1).get<std::uint64_t>();
    stake_ = std::make_unique<StakeCache>(std::move(sstar), sp);

    auto g = genesisBlock();
    TraceBlock gb;
    gb.d = g->digest;
    gb.genesis = true;
    blocks_[gb.d] = gb;

    for (const auto& r : log.records()) {
        byKind_[r.k].push_back(&r);
        if (r.k == "t0star")
            net_.t0star = r.t;
        if (r.k != "def")
            continue;
        const json& m = r.extra.at("m");
        defs_[r.d] = m;
        std::string kind = m.at("kind");
        if (kind == "tx") {
            txs_[r.d] = txFromJson(m, r.d);
        } else if (kind == "block" && !m.value("genesis", false)) {
            auto par = blocks_.find(parseHex(m.at("par").get<std::string>()));
            if (par == blocks_.end())
                continue;
            TraceBlock b;
            b.d = r.d;
            b.h = m.at("h");
            b.v = m.at("v");
            b.e = m.at("e");
            b.par = par->first;
            b.proposer = m.at("proposer");
            bool complete = true;
            for (const auto& td : m.at("T")) {
                auto tx = txs_.find(parseHex(td.get<std::string>()));
                if (tx == txs_.end()) {
                    complete = false;
                    break;
                }
                b.T.push_back(tx->second);
            }
            if (!complete)
                continue;
            const TraceBlock& pb = par->second;
            b.Tr = TxSeq::extend(pb.Tr, b.T);
            b.Tval = (!pb.genesis && b.e == pb.e) ? pb.Tval : pb.Tr;
            blocks_[b.d] = std::move(b);
        }
    }
    for (const auto* r : events("recend")) {
        auto base = block(parseHex(r->extra.at("base").get<std::string>()));
        auto guilt = tx(parseHex(r->extra.at("guilt").get<std::string>()));
        if (!base || !guilt)
            continue;
        genesisSeqs_[r->d] = TxSeq::extend(base->Tr, {guilt, makeEpochMarker(r->extra.at("e").get<std::int64_t>())});
    }
}

std::vector<PlayerId> TraceIndex::honest() const
{
    std::vector<PlayerId> out;
    for (const auto& pi : players_)
        if (!pi.byzantine)
            out.push_back(pi.p);
    return out;
}

bool TraceIndex::byzantinePlayer(PlayerId p) const
{
    for (const auto& pi : players_)
        if (pi.p == p)
            return pi.byzantine;
    return false;
}

std::optional<PlayerId> TraceIndex::ownerOf(Identifier id) const
{
    for (const auto& pi : players_)
        if (std::find(pi.ids.begin(), pi.ids.end(), id) != pi.ids.end())
            return pi.p;
    return std::nullopt;
}

const TraceBlock* TraceIndex::block(Digest d) const
{
    auto it = blocks_.find(d);
    return it == blocks_.end() ? nullptr : &it->second;
}

TxPtr TraceIndex::tx(Digest d) const
{
    auto it = txs_.find(d);
    return it == txs_.end() ? nullptr : it->second;
}

const json* TraceIndex::def(Digest d) const
{
    auto it = defs_.find(d);
    return it == defs_.end() ? nullptr : &it->second;
}

bool TraceIndex::isAncestor(Digest a, Digest b) const
{
    const TraceBlock* A = block(a);
    const TraceBlock* B = block(b);
    if (!A || !B)
        return false;
    while (B && B->h > A->h)
        B = block(B->par);
    return B && B->d == A->d;
}

std::vector<const TraceRecord*> TraceIndex::events(const std::string& k) const
{
    auto it = byKind_.find(k);
    return it == byKind_.end() ? std::vector<const TraceRecord*>{} : it->second;
}

std::vector<const TraceRecord*> TraceIndex::honestEvents(const std::string& k) const
{
    std::vector<const TraceRecord*> out;
    for (const auto* r : events(k))
        if (r->p >= 0 && !byzantinePlayer(static_cast<PlayerId>(r->p)))
            out.push_back(r);
    return out;
}

TxSeq TraceIndex::confirmedSeq(const TraceRecord& conf) const
{
    if (conf.extra.is_object() && conf.extra.value("gen", false)) {
        auto it = genesisSeqs_.find(conf.d);
        if (it == genesisSeqs_.end())
            throw ScenarioError("trace lacks the recovery record for " + hex(conf.d));
        return it->second;
    }
    const TraceBlock* b = block(conf.d);
    if (!b)
        throw ScenarioError("trace lacks block " + hex(conf.d));
    return b->Tr;
}

ViolationReport findViolations(const TraceIndex& ix)
{
    ViolationReport out;
    std::vector<TxSeq> chain;
    std::unordered_set<Digest> seen;
    for (const auto* r : ix.honestEvents("conf")) {
        TxSeq s = ix.confirmedSeq(*r);
        if (!seen.insert(s.digest()).second)
            continue;
        auto pos = std::lower_bound(chain.begin(), chain.end(), s,
                                    [](const TxSeq& a, const TxSeq& b) { return a.size() < b.size(); });
        bool ok = (pos == chain.begin() || std::prev(pos)->isPrefixOf(s)) && (pos == chain.end() || s.isPrefixOf(*pos));
        if (!ok) {
            out.omniscient = r->t;
            break;
        }
        chain.insert(pos, s);
    }
    auto sights = ix.honestEvents("sight");
    if (!sights.empty()) {
        out.sighted = sights.front()->t;
        out.sightedBy = static_cast<PlayerId>(sights.front()->p);
    }

    std::unordered_set<Digest> confirmed;
    std::unordered_map<Digest, std::set<Digest>> children;
    for (const auto* r : ix.honestEvents("conf")) {
        if (r->extra.is_object() && r->extra.value("gen", false))
            continue;
        const TraceBlock* b = ix.block(r->d);
        while (b && confirmed.insert(b->d).second && !b->genesis) {
            children[b->par].insert(b->d);
            b = ix.block(b->par);
        }
    }
    for (const auto& [par, kids] : children) {
        if (kids.size() < 2)
            continue;
        std::int64_t e = ix.block(*kids.begin())->e;
        if (!out.epoch || e < *out.epoch)
            out.epoch = e;
    }
    return out;
}

CheckResult checkLemma1(const TraceIndex& ix)
{
    CheckResult res;
    auto check = [&](const json& ids, const std::string& what, Timeslot t) {
        for (const auto& id : ids) {
            if (!ix.byzantineId(id.get<Identifier>())) {
                res.ok = false;
                res.detail = what + " at t=" + std::to_string(t) + " implicates honest identifier " +
                             std::to_string(id.get<Identifier>());
                return;
            }
        }
    };
    for (const auto* r : ix.honestEvents("cog"))
        check(r->extra.at("implicated"), "certificate " + hex(r->d), r->t);
    for (const auto* r : ix.honestEvents("recend"))
        check(r->extra.at("implicated"), "recovery output " + hex(r->d), r->t);
    for (const auto* r : ix.honestEvents("prop")) {
        if (auto tx = ix.tx(parseHex(r->extra.at("guilt").get<std::string>())))
            check(json(tx->implicated), "guilt transaction " + hex(tx->digest), r->t);
    }
    return res;
}

Lemma2Report checkLemma2(const TraceIndex& ix)
{
    Lemma2Report out;
    auto v = findViolations(ix);
    if (!v.epoch) {
        out.result = {false, "no consistency violation in the trace"};
        return out;
    }
    out.epoch = *v.epoch;
    std::optional<Timeslot> t;
    for (const auto* r : ix.honestEvents("epoch"))
        if (r->extra.at("e").get<std::int64_t>() > out.epoch && (!t || r->t < *t))
            t = r->t;
    for (const auto* r : ix.honestEvents("rec"))
        if (!t || r->t < *t)
            t = r->t;
    if (!t) {
        out.result = {false, "no honest player entered epoch e+1 or triggered recovery"};
        return out;
    }
    out.t = *t;
    out.deadline = *t + 2 * ix.params().deltaStar;
    std::map<PlayerId, Timeslot> held;
    for (const auto* r : ix.honestEvents("cog")) {
        if (r->extra.at("e").get<std::int64_t>() != out.epoch)
            continue;
        auto p = static_cast<PlayerId>(r->p);
        if (!held.count(p))
            held[p] = r->t;
    }
    for (auto p : ix.honest()) {
        if (!ix.activity().active(p, out.deadline))
            continue;
        auto it = held.find(p);
        if (it == held.end() || it->second > out.deadline) {
            out.result.ok = false;
            out.result.detail += "player " + std::to_string(p) + " holds no epoch-" + std::to_string(out.epoch) +
                                 " certificate by t=" + std::to_string(out.deadline) +
                                 (it == held.end() ? "" : " (first at t=" + std::to_string(it->second) + ")") + "; ";
        }
    }
    return out;
}

RecoveryReport checkLemma6(const TraceIndex& ix)
{
    RecoveryReport out;
    auto ends = ix.honestEvents("recend");
    if (ends.empty()) {
        out.result = {false, "recovery never completed"};
        return out;
    }
    out.completed = true;
    const auto* first = ends.front();
    out.bg = first->d;
    out.epoch = first->extra.at("e");
    out.base = parseHex(first->extra.at("base").get<std::string>());
    out.implicated = first->extra.at("implicated").get<std::vector<Identifier>>();
    out.instance = first->extra.at("i");
    std::set<PlayerId> done;
    for (const auto* r : ends) {
        out.tf = std::max(out.tf, r->t);
        done.insert(static_cast<PlayerId>(r->p));
        if (r->d != out.bg) {
            out.result.ok = false;
            out.result.detail += "player " + std::to_string(r->p) + " output a different b_g'; ";
        }
    }
    for (auto p : ix.honest())
        if (ix.activity().active(p, ix.horizon()) && !done.count(p)) {
            out.result.ok = false;
            out.result.detail += "player " + std::to_string(p) + " never finished recovery; ";
        }
    const TraceBlock* base = ix.block(out.base);
    if (!base) {
        out.result = {false, "unknown recovery base block"};
        return out;
    }
    const auto& sm = ix.stake().get(base->Tr);
    std::uint64_t total = 0;
    std::uint64_t imp = 0;
    for (const auto& [id, c] : sm) {
        total += c;
        if (std::binary_search(out.implicated.begin(), out.implicated.end(), id))
            imp += c;
    }
    out.implicatedShare = total ? Rational(imp, total) : Rational(0);
    Rational need = 2 * ix.params().q - 1;
    if (out.implicatedShare < need) {
        out.result.ok = false;
        out.result.detail += "implicated share " + toString(out.implicatedShare) + " below " + toString(need) + "; ";
    }
    std::map<Identifier, std::uint64_t> voters;
    for (const auto* r : ix.events("send")) {
        const json* m = ix.def(r->d);
        if (!m || m->at("kind") != "ovote" || parseHex(m->at("bg").get<std::string>()) != out.bg)
            continue;
        Identifier id = m->at("id");
        if (std::binary_search(out.implicated.begin(), out.implicated.end(), id))
            continue;
        auto it = sm.find(id);
        if (it != sm.end() && it->second == m->at("c").get<std::uint64_t>())
            voters[id] = it->second;
    }
    std::uint64_t voted = 0;
    for (const auto& [id, c] : voters)
        voted += c;
    std::uint64_t unimp = total - imp;
    out.outputShare = unimp ? Rational(voted, unimp) : Rational(0);
    if (!(out.outputShare > Rational(1, 2))) {
        out.result.ok = false;
        out.result.detail += "output votes cover " + toString(out.outputShare) + " of unimplicated stake; ";
    }
    return out;
}

namespace {

std::vector<Digest> observedBases(const TraceIndex& ix)
{
    std::vector<Digest> out{genesisBlock()->digest};
    std::set<Digest> seen{out.front()};
    for (const auto* r : ix.honestEvents("econf"))
        if (seen.insert(r->d).second && ix.block(r->d))
            out.push_back(r->d);
    return out;
}

} // namespace

std::int64_t leaderGap(const TraceIndex& ix)
{
    std::int64_t kstar = 1;
    for (auto d : observedBases(ix)) {
        const auto& sm = ix.stake().get(ix.block(d)->Tr);
        std::vector<bool> byz;
        for (const auto& [id, c] : sm)
            if (c > 0)
                byz.push_back(ix.byzantineId(id));
        auto n = static_cast<std::int64_t>(byz.size());
        if (n == 0)
            continue;
        std::int64_t run = 0;
        std::int64_t best = 0;
        for (std::int64_t i = 0; i < 2 * n; ++i) {
            run = byz[static_cast<std::size_t>(i % n)] ? run + 1 : 0;
            best = std::max(best, run);
        }
        if (best >= n)
            return n + 1;
        kstar = std::max(kstar, best + 1);
    }
    return kstar;
}

Timeslot livenessBound(Timeslot delta, std::int64_t kstar)
{
    return 4 * delta * (2 * kstar + 4);
}

LivenessReport measureLiveness(const TraceIndex& ix)
{
    LivenessReport out;
    out.kstar = leaderGap(ix);
    out.bound = livenessBound(ix.params().delta, out.kstar);
    Timeslot gst = ix.net().regime == Regime::Synchronous ? 0 : ix.net().gst;
    std::map<Digest, Timeslot> injected;
    for (const auto* r : ix.events("inject")) {
        auto tx = ix.tx(r->d);
        if (!tx || tx->type == TxKind::EpochMarker || tx->type == TxKind::Guilt)
            continue;
        if (!injected.count(r->d))
            injected[r->d] = r->t;
    }
    std::map<PlayerId, std::vector<const TraceRecord*>> confs;
    for (const auto* r : ix.honestEvents("conf"))
        confs[static_cast<PlayerId>(r->p)].push_back(r);
    for (auto p : ix.honest()) {
        if (!ix.activity().active(p, ix.horizon()))
            continue;
        std::map<Digest, Timeslot> first;
        for (const auto* r : confs[p]) {
            auto seq = ix.confirmedSeq(*r);
            for (const auto& tx : seq.items())
                if (injected.count(tx->digest) && !first.count(tx->digest))
                    first[tx->digest] = r->t;
        }
        for (const auto& [d, t] : injected) {
            LivenessReport::Entry e;
            e.tx = d;
            e.p = p;
            e.injected = t;
            auto it = first.find(d);
            if (it != first.end()) {
                e.confirmed = it->second;
                e.lag = it->second - std::max(t, gst);
                out.maxLag = std::max(out.maxLag, e.lag);
            } else {
                out.allConfirmed = false;
            }
            out.entries.push_back(e);
        }
    }
    return out;
}

RhoBoundedReport rhoBounded(const TraceIndex& ix)
{
    RhoBoundedReport out;
    for (auto d : observedBases(ix)) {
        const TraceBlock* b = ix.block(d);
        const auto& sm = ix.stake().get(b->Tr);
        std::uint64_t total = 0;
        std::uint64_t byz = 0;
        for (const auto& [id, c] : sm) {
            total += c;
            if (ix.byzantineId(id))
                byz += c;
        }
        if (total == 0)
            continue;
        Rational share(byz, total);
        if (share > out.maxByzantineShare) {
            out.maxByzantineShare = share;
            out.worstEpoch = b->genesis ? 0 : b->e + 1;
        }
    }
    return out;
}

CheckResult checkDeliveries(const TraceIndex& ix)
{
    CheckResult res;
    const auto& act = ix.activity();
    auto activeThrough = [&](PlayerId p, Timeslot a, Timeslot b) {
        if (!act.windows.count(p))
            return true;
        for (Timeslot t = a; t <= b; ++t)
            if (!act.active(p, t))
                return false;
        return true;
    };
    for (const auto& r : ix.log().records()) {
        if (r.k != "recv" && r.k != "send")
            continue;
        auto p = static_cast<PlayerId>(r.p);
        if (!act.active(p, r.t)) {
            res.ok = false;
            res.detail = "inactive player " + std::to_string(p) + " has a " + r.k + " at t=" + std::to_string(r.t);
            return res;
        }
        if (r.k != "recv" || r.from == static_cast<std::int64_t>(kEnvironmentPlayer))
            continue;
        if (static_cast<PlayerId>(r.from) == p) {
            if (r.t != r.sent + 1 && activeThrough(p, r.sent + 1, r.t)) {
                res.ok = false;
                res.detail = "self-delivery to " + std::to_string(p) + " at t=" + std::to_string(r.t);
                return res;
            }
            continue;
        }
        if (!activeThrough(p, r.sent + 1, r.t))
            continue;
        if (auto bad = ix.net().check(r.sent, r.t)) {
            res.ok = false;
            res.detail = "delivery to " + std::to_string(p) + " at t=" + std::to_string(r.t) + " violates " + *bad;
            return res;
        }
    }
    return res;
}

} // namespace post
