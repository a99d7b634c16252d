#include "post/economics.hpp"

#include <algorithm>

namespace post {

const char* eaacClassName(EaacClass c)
{
    switch (c) {
    case EaacClass::NoViolation: return "no-violation";
    case EaacClass::Cheap: return "cheap";
    case EaacClass::ExpensiveDueToCollapse: return "expensive-due-to-collapse";
    case EaacClass::ExpensiveAbsentCollapse: return "expensive-absent-collapse";
    }
    return "?";
}

namespace {

bool isViewer(const std::vector<PlayerId>& viewers, std::int64_t p)
{
    return p >= 0 && std::find(viewers.begin(), viewers.end(), static_cast<PlayerId>(p)) != viewers.end();
}

} // namespace

CanonicalInvestment::CanonicalInvestment(const TraceIndex& ix, std::vector<PlayerId> viewers) : Investment(ix)
{
    if (viewers.empty())
        viewers = ix.honest();
    const auto& sp = ix.stake().params();
    unit_ = Rational(sp.quantum());

    snaps_.push_back({0, TxSeq(), TxSeq()});
    std::map<std::int64_t, std::set<Digest>> ending;
    std::int64_t current = -1;
    bool frozen = false;
    for (const auto* r : ix.events("econf")) {
        if (frozen)
            break;
        if (!isViewer(viewers, r->p) || !ix.block(r->d))
            continue;
        ending[r->extra.at("e").get<std::int64_t>()].insert(r->d);
        std::int64_t e = -1;
        while (ending.count(e + 1) && ending[e + 1].size() == 1)
            ++e;
        if (e < current) {
            frozen = true;
            break;
        }
        if (e == current)
            continue;
        current = e;
        Snapshot s;
        s.from = r->t;
        s.b1 = ix.block(*ending[e].begin())->Tr;
        s.b2 = e >= 1 ? ix.block(*ending[e - 1].begin())->Tr : TxSeq();
        if (snaps_.back().from == s.from)
            snaps_.back() = s;
        else
            snaps_.push_back(s);
    }
    for (const auto* r : ix.events("rec"))
        if (isViewer(viewers, r->p) && (!triggered_ || r->t < *triggered_))
            triggered_ = r->t;

    std::set<PlayerId> done;
    const TraceRecord* gen = nullptr;
    for (const auto* r : ix.events("conf")) {
        if (!isViewer(viewers, r->p) || !r->extra.is_object() || !r->extra.value("gen", false))
            continue;
        done.insert(static_cast<PlayerId>(r->p));
        tf_ = std::max(tf_.value_or(0), r->t);
        gen = r;
    }
    if (gen) {
        for (auto p : viewers)
            if (ix.activity().active(p, ix.horizon()) && !done.count(p))
                tf_.reset();
    }
    if (tf_) {
        TxSeq bg = ix.confirmedSeq(*gen);
        slashed_ = implicatedIn(bg);
        snaps_.erase(std::remove_if(snaps_.begin(), snaps_.end(), [&](const Snapshot& s) { return s.from >= *tf_; }),
                     snaps_.end());
        snaps_.push_back({*tf_, bg, bg});
    }
}

const CanonicalInvestment::Snapshot& CanonicalInvestment::at(Timeslot t) const
{
    auto it = std::upper_bound(snaps_.begin(), snaps_.end(), t,
                               [](Timeslot v, const Snapshot& s) { return v < s.from; });
    return *std::prev(it);
}

const std::set<Identifier>& CanonicalInvestment::implicatedIn(const TxSeq& seq) const
{
    auto it = implicatedCache_.find(seq.digest());
    if (it != implicatedCache_.end())
        return it->second;
    std::set<Identifier> ids;
    for (const auto& tx : seq.items())
        if (tx->type == TxKind::Guilt)
            ids.insert(tx->implicated.begin(), tx->implicated.end());
    return implicatedCache_[seq.digest()] = std::move(ids);
}

Rational CanonicalInvestment::of(Identifier id, Timeslot t) const
{
    const Snapshot& s = at(t);
    if (ix_.stake().stake(s.b1, id) > 0)
        return unit_;
    bool preTrigger = !triggered_ || t < *triggered_;
    if (preTrigger && ix_.stake().stake(s.b2, id) > 0)
        return unit_;
    if (implicatedIn(s.b1).count(id))
        return unit_;
    return 0;
}

Rational Investment::ofPlayer(PlayerId p, Timeslot t) const
{
    Rational sum = 0;
    for (const auto& pi : ix_.players())
        if (pi.p == p)
            for (auto id : pi.ids)
                sum += of(id, t);
    return sum;
}

std::optional<Timeslot> Investment::exitTime(const std::vector<Identifier>& ids) const
{
    for (Timeslot t = ix_.horizon(); t >= 1; --t)
        for (auto id : ids)
            if (of(id, t) > 0)
                return t == ix_.horizon() ? std::nullopt : std::optional<Timeslot>(t + 1);
    return 1;
}

std::optional<Rational> canonicalValuation(const Investment& inv, const TraceIndex& ix,
                                           const std::vector<PlayerId>& players, Timeslot t, const PriceVector& prices,
                                           std::optional<Timeslot> tStar)
{
    bool after = inv.tf() && t >= *inv.tf();
    if (tStar && t >= *tStar && !after)
        return std::nullopt;
    Rational sum = 0;
    for (const auto& pi : ix.players()) {
        if (std::find(players.begin(), players.end(), pi.p) == players.end())
            continue;
        for (auto id : pi.ids)
            if (!after || !inv.slashed().count(id))
                sum += inv.of(id, t) * prices.C;
    }
    return sum;
}

Rational alphaRatio(const std::optional<Rational>& value, const Rational& invested)
{
    if (!value || invested == 0)
        return 1;
    return *value / invested;
}

Rational alphaBoundFor(const Rational& rhoStar, const Rational& q)
{
    if (rhoStar <= 0)
        return 0;
    Rational a = (rhoStar - (2 * q - 1)) / rhoStar;
    return a < 0 ? Rational(0) : a;
}

Rational flowCost(const Investment& inv, const TraceIndex&, const std::vector<PlayerId>& players,
                  Timeslot until, const PriceVector& prices)
{
    Rational sum = 0;
    for (Timeslot t = 1; t <= until; ++t)
        for (auto p : players)
            sum += prices.c * inv.ofPlayer(p, t);
    return sum;
}

namespace {

Rational invested(const Investment& inv, const std::vector<PlayerId>& players, Timeslot t,
                  const PriceVector& prices)
{
    Rational sum = 0;
    for (auto p : players)
        sum += inv.ofPlayer(p, t) * prices.C;
    return sum;
}

} // namespace

EaacVerdict computeVerdict(const TraceIndex& ix, const PriceVector& prices, const Investment* given)
{
    EaacVerdict out;
    auto v = findViolations(ix);
    out.tStar = v.sighted ? v.sighted : v.omniscient;
    std::unique_ptr<CanonicalInvestment> canonical;
    if (!given)
        canonical = std::make_unique<CanonicalInvestment>(ix);
    const Investment& inv = given ? *given : *canonical;
    out.tF = inv.tf();
    auto H = ix.honest();
    std::vector<PlayerId> B;
    for (const auto& pi : ix.players())
        if (pi.byzantine)
            B.push_back(pi.p);

    for (Timeslot t = 1; t <= ix.horizon(); ++t) {
        Rational a = alphaRatio(canonicalValuation(inv, ix, H, t, prices, out.tStar), invested(inv, H, t, prices));
        if (out.alphaH.empty() || a < out.alphaHMin) {
            out.alphaHMin = a;
            out.alphaHWorst = t;
        }
        out.alphaH.push_back(a);
    }
    out.alphaBAt = out.tF.value_or(ix.horizon());
    out.alphaB = alphaRatio(canonicalValuation(inv, ix, B, out.alphaBAt, prices, out.tStar),
                            invested(inv, B, out.alphaBAt, prices));

    if (!out.tStar)
        out.classification = EaacClass::NoViolation;
    else if (out.alphaB == 1)
        out.classification = EaacClass::Cheap;
    else if (out.alphaHMin < 1)
        out.classification = EaacClass::ExpensiveDueToCollapse;
    else
        out.classification = EaacClass::ExpensiveAbsentCollapse;

    if (v.epoch) {
        std::optional<Digest> base;
        if (*v.epoch == 0)
            base = genesisBlock()->digest;
        for (const auto* r : ix.honestEvents("econf"))
            if (!base && r->extra.at("e").get<std::int64_t>() == *v.epoch - 1)
                base = r->d;
        if (base && ix.block(*base)) {
            std::uint64_t total = 0;
            std::uint64_t byz = 0;
            for (const auto& [id, c] : ix.stake().get(ix.block(*base)->Tr)) {
                total += c;
                if (ix.byzantineId(id))
                    byz += c;
            }
            if (total)
                out.rhoStar = Rational(byz, total);
        }
    }
    out.alphaBound = alphaBoundFor(out.rhoStar, ix.params().q);
    out.flowCost = flowCost(inv, ix, B, out.alphaBAt, prices);
    return out;
}

LiquidInvestment::LiquidInvestment(const TraceIndex& ix, Timeslot gamma, std::vector<PlayerId> viewers)
    : Investment(ix), unit_(ix.stake().params().quantum())
{
    if (viewers.empty())
        viewers = ix.honest();
    std::map<PlayerId, std::vector<std::pair<Timeslot, TxSeq>>> views;
    for (const auto* r : ix.honestEvents("conf"))
        if (std::find(viewers.begin(), viewers.end(), static_cast<PlayerId>(r->p)) != viewers.end())
            views[static_cast<PlayerId>(r->p)].emplace_back(r->t, ix.confirmedSeq(*r));
    for (const auto& [id, amount] : ix.stake().initial()) {
        if (amount == 0)
            continue;
        for (const auto& [p, tl] : views) {
            std::optional<Timeslot> since;
            for (std::size_t i = 0; i < tl.size(); ++i) {
                bool zero = ix.stake().stake(tl[i].second, id) == 0;
                if (!zero) {
                    since.reset();
                    continue;
                }
                if (!since)
                    since = tl[i].first;
                Timeslot until = i + 1 < tl.size() ? tl[i + 1].first - 1 : ix.horizon();
                if (until - *since >= gamma) {
                    Timeslot at = *since + gamma;
                    auto it = out_.find(id);
                    if (it == out_.end() || at < it->second)
                        out_[id] = at;
                    break;
                }
            }
        }
    }
}

std::optional<Timeslot> LiquidInvestment::cashedOut(Identifier id) const
{
    auto it = out_.find(id);
    return it == out_.end() ? std::nullopt : std::optional<Timeslot>(it->second);
}

Rational LiquidInvestment::of(Identifier id, Timeslot t) const
{
    if (!ix_.stake().initial().count(id) || ix_.stake().initial().at(id) == 0)
        return 0;
    auto c = cashedOut(id);
    return c && t >= *c ? Rational(0) : unit_;
}

std::optional<LiquidityCounterexample> checkGammaLiquidity(const TraceIndex& ix, Timeslot gamma)
{
    CanonicalInvestment inv(ix);
    auto v = findViolations(ix);
    Timeslot gst = ix.net().regime == Regime::Synchronous ? 1 : std::max<Timeslot>(1, ix.net().gst);
    std::map<PlayerId, std::vector<std::pair<Timeslot, TxSeq>>> views;
    for (const auto* r : ix.honestEvents("conf"))
        views[static_cast<PlayerId>(r->p)].emplace_back(r->t, ix.confirmedSeq(*r));

    for (auto viewer : ix.honest()) {
        const auto& tl = views[viewer];
        for (const auto& pi : ix.players()) {
            for (Timeslot t = gst; t + gamma <= ix.horizon(); ++t) {
                if (v.sighted && *v.sighted <= t + gamma)
                    break;
                bool zero = true;
                TxSeq cur;
                auto it = std::upper_bound(tl.begin(), tl.end(), t,
                                           [](Timeslot x, const auto& e) { return x < e.first; });
                if (it != tl.begin())
                    cur = std::prev(it)->second;
                auto check = [&](const TxSeq& s) {
                    for (auto id : pi.ids)
                        if (ix.stake().stake(s, id) > 0)
                            zero = false;
                };
                check(cur);
                for (auto jt = it; zero && jt != tl.end() && jt->first <= t + gamma; ++jt)
                    check(jt->second);
                if (!zero)
                    continue;
                Rational r = inv.ofPlayer(pi.p, t + gamma);
                if (r != 0)
                    return LiquidityCounterexample{pi.p, viewer, t, r};
            }
        }
    }
    return std::nullopt;
}

} // namespace post
