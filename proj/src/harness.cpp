#include "post/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace post {

const char* settingName(Setting s)
{
    switch (s) {
    case Setting::DynamicallyAvailable:
        return "dynamically-available";
    case Setting::QuasiPermissionless:
        return "quasi-permissionless";
    case Setting::Permissioned:
        return "permissioned";
    }
    return "?";
}

Setting parseSetting(const std::string& s)
{
    if (s == "dynamically-available")
        return Setting::DynamicallyAvailable;
    if (s == "quasi-permissionless")
        return Setting::QuasiPermissionless;
    if (s == "permissioned")
        return Setting::Permissioned;
    throw ScenarioError("unknown setting '" + s + "'");
}

std::vector<PlayerId> ScenarioConfig::honest() const
{
    std::vector<PlayerId> out;
    for (const auto& ps : players)
        if (!ps.byzantine)
            out.push_back(ps.p);
    return out;
}

std::vector<PlayerId> ScenarioConfig::byzantine() const
{
    std::vector<PlayerId> out;
    for (const auto& ps : players)
        if (ps.byzantine)
            out.push_back(ps.p);
    return out;
}

InitialDistribution ScenarioConfig::initialStake() const
{
    InitialDistribution out;
    for (const auto& ps : players)
        for (auto id : ps.ids)
            out[id] = ps.quanta * stake.quantum();
    return out;
}

std::int64_t quorumCount(std::int64_t n, const Rational& q)
{
    using boost::multiprecision::cpp_int;
    cpp_int num = boost::multiprecision::numerator(q) * n;
    cpp_int den = boost::multiprecision::denominator(q);
    return static_cast<std::int64_t>((num + den - 1) / den);
}

namespace {

TxKind parseTxType(const std::string& s)
{
    if (s == "pay")
        return TxKind::Payment;
    if (s == "add")
        return TxKind::AddEscrow;
    if (s == "remove")
        return TxKind::RemoveEscrow;
    throw ScenarioError("unknown injected transaction type '" + s + "'");
}

const char* txTypeName(TxKind k)
{
    switch (k) {
    case TxKind::AddEscrow:
        return "add";
    case TxKind::RemoveEscrow:
        return "remove";
    default:
        return "pay";
    }
}

TxPtr makeTx(const Injection& in, SignatureRegistry& reg)
{
    switch (in.type) {
    case TxKind::AddEscrow:
        return makeAddEscrow(in.id, reg, in.nonce);
    case TxKind::RemoveEscrow:
        return makeRemoveEscrow(in.id, reg, in.nonce);
    default:
        return makePayment(in.nonce, reg);
    }
}

Rational rationalField(const json& j, const char* key, const Rational& dflt)
{
    if (!j.contains(key))
        return dflt;
    if (!j.at(key).is_string())
        throw ScenarioError(std::string("'") + key + "' must be a rational written as a string, e.g. \"2/3\"");
    return parseRational(j.at(key).get<std::string>());
}

json activityToJson(const ActivitySchedule& a)
{
    json out = json::object();
    for (const auto& [p, ws] : a.windows) {
        json arr = json::array();
        for (const auto& w : ws)
            arr.push_back(json::array({w.first, w.second}));
        out[std::to_string(p)] = arr;
    }
    return out;
}

json header(const ScenarioConfig& c)
{
    json players = json::array();
    for (const auto& ps : c.players)
        players.push_back(json{{"p", ps.p}, {"ids", ps.ids}, {"byzantine", ps.byzantine}});
    json sstar = json::array();
    for (const auto& [id, amount] : c.initialStake())
        sstar.push_back(json::array({id, amount}));
    return json{{"name", c.name},
                {"seed", c.seed},
                {"setting", settingName(c.setting)},
                {"players", players},
                {"params",
                 {{"x", c.protocol.x},
                  {"delta", c.protocol.delta},
                  {"deltaStar", c.protocol.deltaStar},
                  {"q", toString(c.protocol.q)},
                  {"twoStage", c.protocol.twoStage}}},
                {"net",
                 {{"regime", regimeName(c.net.regime)},
                  {"delta", c.net.delta},
                  {"gst", c.net.gst},
                  {"deltaStar", c.net.deltaStar},
                  {"relaxed", c.net.relaxed}}},
                {"activity", activityToJson(c.activity)},
                {"horizon", c.horizon},
                {"stake", {{"N", c.stake.N}, {"xstar", c.stake.xstar}, {"sstar", sstar}}},
                {"attack", c.attack}};
}

// Identifiers with positive initial stake, ascending: the epoch-0 leader rotation.
std::vector<Identifier> rotation(const ScenarioConfig& c)
{
    std::vector<Identifier> out;
    for (const auto& [id, amount] : c.initialStake())
        if (amount > 0)
            out.push_back(id);
    return out;
}

const PlayerSpec& specOf(const ScenarioConfig& c, PlayerId p)
{
    for (const auto& ps : c.players)
        if (ps.p == p)
            return ps;
    throw ScenarioError("unknown player " + std::to_string(p));
}

PlayerId ownerIn(const ScenarioConfig& c, Identifier id)
{
    for (const auto& ps : c.players)
        if (std::find(ps.ids.begin(), ps.ids.end(), id) != ps.ids.end())
            return ps.p;
    throw ScenarioError("identifier " + std::to_string(id) + " has no owner");
}

bool meets(std::uint64_t sum, std::uint64_t total, const Rational& q)
{
    using boost::multiprecision::cpp_int;
    return sum > 0 && cpp_int(sum) * boost::multiprecision::denominator(q) >=
                          cpp_int(total) * boost::multiprecision::numerator(q);
}

std::vector<ByzantinePlayer> byzantinePlayers(const ScenarioConfig& c)
{
    std::vector<ByzantinePlayer> out;
    for (const auto& ps : c.players)
        if (ps.byzantine)
            out.push_back({ps.p, ps.ids});
    return out;
}

std::shared_ptr<Adversary> buildAdversary(const ScenarioConfig& c, StakeCache& stake, SignatureRegistry& reg,
                                          std::vector<std::pair<Injection, TxPtr>>& extra, json& info)
{
    const json& a = c.attack;
    std::string kind = a.value("kind", "none");
    auto byz = byzantinePlayers(c);
    if (kind == "none")
        return nullptr;
    if (kind == "silent")
        return std::make_shared<SilentAdversary>();
    if (kind == "random") {
        RandomAdversaryConfig rc;
        rc.seed = a.value("seed", c.seed);
        rc.dropPct = a.value("drop", rc.dropPct);
        rc.delayPct = a.value("delay", rc.delayPct);
        rc.equivocatePct = a.value("equivocate", rc.equivocatePct);
        rc.doubleVotePct = a.value("doubleVote", rc.doubleVotePct);
        rc.honestDelayPct = a.value("honestDelay", rc.honestDelayPct);
        std::vector<PlayerId> all;
        for (const auto& ps : c.players)
            all.push_back(ps.p);
        return std::make_shared<RandomAdversary>(byz, c.protocol, stake, reg, rc, all);
    }
    auto rot = rotation(c);
    auto stakeOf = c.initialStake();
    std::uint64_t total = 0;
    for (const auto& [id, s] : stakeOf)
        total += s;
    auto byzLeader = [&](std::int64_t v) {
        return specOf(c, ownerIn(c, rot[static_cast<std::size_t>(v % static_cast<std::int64_t>(rot.size()))]))
            .byzantine;
    };
    if (kind == "equivocation") {
        EquivocationConfig ec;
        auto honest = c.honest();
        std::size_t h1 = a.at("h1");
        std::size_t h2 = a.value("h2", honest.size() - h1);
        if (h1 + h2 != honest.size() || h1 == 0 || h2 == 0)
            throw ScenarioError("equivocation needs two non-empty honest groups covering every honest player");
        std::uint64_t s1 = 0;
        std::uint64_t s2 = 0;
        for (std::size_t i = 0; i < honest.size(); ++i)
            for (auto id : specOf(c, honest[i]).ids) {
                (i < h1 ? ec.h1 : ec.h2).insert(honest[i]);
                (i < h1 ? s1 : s2) += stakeOf[id];
            }
        std::vector<Identifier> byzIds;
        for (const auto& b : byz)
            byzIds.insert(byzIds.end(), b.ids.begin(), b.ids.end());
        std::sort(byzIds.begin(), byzIds.end());
        for (auto it = byzIds.begin(); it != byzIds.end() && !meets(s1, total, c.protocol.q); ++it) {
            ec.s1.insert(*it);
            s1 += stakeOf[*it];
        }
        for (auto it = byzIds.rbegin(); it != byzIds.rend() && !meets(s2, total, c.protocol.q); ++it) {
            ec.s2.insert(*it);
            s2 += stakeOf[*it];
        }
        if (!meets(s1, total, c.protocol.q) || !meets(s2, total, c.protocol.q))
            throw ScenarioError("Byzantine stake cannot complete a quorum with each honest group");
        std::int64_t va = a.value("view", std::int64_t{0});
        if (va == 0)
            for (va = 2; !byzLeader(va); ++va) {
            }
        if (!byzLeader(va))
            throw ScenarioError("attack view " + std::to_string(va) + " has an honest leader");
        ec.attackView = va;
        Identifier leaderId = rot[static_cast<std::size_t>(va % static_cast<std::int64_t>(rot.size()))];
        Injection pin{4 * va * c.protocol.delta - c.protocol.delta, ownerIn(c, leaderId), TxKind::Payment, 0,
                      a.value("pivotNonce", std::uint64_t{0xB0B0})};
        auto pivot = makeTx(pin, reg);
        ec.pivotTx = pivot->digest;
        extra.emplace_back(pin, pivot);
        Injection ain = pin;
        ain.nonce = pin.nonce + 1;
        ec.altTx = makeTx(ain, reg);
        extra.emplace_back(ain, ec.altTx);
        ec.recovery = a.value("recovery", "silent") == "cooperate" ? RecoveryBehavior::Cooperate
                                                                     : RecoveryBehavior::Silent;
        info["attackView"] = va;
        info["pivot"] = hex(ec.pivotTx);
        info["alt"] = hex(ec.altTx->digest);
        info["h1"] = ec.h1;
        info["h2"] = ec.h2;
        info["s1"] = ec.s1;
        info["s2"] = ec.s2;
        return std::make_shared<EquivocationAdversary>(byz, c.protocol, stake, reg, ec);
    }
    if (kind == "withholding") {
        WithholdingConfig wc;
        wc.view = a.at("view");
        auto honest = c.honest();
        wc.hs = a.value("hs", honest.front());
        wc.releaseEpoch = a.value("releaseEpoch", std::int64_t{2});
        if (!byzLeader(wc.view) || !byzLeader(wc.view + 1))
            throw ScenarioError("withholding needs Byzantine leaders in views " + std::to_string(wc.view) + " and " +
                                std::to_string(wc.view + 1));
        if (specOf(c, wc.hs).byzantine)
            throw ScenarioError("the favoured player must be honest");
        const Timeslot d = c.protocol.delta;
        auto leaderOf = [&](std::int64_t v) {
            return ownerIn(c, rot[static_cast<std::size_t>(v % static_cast<std::int64_t>(rot.size()))]);
        };
        Injection pin{4 * wc.view * d - d, leaderOf(wc.view), TxKind::Payment, 0,
                      a.value("pivotNonce", std::uint64_t{0xB0B0})};
        Injection ain{4 * (wc.view + 1) * d - d, leaderOf(wc.view + 1), TxKind::Payment, 0, pin.nonce + 1};
        auto pivot = makeTx(pin, reg);
        wc.altTx = makeTx(ain, reg);
        extra.emplace_back(pin, pivot);
        extra.emplace_back(ain, wc.altTx);
        info["view"] = wc.view;
        info["hs"] = wc.hs;
        info["pivot"] = hex(pivot->digest);
        info["alt"] = hex(wc.altTx->digest);
        return std::make_shared<WithholdingAdversary>(byz, c.protocol, stake, reg, wc, honest);
    }
    if (kind == "theorem2") {
        auto xs = a.at("x").get<std::set<PlayerId>>();
        auto zs = a.at("z").get<std::set<PlayerId>>();
        for (auto p : xs)
            if (specOf(c, p).byzantine)
                throw ScenarioError("group X must be honest");
        for (auto p : zs)
            if (specOf(c, p).byzantine)
                throw ScenarioError("group Z must be honest");
        if (c.net.regime != Regime::PartialSynchrony)
            throw ScenarioError("theorem2 runs in partial synchrony");
        return std::make_shared<SplitPersonaAdversary>(byz, c.protocol, stake, reg, xs, zs, c.net.gst);
    }
    throw ScenarioError("unknown attack kind '" + kind + "'");
}

} // namespace

ScenarioConfig configFromJson(const json& j)
{
    ScenarioConfig c;
    c.name = j.value("name", c.name);
    c.seed = j.value("seed", c.seed);
    for (const auto& pj : j.at("players")) {
        PlayerSpec ps;
        ps.p = pj.at("p");
        ps.ids = pj.at("ids").get<std::vector<Identifier>>();
        ps.byzantine = pj.value("byzantine", false);
        ps.quanta = pj.value("quanta", std::uint64_t{1});
        c.players.push_back(std::move(ps));
    }
    c.setting = parseSetting(j.value("setting", std::string(settingName(c.setting))));
    if (j.contains("activity"))
        for (auto it = j.at("activity").begin(); it != j.at("activity").end(); ++it) {
            auto& w = c.activity.windows[static_cast<PlayerId>(std::stoul(it.key()))];
            for (const auto& pr : it.value())
                w.emplace_back(pr.at(0).get<Timeslot>(), pr.at(1).get<Timeslot>());
        }
    const json& n = j.at("net");
    c.net.regime = parseRegime(n.at("regime"));
    c.net.delta = n.value("delta", Timeslot{1});
    c.net.gst = n.value("gst", Timeslot{0});
    c.net.deltaStar = n.value("deltaStar", c.net.delta);
    c.net.relaxed = n.value("relaxed", false);
    if (j.contains("stake")) {
        c.stake.N = j["stake"].value("N", c.stake.N);
        c.stake.xstar = j["stake"].value("xstar", c.stake.xstar);
    }
    const json pj = j.value("protocol", json::object());
    c.protocol.x = pj.value("x", c.protocol.x);
    c.protocol.q = rationalField(pj, "q", c.protocol.q);
    c.protocol.twoStage = pj.value("twoStage", false);
    c.protocol.delta = c.net.delta;
    c.protocol.deltaStar = c.net.deltaStar;
    c.attack = j.value("attack", json{{"kind", "none"}});
    for (const auto& ij : j.value("inject", json::array())) {
        Injection in;
        in.t = ij.at("t");
        in.p = ij.at("p");
        in.type = parseTxType(ij.value("type", "pay"));
        in.id = ij.value("id", Identifier{0});
        in.nonce = ij.value("nonce", std::uint64_t{0});
        c.injections.push_back(in);
    }
    const json pr = j.value("prices", json::object());
    c.prices.C = rationalField(pr, "C", 1);
    c.prices.c = rationalField(pr, "c", 1);
    c.gamma = j.value("gamma", Timeslot{0});
    c.horizon = j.value("horizon", c.horizon);
    return c;
}

json configToJson(const ScenarioConfig& c)
{
    json players = json::array();
    for (const auto& ps : c.players)
        players.push_back(json{{"p", ps.p}, {"ids", ps.ids}, {"byzantine", ps.byzantine}, {"quanta", ps.quanta}});
    json inject = json::array();
    for (const auto& in : c.injections)
        inject.push_back(
            json{{"t", in.t}, {"p", in.p}, {"type", txTypeName(in.type)}, {"id", in.id}, {"nonce", in.nonce}});
    return json{{"name", c.name},
                {"seed", c.seed},
                {"players", players},
                {"setting", settingName(c.setting)},
                {"activity", activityToJson(c.activity)},
                {"net",
                 {{"regime", regimeName(c.net.regime)},
                  {"delta", c.net.delta},
                  {"gst", c.net.gst},
                  {"deltaStar", c.net.deltaStar},
                  {"relaxed", c.net.relaxed}}},
                {"stake", {{"N", c.stake.N}, {"xstar", c.stake.xstar}}},
                {"protocol", {{"x", c.protocol.x}, {"q", toString(c.protocol.q)}, {"twoStage", c.protocol.twoStage}}},
                {"attack", c.attack},
                {"inject", inject},
                {"prices", {{"C", toString(c.prices.C)}, {"c", toString(c.prices.c)}}},
                {"gamma", c.gamma},
                {"horizon", c.horizon}};
}

void validateConfig(const ScenarioConfig& c)
{
    if (c.players.empty())
        throw ScenarioError("no players");
    if (c.horizon < 1)
        throw ScenarioError("horizon must be positive");
    c.net.validate();
    std::set<PlayerId> seen;
    std::set<Identifier> ids;
    for (const auto& ps : c.players) {
        if (!seen.insert(ps.p).second)
            throw ScenarioError("duplicate player " + std::to_string(ps.p));
        if (ps.ids.empty())
            throw ScenarioError("player " + std::to_string(ps.p) + " has no identifier");
        for (auto id : ps.ids)
            if (!ids.insert(id).second)
                throw ScenarioError("identifier " + std::to_string(id) + " assigned twice");
    }
    for (const auto& [p, w] : c.activity.windows)
        if (!seen.count(p))
            throw ScenarioError("activity window for unknown player " + std::to_string(p));
    const Rational half(1, 2);
    if (c.protocol.q <= half || c.protocol.q >= 1)
        throw ScenarioError("quorum q must lie in (1/2, 1)");
    if (c.stake.xstar == 0 || c.stake.N == 0 || c.stake.N % c.stake.xstar != 0)
        throw ScenarioError("N must be a positive multiple of x*");
    std::uint64_t staked = 0;
    for (const auto& ps : c.players)
        staked += ps.quanta * ps.ids.size();
    if (staked > c.stake.xstar)
        throw ScenarioError("initial stake exceeds x* quanta");
    if (c.protocol.x <= 2 * static_cast<std::int64_t>(c.stake.xstar))
        throw ScenarioError("epoch length x must exceed 2x* (x=" + std::to_string(c.protocol.x) +
                            ", x*=" + std::to_string(c.stake.xstar) + ")");
    if (c.protocol.x * c.protocol.delta <= c.protocol.deltaStar)
        throw ScenarioError("x*delta must exceed delta*");
    if (c.protocol.delta != c.net.delta)
        throw ScenarioError("protocol delta differs from the network delta");

    switch (c.setting) {
    case Setting::DynamicallyAvailable:
        throw ScenarioError("PosT runs in the quasi-permissionless or permissioned setting");
    case Setting::Permissioned:
        if (!c.activity.windows.empty())
            throw ScenarioError("permissioned players are always active");
        for (const auto& in : c.injections)
            if (in.type != TxKind::Payment)
                throw ScenarioError("stake-changing transactions are not allowed in the permissioned setting");
        break;
    case Setting::QuasiPermissionless:
        for (const auto& ps : c.players)
            if (!ps.byzantine && c.activity.windows.count(ps.p))
                throw ScenarioError("honest staked player " + std::to_string(ps.p) +
                                    " must be active at every timeslot");
        break;
    }

    for (const auto& in : c.injections) {
        if (in.t < 1 || in.t > c.horizon)
            throw ScenarioError("injection at t=" + std::to_string(in.t) + " outside [1, horizon]");
        if (!seen.count(in.p))
            throw ScenarioError("injection to unknown player " + std::to_string(in.p));
        if (!c.activity.active(in.p, in.t))
            throw ScenarioError("injection to inactive player " + std::to_string(in.p));
        if (in.type != TxKind::Payment && !ids.count(in.id))
            throw ScenarioError("escrow transaction for unknown identifier " + std::to_string(in.id));
    }
    if (c.gamma < 0)
        throw ScenarioError("gamma must be nonnegative");
    if (c.prices.C < 0 || c.prices.c < 0)
        throw ScenarioError("prices must be nonnegative");
}

RunResult runScenario(const ScenarioConfig& cfg)
{
    validateConfig(cfg);
    RunResult out;
    out.config = cfg;
    SignatureRegistry reg;
    for (const auto& ps : cfg.players)
        for (auto id : ps.ids)
            reg.assign(ps.p, id);
    StakeCache stake(cfg.initialStake(), cfg.stake);
    out.trace.setHeader(header(cfg));

    KernelConfig kc;
    for (const auto& ps : cfg.players) {
        kc.players.push_back(ps.p);
        if (ps.byzantine)
            kc.byzantine.insert(ps.p);
    }
    kc.net = cfg.net;
    kc.activity = cfg.activity;
    kc.horizon = cfg.horizon;
    Kernel k(kc, reg, out.trace);
    for (const auto& ps : cfg.players)
        if (!ps.byzantine)
            k.setProcess(ps.p, std::make_unique<PostNode>(ps.p, ps.ids, cfg.protocol, stake, reg));

    std::vector<std::pair<Injection, TxPtr>> extra;
    auto adv = buildAdversary(cfg, stake, reg, extra, out.info);
    if (adv) {
        if (auto* sh = dynamic_cast<ShadowAdversary*>(adv.get()))
            sh->bind(k);
        k.setAdversary(adv);
    }
    for (const auto& in : cfg.injections)
        k.inject(in.p, in.t, makeTx(in, reg));
    for (const auto& [in, tx] : extra)
        k.inject(in.p, in.t, tx);

    if (cfg.net.regime == Regime::StarBounded && cfg.net.relaxed) {
        auto honest = cfg.honest();
        k.onSlotEnd([honest, &out](Kernel& kk, Timeslot t) {
            if (kk.network().t0star)
                return;
            for (auto p : honest) {
                auto* n = dynamic_cast<PostNode*>(kk.process(p));
                if (n && (n->epoch() > 0 || n->rec())) {
                    kk.setT0Star(t);
                    kk.trace().add("t0star", t, -1, 0);
                    out.info["t0star"] = t;
                    return;
                }
            }
        });
    }
    k.run();

    if (auto* eq = dynamic_cast<EquivocationAdversary*>(adv.get())) {
        if (auto b = eq->blockB())
            out.info["b"] = hex(*b);
        if (auto bp = eq->blockBPrime())
            out.info["bprime"] = hex(*bp);
    }
    if (auto* wh = dynamic_cast<WithholdingAdversary*>(adv.get()))
        if (auto r = wh->releasedAt())
            out.info["released"] = *r;
    return out;
}

json reportJson(const TraceLog& log)
{
    TraceIndex ix(log);
    json out;
    auto v = findViolations(ix);
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    out["violation"] = {{"omniscient", opt(v.omniscient)},
                        {"sighted", opt(v.sighted)},
                        {"sightedBy", opt(v.sightedBy)},
                        {"epoch", opt(v.epoch)}};
    auto del = checkDeliveries(ix);
    out["deliveries"] = {{"ok", del.ok}, {"detail", del.detail}};
    auto l1 = checkLemma1(ix);
    out["lemma1"] = {{"ok", l1.ok}, {"detail", l1.detail}};
    if (v.omniscient) {
        auto l2 = checkLemma2(ix);
        out["lemma2"] = {{"ok", l2.result.ok},
                         {"detail", l2.result.detail},
                         {"epoch", l2.epoch},
                         {"t", l2.t},
                         {"deadline", l2.deadline}};
        auto l6 = checkLemma6(ix);
        out["recovery"] = {{"ok", l6.result.ok},
                           {"detail", l6.result.detail},
                           {"completed", l6.completed},
                           {"epoch", l6.epoch},
                           {"bg", hex(l6.bg)},
                           {"base", hex(l6.base)},
                           {"tf", l6.tf},
                           {"implicated", l6.implicated},
                           {"implicatedShare", toString(l6.implicatedShare)},
                           {"outputShare", toString(l6.outputShare)},
                           {"instance", l6.instance}};
    }
    auto lv = measureLiveness(ix);
    out["liveness"] = {{"kstar", lv.kstar},
                       {"bound", lv.bound},
                       {"maxLag", lv.maxLag},
                       {"allConfirmed", lv.allConfirmed},
                       {"transactions", lv.entries.size()}};
    auto rb = rhoBounded(ix);
    out["rho"] = {{"max", toString(rb.maxByzantineShare)}, {"worstEpoch", rb.worstEpoch}};
    auto eaac = computeVerdict(ix);
    out["eaac"] = {{"class", eaacClassName(eaac.classification)},
                   {"tStar", opt(eaac.tStar)},
                   {"tF", opt(eaac.tF)},
                   {"alphaHMin", toString(eaac.alphaHMin)},
                   {"alphaHWorst", eaac.alphaHWorst},
                   {"alphaB", toString(eaac.alphaB)},
                   {"alphaBAt", eaac.alphaBAt},
                   {"rhoStar", toString(eaac.rhoStar)},
                   {"alphaBound", toString(eaac.alphaBound)},
                   {"flowCost", toString(eaac.flowCost)}};
    return out;
}

int workerCount()
{
    if (const char* env = std::getenv("POST_WORKERS")) {
        int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<RunResult> runMany(const std::vector<ScenarioConfig>& cfgs)
{
    std::vector<RunResult> out(cfgs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i = next++; i < cfgs.size(); i = next++) {
            try {
                out[i] = runScenario(cfgs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(workerCount(), static_cast<int>(cfgs.size()));
    for (int i = 0; i < n; ++i)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

// Presets

namespace {

std::vector<PlayerSpec> roster(int n, const std::set<Identifier>& byz)
{
    std::vector<PlayerSpec> out;
    for (int i = 1; i <= n; ++i) {
        PlayerSpec ps;
        ps.p = static_cast<PlayerId>(i - 1);
        ps.ids = {static_cast<Identifier>(i)};
        ps.byzantine = byz.count(static_cast<Identifier>(i)) > 0;
        out.push_back(ps);
    }
    return out;
}

ScenarioConfig base(const std::string& name, int n, const std::set<Identifier>& byz, Regime regime, Timeslot delta,
                    Timeslot deltaStar, std::int64_t x)
{
    ScenarioConfig c;
    c.name = name;
    c.players = roster(n, byz);
    c.net.regime = regime;
    c.net.delta = delta;
    c.net.deltaStar = deltaStar;
    c.stake = StakeParams{10 * static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n)};
    c.protocol.x = x;
    c.protocol.delta = delta;
    c.protocol.deltaStar = deltaStar;
    return c;
}

void payments(ScenarioConfig& c, std::mt19937_64& rng, int count, Timeslot from, Timeslot to)
{
    auto honest = c.honest();
    for (int i = 0; i < count; ++i) {
        Injection in;
        in.t = std::uniform_int_distribution<Timeslot>(from, to)(rng);
        in.p = honest[std::uniform_int_distribution<std::size_t>(0, honest.size() - 1)(rng)];
        in.nonce = 1000 + static_cast<std::uint64_t>(i);
        c.injections.push_back(in);
    }
}

struct EquivocationRow {
    const char* rho;
    int n;
    int b;
    int h1;
    const char* q;
};

const EquivocationRow kEquivocation[] = {
    {"0.65", 20, 13, 4, "2/3"},
    {"5/9", 9, 5, 2, "2/3"},
    {"0.4", 10, 4, 3, "2/3"},
    {"0.7", 10, 7, 2, "3/4"},
};

std::string paramString(const json& param, const char* key, const std::string& dflt)
{
    if (param.is_object() && param.contains(key))
        return param.at(key).is_string() ? param.at(key).get<std::string>() : param.at(key).dump();
    return dflt;
}

template <class T>
T paramValue(const json& param, const char* key, T dflt)
{
    if (param.is_object() && param.contains(key))
        return param.at(key).get<T>();
    return dflt;
}

} // namespace

std::vector<std::string> presetNames()
{
    return {"happy",       "unstake",     "safety-random", "liveness", "equivocation", "withholding",
            "tendermint",  "quorum-variant", "theorem2"};
}

ScenarioConfig preset(const std::string& name, const json& param)
{
    if (name == "happy" || name == "unstake") {
        auto c = base(name, 4, {}, Regime::Synchronous, 1, 2, 10);
        c.stake = StakeParams{100, 4};
        c.horizon = 300;
        for (int i = 0; i < 3; ++i)
            c.injections.push_back(Injection{1 + 40 * i, static_cast<PlayerId>(i), TxKind::Payment, 0,
                                             static_cast<std::uint64_t>(i + 1)});
        if (name == "unstake")
            c.injections.push_back(Injection{5, 0, TxKind::RemoveEscrow, 4, 0});
        return c;
    }
    if (name == "safety-random" || name == "quorum-variant") {
        auto seed = paramValue<std::uint64_t>(param, "seed", 1);
        std::mt19937_64 rng(seed * 7919 + (name == "quorum-variant" ? 17 : 0));
        int n = name == "quorum-variant" ? 8 : 4 + static_cast<int>(seed % 7);
        int bmax = name == "quorum-variant" ? (n - 1) / 2 : (n - 1) / 3;
        int b = name == "quorum-variant" ? bmax : std::uniform_int_distribution<int>(0, bmax)(rng);
        std::vector<Identifier> ids;
        for (int i = 1; i <= n; ++i)
            ids.push_back(static_cast<Identifier>(i));
        std::shuffle(ids.begin(), ids.end(), rng);
        std::set<Identifier> byz(ids.begin(), ids.begin() + b);
        auto c = base(name, n, byz, Regime::PartialSynchrony, 2, 2, 2 * n + 1);
        c.seed = seed;
        if (name == "quorum-variant")
            c.protocol.q = Rational(3, 4);
        c.net.gst = std::uniform_int_distribution<Timeslot>(40, 200)(rng);
        c.attack = json{{"kind", "random"}, {"seed", seed}};
        c.horizon = c.net.gst + 400;
        payments(c, rng, 6, 1, c.net.gst + 100);
        return c;
    }
    if (name == "liveness") {
        auto deltaStar = paramValue<Timeslot>(param, "deltaStar", 2);
        auto seed = paramValue<std::uint64_t>(param, "seed", 3);
        auto c = base(name, 7, {3, 6}, Regime::PartialSynchrony, 1, deltaStar, 21);
        c.seed = seed;
        c.net.gst = 100;
        c.attack = json{{"kind", "random"}, {"seed", seed}};
        c.horizon = 500;
        std::mt19937_64 rng(seed);
        payments(c, rng, 10, 1, 300);
        return c;
    }
    if (name == "equivocation") {
        std::string rho = paramString(param, "rho", "0.65");
        const EquivocationRow* row = nullptr;
        for (const auto& r : kEquivocation)
            if (rho == r.rho)
                row = &r;
        if (!row)
            throw ScenarioError("no equivocation preset for rho*=" + rho + " (have 0.65, 5/9, 0.4, 0.7)");
        std::set<Identifier> byz;
        for (int i = row->n - row->b + 1; i <= row->n; ++i)
            byz.insert(static_cast<Identifier>(i));
        const Timeslot deltaStar = 9;
        auto c = base(name, row->n, byz, Regime::StarBounded, 1, deltaStar, 2 * row->n + 1);
        c.protocol.q = parseRational(row->q);
        c.net.gst = 100000;
        c.net.relaxed = paramValue<bool>(param, "relaxed", false);
        c.attack = json{{"kind", "equivocation"},
                        {"h1", row->h1},
                        {"recovery", paramString(param, "recovery", "silent")},
                        {"rho", rho}};
        c.horizon = 4 * (2 * c.protocol.x + 1) + 2 * (row->n + 1) * deltaStar + 50;
        c.injections.push_back(Injection{1, 0, TxKind::Payment, 0, 1});
        return c;
    }
    if (name == "withholding") {
        int stages = paramValue<int>(param, "stages", 2);
        int b = paramValue<int>(param, "byzantine", 5);
        if (stages != 2 && stages != 3)
            throw ScenarioError("withholding stages must be 2 or 3");
        if (b < 2 || b > 5)
            throw ScenarioError("withholding supports 2 to 5 Byzantine identifiers");
        std::set<Identifier> byz;
        for (int i = 2; i < 2 + b; ++i)
            byz.insert(static_cast<Identifier>(i));
        auto c = base(name, 9, byz, Regime::StarBounded, 1, 9, 19);
        c.protocol.twoStage = stages == 2;
        c.net.gst = 100000;
        c.attack = json{{"kind", "withholding"}, {"view", 19}, {"hs", 0}};
        c.horizon = stages == 2 ? 320 : 360;
        for (auto id : byz)
            c.injections.push_back(Injection{1, 0, TxKind::RemoveEscrow, id, 0});
        return c;
    }
    if (name == "tendermint") {
        auto seed = paramValue<std::uint64_t>(param, "seed", 5);
        auto c = base(name, 4, {4}, Regime::Synchronous, 1, 1, 1000);
        c.seed = seed;
        c.setting = Setting::Permissioned;
        c.protocol.twoStage = true;
        c.attack = json{{"kind", "random"}, {"seed", seed}};
        c.horizon = 200;
        std::mt19937_64 rng(seed);
        payments(c, rng, 5, 1, 100);
        return c;
    }
    if (name == "theorem2") {
        auto c = base(name, 4, {2, 3}, Regime::PartialSynchrony, 1, 2, 9);
        c.protocol.q = Rational(3, 4);
        const Timeslot tl = 32;
        c.gamma = paramValue<Timeslot>(param, "gamma", 104);
        c.net.gst = 3 * tl + c.gamma;
        c.attack = json{{"kind", "theorem2"}, {"x", json::array({0})}, {"z", json::array({3})}, {"tl", tl}};
        c.injections.push_back(Injection{1, 0, TxKind::Payment, 0, 1});
        c.injections.push_back(Injection{1, 3, TxKind::Payment, 0, 2});
        for (Identifier id : {2u, 3u}) {
            c.injections.push_back(Injection{2 * tl, 0, TxKind::RemoveEscrow, id, 1});
            c.injections.push_back(Injection{2 * tl, 3, TxKind::RemoveEscrow, id, 2});
        }
        c.horizon = c.net.gst + 60;
        return c;
    }
    throw ScenarioError("unknown preset '" + name + "'");
}

// Theorem 1: permitted longest chain in the dynamically available setting.

std::vector<std::string> playerInputs(const TraceLog& log, PlayerId p, Timeslot before)
{
    std::vector<std::string> out;
    for (const auto& r : log.records()) {
        if (r.t >= before || r.p != static_cast<std::int64_t>(p))
            continue;
        if (r.k == "recv" || r.k == "inject" || r.k == "oracle")
            out.push_back(r.k + " t=" + std::to_string(r.t) + " d=" + hex(r.d) + " from=" + std::to_string(r.from) +
                          " sent=" + std::to_string(r.sent));
    }
    return out;
}

namespace {

// A Byzantine group that replays the isolated execution in which only it is
// active, reveals everything at t*-1, and runs honestly from t*.
class ReplayAdversary : public Adversary {
public:
    ReplayAdversary(std::vector<PlayerId> own, Timeslot tstar, LongestChainParams lp, SignatureRegistry& reg)
        : own_(std::move(own)), tstar_(tstar)
    {
        for (auto p : own_)
            nodes_[p] = std::make_unique<LongestChainNode>(p, lp, reg);
    }

    void step(AdversaryContext& ctx) override
    {
        Timeslot t = ctx.t();
        std::map<PlayerId, std::vector<Received>> next;
        for (auto p : own_) {
            std::vector<Received> in;
            std::vector<Received> injected;
            auto it = ctx.inboxes().find(p);
            if (it != ctx.inboxes().end())
                for (const auto& r : it->second) {
                    if (r.injected)
                        injected.push_back(r);
                    else if (t < tstar_ && !isOwn(r.env->sender))
                        held_[p].push_back(r);
                    else if (t >= tstar_)
                        in.push_back(r);
                }
            if (t < tstar_) {
                in = std::move(internal_[p]);
            } else if (t == tstar_) {
                auto held = std::move(held_[p]);
                held.insert(held.end(), in.begin(), in.end());
                in = std::move(held);
                std::stable_sort(in.begin(), in.end(), [](const Received& a, const Received& b) {
                    return std::tie(a.env->sent, a.env->sender, a.env->seq) <
                           std::tie(b.env->sent, b.env->sender, b.env->seq);
                });
            }
            in.insert(in.end(), injected.begin(), injected.end());
            auto query = [&](const PermitterQuery& q) { return ctx.query(p, q); };
            for (auto& m : nodes_[p]->advance(t, in, query, nullptr)) {
                if (t >= tstar_) {
                    ctx.disseminate(p, m);
                    continue;
                }
                auto env = std::make_shared<Envelope>();
                env->sender = p;
                env->sent = t;
                env->seq = seq_[p]++;
                env->msg = m;
                for (auto q : own_)
                    next[q].push_back({env, false});
                withheld_.emplace_back(p, m);
            }
        }
        for (auto& [q, v] : next) {
            std::stable_sort(v.begin(), v.end(), [](const Received& a, const Received& b) {
                return std::tie(a.env->sent, a.env->sender, a.env->seq) <
                       std::tie(b.env->sent, b.env->sender, b.env->seq);
            });
            internal_[q] = std::move(v);
        }
        if (t == tstar_ - 1) {
            for (auto& [p, m] : withheld_)
                ctx.disseminate(p, m);
            withheld_.clear();
        }
    }

private:
    bool isOwn(PlayerId p) const { return std::find(own_.begin(), own_.end(), p) != own_.end(); }

    std::vector<PlayerId> own_;
    Timeslot tstar_;
    std::map<PlayerId, std::unique_ptr<LongestChainNode>> nodes_;
    std::map<PlayerId, std::vector<Received>> internal_;
    std::map<PlayerId, std::vector<Received>> held_;
    std::map<PlayerId, std::uint64_t> seq_;
    std::vector<std::pair<PlayerId, MsgPtr>> withheld_;
};

struct LcExecution {
    TraceLog trace;
    std::optional<Timeslot> confirmedBy;
};

// which: 1 = only X active, 2 = only Y active, 3 = X Byzantine, 4 = Y Byzantine.
LcExecution runLongestChain(int which, std::uint64_t seed, std::size_t groupSize, Timeslot tstar, Timeslot horizon)
{
    LcExecution out;
    SignatureRegistry reg;
    std::vector<PlayerId> X;
    std::vector<PlayerId> Y;
    for (std::size_t i = 0; i < groupSize; ++i) {
        X.push_back(static_cast<PlayerId>(i));
        Y.push_back(static_cast<PlayerId>(groupSize + i));
    }
    KernelConfig kc;
    kc.net.regime = Regime::Synchronous;
    kc.net.delta = 1;
    kc.horizon = horizon;
    for (std::size_t i = 0; i < 2 * groupSize; ++i) {
        kc.players.push_back(static_cast<PlayerId>(i));
        reg.assign(static_cast<PlayerId>(i), static_cast<Identifier>(i + 1));
    }
    if (which == 1)
        for (auto p : Y)
            kc.activity.setInactive(p);
    if (which == 2)
        for (auto p : X)
            kc.activity.setInactive(p);
    const auto& byzGroup = which == 3 ? X : Y;
    if (which >= 3)
        kc.byzantine.insert(byzGroup.begin(), byzGroup.end());

    json players = json::array();
    for (auto p : kc.players)
        players.push_back(json{{"p", p}, {"ids", json::array({p + 1})}, {"byzantine", kc.byzantine.count(p) > 0}});
    json activity = json::object();
    for (const auto& [p, w] : kc.activity.windows)
        activity[std::to_string(p)] = json::array();
    out.trace.setHeader(json{{"name", "theorem1-ex" + std::to_string(which)},
                             {"seed", seed},
                             {"setting", settingName(Setting::DynamicallyAvailable)},
                             {"players", players},
                             {"params", {{"x", 1}, {"delta", 1}, {"deltaStar", 1}, {"q", "2/3"}, {"twoStage", false}}},
                             {"net", {{"regime", "synchronous"}, {"delta", 1}, {"gst", 0}, {"deltaStar", 1}}},
                             {"activity", activity},
                             {"horizon", horizon},
                             {"stake", {{"N", 1}, {"xstar", 1}, {"sstar", json::array()}}}});

    auto activityCopy = kc.activity;
    Permitter permitter(PermitterConfig{UseMode::Single, false, 1},
                        [activityCopy](PlayerId p, Timeslot t) -> std::uint64_t {
                            return activityCopy.active(p, t) ? 1 : 0;
                        },
                        seed, reg);
    Kernel k(kc, reg, out.trace, &permitter);
    LongestChainParams lp;
    for (auto p : kc.players)
        if (!kc.byzantine.count(p))
            k.setProcess(p, std::make_unique<LongestChainNode>(p, lp, reg));
    if (which >= 3)
        k.setAdversary(std::make_shared<ReplayAdversary>(byzGroup, tstar, lp, reg));
    auto tr1 = makePayment(1, reg);
    auto tr2 = makePayment(2, reg);
    if (which != 2)
        k.inject(X.front(), 1, tr1);
    if (which != 1)
        k.inject(Y.front(), 1, tr2);
    const auto& watch = which == 2 ? Y : X;
    const Digest want = which == 2 ? tr2->digest : tr1->digest;
    while (k.step()) {
        if (out.confirmedBy || which >= 3)
            continue;
        bool all = true;
        for (auto p : watch) {
            auto* n = dynamic_cast<LongestChainNode*>(k.process(p));
            all = all && n && n->confirmed().contains(want);
        }
        if (all)
            out.confirmedBy = k.now();
    }
    return out;
}

std::optional<std::string> firstDiff(const TraceLog& a, const TraceLog& b, PlayerId p, Timeslot before)
{
    auto x = playerInputs(a, p, before);
    auto y = playerInputs(b, p, before);
    for (std::size_t i = 0; i < std::max(x.size(), y.size()); ++i) {
        std::string l = i < x.size() ? x[i] : "<none>";
        std::string r = i < y.size() ? y[i] : "<none>";
        if (l != r)
            return "player " + std::to_string(p) + " input " + std::to_string(i) + ": " + l + " vs " + r;
    }
    return std::nullopt;
}

} // namespace

Theorem1Result runTheorem1(std::uint64_t seed, std::size_t groupSize)
{
    Theorem1Result out;
    const Timeslot calibration = 400;
    auto ex1 = runLongestChain(1, seed, groupSize, 0, calibration);
    auto ex2 = runLongestChain(2, seed, groupSize, 0, calibration);
    if (!ex1.confirmedBy || !ex2.confirmedBy)
        throw ScenarioError("longest chain did not confirm the transaction within the calibration horizon");
    out.tl = std::max(*ex1.confirmedBy, *ex2.confirmedBy) - 1;
    out.tstar = 2 * (1 + out.tl);
    const Timeslot horizon = out.tstar + 10;
    for (int which = 1; which <= 4; ++which)
        out.traces.push_back(runLongestChain(which, seed, groupSize, out.tstar, horizon).trace);
    for (std::size_t i = 0; i < groupSize && !out.diffYEx3Ex2; ++i)
        out.diffYEx3Ex2 = firstDiff(out.traces[2], out.traces[1], static_cast<PlayerId>(groupSize + i), out.tstar);
    for (std::size_t i = 0; i < groupSize && !out.diffXEx4Ex1; ++i)
        out.diffXEx4Ex1 = firstDiff(out.traces[3], out.traces[0], static_cast<PlayerId>(i), out.tstar);
    out.ex3 = findViolations(TraceIndex(out.traces[2]));
    out.ex4 = findViolations(TraceIndex(out.traces[3]));
    return out;
}

} // namespace post
