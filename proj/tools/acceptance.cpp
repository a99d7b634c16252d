#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>

#include "post/harness.hpp"
#include "post/permitter.hpp"
#include "post/recovery.hpp"

using namespace post;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (ok)
            detail = why;
        ok = false;
    }
};

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since)
{
    return std::chrono::duration<double>(Clock::now() - since).count();
}

// Every trace produced here; Lemma 1 is checked over all of them.
std::vector<TraceLog> allTraces;

const TraceLog& keep(TraceLog log)
{
    allTraces.push_back(std::move(log));
    return allTraces.back();
}

std::vector<RunResult> runAll(const std::vector<ScenarioConfig>& cfgs)
{
    auto rs = runMany(cfgs);
    for (const auto& r : rs)
        allTraces.push_back(r.trace);
    return rs;
}

RunResult runOne(const std::string& name, const json& param)
{
    auto r = runScenario(preset(name, param));
    allTraces.push_back(r.trace);
    return r;
}

std::string str(const Rational& r)
{
    return toString(r);
}

Outcome theorem1()
{
    Outcome o;
    auto start = Clock::now();
    auto r = runTheorem1(1, 3);
    if (r.diffYEx3Ex2)
        o.fail("Y inputs differ between Ex3 and Ex2: " + *r.diffYEx3Ex2);
    if (r.diffXEx4Ex1)
        o.fail("X inputs differ between Ex4 and Ex1: " + *r.diffXEx4Ex1);
    bool at3 = r.ex3.omniscient && *r.ex3.omniscient == r.tstar;
    bool at4 = r.ex4.omniscient && *r.ex4.omniscient == r.tstar;
    if (!at3 && !at4)
        o.fail("no violation at t*=" + std::to_string(r.tstar));
    double s = seconds(start);
    if (s >= 10)
        o.fail("runtime " + std::to_string(s) + "s");
    if (o.ok)
        o.detail = "T_l=" + std::to_string(r.tl) + " t*=" + std::to_string(r.tstar) + " violation in" +
                   (at3 ? " Ex3" : "") + (at4 ? " Ex4" : "");
    return o;
}

Outcome theorem2()
{
    Outcome o;
    auto start = Clock::now();
    auto cfg = preset("theorem2");
    auto run = runScenario(cfg);
    const auto& log = keep(std::move(run.trace));
    TraceIndex ix(log);
    const Timeslot tl = cfg.attack.at("tl").get<Timeslot>();
    const Timeslot gst = ix.net().gst;
    if (gst != 3 * tl + cfg.gamma)
        o.fail("GST is not 3T_l+gamma");

    auto live = measureLiveness(ix);
    for (const auto* inj : ix.events("inject")) {
        if (inj->t >= gst)
            continue;
        bool found = false;
        for (const auto& e : live.entries)
            if (e.tx == inj->d && static_cast<std::int64_t>(e.p) == inj->p) {
                found = e.confirmed && *e.confirmed - inj->t <= tl;
                break;
            }
        if (!found)
            o.fail("transaction " + hex(inj->d) + " not confirmed by its recipient within T_l");
    }

    auto v = findViolations(ix);
    if (!v.sighted || *v.sighted != gst)
        o.fail("first sighting " + (v.sighted ? std::to_string(*v.sighted) : std::string("none")) + ", GST " +
               std::to_string(gst));

    LiquidInvestment inv(ix, cfg.gamma);
    auto byz = cfg.byzantine();
    for (Timeslot t = gst; t <= ix.horizon(); ++t) {
        Rational sum = 0;
        for (auto p : byz)
            sum += inv.ofPlayer(p, t) * cfg.prices.C;
        if (sum != 0) {
            o.fail("Y investment " + str(sum) + " at t=" + std::to_string(t));
            break;
        }
    }
    auto verdict = computeVerdict(ix, cfg.prices, &inv);
    if (verdict.alphaB != 1)
        o.fail("alpha_B=" + str(verdict.alphaB));
    if (verdict.classification != EaacClass::Cheap)
        o.fail(std::string("classification ") + eaacClassName(verdict.classification));
    double s = seconds(start);
    if (s >= 30)
        o.fail("runtime " + std::to_string(s) + "s");
    if (o.ok)
        o.detail = "sighted at GST=" + std::to_string(gst) + ", alpha_B=1, cheap";
    return o;
}

// Shared by the safety suites: no violation, admissible deliveries, Byzantine share below `limit`.
Outcome safetySuite(const std::string& name, const Rational& limit, std::vector<RunResult>& runs)
{
    Outcome o;
    auto start = Clock::now();
    std::vector<ScenarioConfig> cfgs;
    for (std::uint64_t s = 1; s <= 100; ++s)
        cfgs.push_back(preset(name, json{{"seed", s}}));
    runs = runAll(cfgs);
    std::size_t minN = 100, maxN = 0;
    for (const auto& r : runs) {
        TraceIndex ix(r.trace);
        auto tag = "seed " + std::to_string(r.config.seed) + ": ";
        auto n = r.config.players.size();
        minN = std::min(minN, n);
        maxN = std::max(maxN, n);
        if (n < 4 || n > 10)
            o.fail(tag + std::to_string(n) + " validators");
        if (ix.net().regime != Regime::PartialSynchrony)
            o.fail(tag + "not partially synchronous");
        auto v = findViolations(ix);
        if (v.omniscient || v.sighted)
            o.fail(tag + "consistency violation");
        auto d = checkDeliveries(ix);
        if (!d.ok)
            o.fail(tag + d.detail);
        auto rho = rhoBounded(ix);
        if (rho.maxByzantineShare >= limit)
            o.fail(tag + "Byzantine share " + str(rho.maxByzantineShare));
    }
    double s = seconds(start);
    if (s >= 300)
        o.fail("runtime " + std::to_string(s) + "s");
    if (o.ok)
        o.detail = "100 runs, " + std::to_string(minN) + "-" + std::to_string(maxN) +
                   " validators, no violation (" + std::to_string(static_cast<int>(s)) + "s)";
    return o;
}

void checkLivenessIn(const TraceLog& log, const std::string& tag, Outcome& o)
{
    TraceIndex ix(log);
    auto l = measureLiveness(ix);
    if (!l.allConfirmed)
        o.fail(tag + ": transaction never confirmed");
    if (l.maxLag > l.bound)
        o.fail(tag + ": lag " + std::to_string(l.maxLag) + " exceeds B=" + std::to_string(l.bound));
    if (l.bound != livenessBound(ix.net().delta, l.kstar))
        o.fail(tag + ": bound mismatch");
}

Outcome liveness(const std::vector<RunResult>& safetyRuns)
{
    Outcome o;
    for (const auto& r : safetyRuns)
        checkLivenessIn(r.trace, "seed " + std::to_string(r.config.seed), o);
    auto base = runOne("liveness", json{{"deltaStar", 2}});
    auto scaled = runOne("liveness", json{{"deltaStar", 20}});
    checkLivenessIn(base.trace, "liveness", o);
    checkLivenessIn(scaled.trace, "liveness x10", o);
    TraceIndex a(base.trace), b(scaled.trace);
    auto la = measureLiveness(a), lb = measureLiveness(b);
    if (la.entries.size() != lb.entries.size())
        o.fail("different transaction sets under scaled deltaStar");
    else
        for (std::size_t i = 0; i < la.entries.size(); ++i) {
            const auto &x = la.entries[i], &y = lb.entries[i];
            if (x.tx != y.tx || x.p != y.p || x.confirmed != y.confirmed || x.lag != y.lag) {
                o.fail("lag of " + hex(x.tx) + " at player " + std::to_string(x.p) + " changes with deltaStar");
                break;
            }
        }
    if (o.ok)
        o.detail = "max lag " + std::to_string(la.maxLag) + " <= B=" + std::to_string(la.bound) +
                   ", lags identical under deltaStar x10";
    return o;
}

Outcome lemma1()
{
    Outcome o;
    std::size_t cogs = 0;
    for (const auto& log : allTraces) {
        TraceIndex ix(log);
        cogs += ix.honestEvents("cog").size();
        auto r = checkLemma1(ix);
        if (!r.ok)
            o.fail(ix.header().value("name", "?") + ": " + r.detail);
    }
    if (o.ok)
        o.detail = std::to_string(allTraces.size()) + " traces, " + std::to_string(cogs) +
                   " certificates, all implicate Byzantine identifiers only";
    return o;
}

struct RhoCase {
    std::string rho;
    Rational value;
};

Outcome lemma2(const std::vector<RhoCase>& cases)
{
    Outcome o;
    for (const auto& c : cases)
        for (bool relaxed : {false, true}) {
            auto r = runOne("equivocation", json{{"rho", c.rho}, {"relaxed", relaxed}});
            TraceIndex ix(r.trace);
            auto tag = "rho*=" + c.rho + (relaxed ? " relaxed" : "");
            if (ix.net().regime != Regime::StarBounded)
                o.fail(tag + ": not starBounded");
            auto l2 = checkLemma2(ix);
            if (!l2.result.ok)
                o.fail(tag + ": " + l2.result.detail);
            if (relaxed && !r.info.contains("t0star"))
                o.fail(tag + ": no t0* recorded");
        }
    if (o.ok)
        o.detail = std::to_string(cases.size()) + " rho* values, strict and relaxed";
    return o;
}

Outcome lemma6(const std::vector<RhoCase>& cases, const Rational& q)
{
    Outcome o;
    std::string summary;
    for (const auto& c : cases) {
        auto r = runOne("equivocation", json{{"rho", c.rho}});
        TraceIndex ix(r.trace);
        auto tag = "rho*=" + c.rho + ": ";
        auto rec = checkLemma6(ix);
        if (!rec.result.ok)
            o.fail(tag + rec.result.detail);
        if (!rec.completed)
            o.fail(tag + "recovery did not complete");
        if (rec.implicatedShare < 2 * q - 1)
            o.fail(tag + "implicated share " + str(rec.implicatedShare));
        if (rec.outputShare <= Rational(1, 2))
            o.fail(tag + "output share " + str(rec.outputShare));
        auto v = computeVerdict(ix, r.config.prices);
        if (v.rhoStar != c.value)
            o.fail(tag + "measured rho* " + str(v.rhoStar));
        Rational bound = (c.value - (2 * q - 1)) / c.value;
        if (bound < 0)
            bound = 0;
        if (v.alphaB > bound)
            o.fail(tag + "alpha_B " + str(v.alphaB) + " > " + str(bound));
        if (v.alphaHMin < 1)
            o.fail(tag + "alpha_H " + str(v.alphaHMin) + " at t=" + std::to_string(v.alphaHWorst));
        if (v.classification != EaacClass::ExpensiveAbsentCollapse)
            o.fail(tag + "classification " + eaacClassName(v.classification));
        summary += (summary.empty() ? "" : ", ") + c.rho + ": alpha_B=" + str(v.alphaB) + "<=" + str(bound);
    }
    if (o.ok)
        o.detail = summary;
    return o;
}

Outcome threeStage()
{
    Outcome o;
    {
        auto r = runOne("withholding", json{{"stages", 2}});
        TraceIndex ix(r.trace);
        auto cogs = ix.honestEvents("cog");
        if (cogs.empty()) {
            o.fail("two-stage: no certificate of guilt");
        } else {
            const auto* first = cogs.front();
            for (const auto* c : cogs)
                if (c->t < first->t)
                    first = c;
            auto ids = first->extra.at("implicated").get<std::vector<Identifier>>();
            CanonicalInvestment inv(ix);
            auto exit = inv.exitTime(ids);
            if (!exit)
                o.fail("two-stage: implicated stake never leaves escrow");
            else if (first->t <= *exit)
                o.fail("two-stage: certificate at t=" + std::to_string(first->t) + " not after escrow exit at t=" +
                       std::to_string(*exit));
            auto v = computeVerdict(ix, r.config.prices);
            if (v.classification != EaacClass::Cheap)
                o.fail(std::string("two-stage: classification ") + eaacClassName(v.classification));
            if (o.ok)
                o.detail = "two-stage: exit t=" + std::to_string(*exit) + ", certificate t=" +
                           std::to_string(first->t) + ", cheap";
        }
    }
    {
        auto r = runOne("withholding", json{{"stages", 3}});
        TraceIndex ix(r.trace);
        auto l2 = checkLemma2(ix);
        if (!l2.result.ok)
            o.fail("three-stage: " + l2.result.detail);
        auto rec = checkLemma6(ix);
        if (!rec.result.ok)
            o.fail("three-stage: " + rec.result.detail);
        auto v = computeVerdict(ix, r.config.prices);
        if (v.classification != EaacClass::ExpensiveAbsentCollapse)
            o.fail(std::string("three-stage: classification ") + eaacClassName(v.classification));
        if (o.ok)
            o.detail += "; three-stage: certificate by t=" + std::to_string(l2.deadline);
    }
    for (int stages : {2, 3}) {
        auto r = runOne("withholding", json{{"stages", stages}, {"byzantine", 2}});
        TraceIndex ix(r.trace);
        auto v = findViolations(ix);
        if (v.omniscient || v.sighted)
            o.fail("minority withholding violates consistency with " + std::to_string(stages) + " stages");
    }
    return o;
}

// Outputs predicted without simulating: an honest leader's input everywhere,
// otherwise every honest player ends with the union of first-round values.
std::map<int, std::optional<int>> dsOracle(const ds::Setup& s, const std::vector<std::map<int, std::set<int>>>& sends)
{
    std::set<int> values;
    if (!s.byzantine.count(s.leader))
        values = {s.input};
    else
        for (const auto& [to, vs] : sends[0])
            if (!s.byzantine.count(to))
                values.insert(vs.begin(), vs.end());
    std::map<int, std::optional<int>> out;
    for (int p = 0; p < s.n; ++p)
        if (!s.byzantine.count(p))
            out[p] = values.size() == 1 ? std::optional<int>(*values.begin()) : std::nullopt;
    return out;
}

Outcome dolevStrong()
{
    Outcome o;
    auto start = Clock::now();
    const int n = 4, f = 1, rounds = f + 1;
    std::size_t executions = 0;
    for (int leader = 0; leader < n; ++leader)
        for (int bad = 0; bad < n; ++bad)
            for (int input = 0; input < 2; ++input) {
                ds::Setup s{n, f, leader, {bad}, input};
                std::vector<int> honest;
                for (int p = 0; p < n; ++p)
                    if (p != bad)
                        honest.push_back(p);
                // Each round, each honest recipient gets a subset of {0,1}: 4^3 per round.
                const int perRound = 1 << (2 * static_cast<int>(honest.size()));
                for (int code = 0; code < perRound * perRound; ++code) {
                    std::vector<std::map<int, std::set<int>>> sends(rounds);
                    int rest = code;
                    for (int r = 0; r < rounds; ++r)
                        for (int h : honest) {
                            for (int v = 0; v < 2; ++v)
                                if (rest >> v & 1)
                                    sends[r][h].insert(v);
                            rest >>= 2;
                        }
                    auto adversary = [&](int round, const std::set<ds::Chain>& known) {
                        std::map<int, std::vector<ds::Chain>> out;
                        for (const auto& [to, vs] : sends[round - 1])
                            for (int v : vs) {
                                ds::Chain c{v, {leader}};
                                if (round > 1) {
                                    bool relayed = false;
                                    for (const auto& k : known)
                                        if (k.value == v && static_cast<int>(k.signers.size()) == round - 1 &&
                                            std::find(k.signers.begin(), k.signers.end(), bad) == k.signers.end()) {
                                            c = k;
                                            relayed = true;
                                            break;
                                        }
                                    if (!relayed && leader == bad)
                                        c.signers.push_back((leader + 1) % n);
                                }
                                if (static_cast<int>(c.signers.size()) < round)
                                    c.signers.push_back(bad);
                                out[to].push_back(c);
                            }
                        return out;
                    };
                    auto got = ds::run(s, adversary);
                    ++executions;
                    std::optional<std::optional<int>> agreed;
                    for (const auto& [p, v] : got.output) {
                        if (agreed && *agreed != v)
                            o.fail("disagreement: leader " + std::to_string(leader) + " byzantine " +
                                   std::to_string(bad) + " case " + std::to_string(code));
                        agreed = v;
                        if (leader != bad && v != std::optional<int>(input))
                            o.fail("validity: honest leader " + std::to_string(leader) + " case " +
                                   std::to_string(code));
                    }
                    if (got.output != dsOracle(s, sends))
                        o.fail("oracle mismatch: leader " + std::to_string(leader) + " byzantine " +
                               std::to_string(bad) + " case " + std::to_string(code));
                }
            }
    double s = seconds(start);
    if (s >= 60)
        o.fail("runtime " + std::to_string(s) + "s");
    if (o.ok)
        o.detail = std::to_string(executions) + " executions";
    return o;
}

Outcome permitterStats()
{
    Outcome o;
    auto start = Clock::now();
    SignatureRegistry reg;
    const std::uint64_t b = 64;
    const int queries = 100000;
    Permitter perm({UseMode::Multi, false, b}, [&](PlayerId, Timeslot) { return b; }, 7, reg);
    std::array<int, 9> atLeast{};
    for (int i = 1; i <= queries; ++i) {
        auto r = perm.submitQuery(0, i, {b, "q"});
        int z = leadingZeroBits(r.tau);
        for (int k = 1; k <= 8 && k <= z; ++k)
            ++atLeast[static_cast<std::size_t>(k)];
    }
    std::string worst;
    double worstZ = 0;
    for (int k = 1; k <= 8; ++k) {
        // P(tau < 2^(256-k)) = 1 - (1 - 2^-k)^b
        double p = 1 - std::pow(1 - std::ldexp(1.0, -k), static_cast<double>(b));
        double mean = queries * p;
        double sigma = std::sqrt(queries * p * (1 - p));
        double z = std::abs(atLeast[static_cast<std::size_t>(k)] - mean) / sigma;
        if (z > worstZ) {
            worstZ = z;
            worst = "k=" + std::to_string(k);
        }
        if (z > 3)
            o.fail("k=" + std::to_string(k) + ": " + std::to_string(atLeast[static_cast<std::size_t>(k)]) +
                   " vs expected " + std::to_string(mean));
    }

    std::mt19937_64 rng(11);
    std::size_t rejected = 0;
    for (UseMode mode : {UseMode::Single, UseMode::Multi}) {
        std::map<std::pair<PlayerId, Timeslot>, std::uint64_t> budget, spent;
        auto balance = [&](PlayerId p, Timeslot t) {
            auto key = std::make_pair(p, t);
            auto it = budget.find(key);
            if (it == budget.end())
                it = budget.emplace(key, rng() % 5).first;
            return it->second;
        };
        Permitter fuzz({mode, false, 4}, balance, 3, reg);
        for (int i = 0; i < 20000; ++i) {
            PlayerId p = rng() % 3;
            Timeslot t = 1 + static_cast<Timeslot>(rng() % 20);
            std::uint64_t qb = rng() % 6;
            auto bal = balance(p, t);
            auto& used = spent[{p, t}];
            bool over = qb == 0 || qb > bal || (mode == UseMode::Single && used + qb > bal);
            bool threw = false;
            try {
                fuzz.submitQuery(p, t, {qb, "f"});
            } catch (const QueryRejected&) {
                threw = true;
            }
            if (threw != over) {
                o.fail(std::string("budget fuzz: ") + (over ? "accepted" : "rejected") + " b=" + std::to_string(qb) +
                       " with balance " + std::to_string(bal) + " spent " + std::to_string(used));
                break;
            }
            if (!threw)
                used += qb;
            rejected += threw;
        }
    }
    double s = seconds(start);
    if (s >= 30)
        o.fail("runtime " + std::to_string(s) + "s");
    if (o.ok)
        o.detail = "worst deviation " + std::to_string(worstZ) + " sigma at " + worst + ", " +
                   std::to_string(rejected) + " over-budget queries rejected";
    return o;
}

Outcome generalizedQuorum()
{
    Outcome o;
    std::vector<RunResult> runs;
    auto safety = safetySuite("quorum-variant", Rational(1, 2), runs);
    if (!safety.ok)
        o.fail("safety: " + safety.detail);
    for (const auto& r : runs)
        if (r.config.protocol.q != Rational(3, 4))
            o.fail("quorum-variant without q=3/4");
    std::vector<RhoCase> cases{{"0.7", Rational(7, 10)}};
    auto before = allTraces.size();
    auto l2 = lemma2(cases);
    if (!l2.ok)
        o.fail("lemma 2: " + l2.detail);
    auto l6 = lemma6(cases, Rational(3, 4));
    if (!l6.ok)
        o.fail("lemma 6: " + l6.detail);
    for (auto i = before; i < allTraces.size(); ++i) {
        auto l1 = checkLemma1(TraceIndex(allTraces[i]));
        if (!l1.ok)
            o.fail("lemma 1: " + l1.detail);
    }
    if (o.ok)
        o.detail = safety.detail + "; rho*=0.7 " + l6.detail;
    return o;
}

} // namespace

int main()
{
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
    std::vector<RunResult> safetyRuns;
    const std::vector<RhoCase> rhos{{"0.4", Rational(2, 5)}, {"5/9", Rational(5, 9)}, {"0.65", Rational(13, 20)}};

    criteria.emplace_back("theorem-1 construction", theorem1);
    criteria.emplace_back("theorem-2 construction", theorem2);
    criteria.emplace_back("safety", [&] { return safetySuite("safety-random", Rational(1, 3), safetyRuns); });
    criteria.emplace_back("liveness", [&] { return liveness(safetyRuns); });
    criteria.emplace_back("lemma-2 timing", [&] { return lemma2(rhos); });
    criteria.emplace_back("lemma-6 and theorem-3", [&] { return lemma6(rhos, Rational(2, 3)); });
    criteria.emplace_back("three-stage necessity", threeStage);
    criteria.emplace_back("dolev-strong core", dolevStrong);
    criteria.emplace_back("permitter statistics", permitterStats);
    criteria.emplace_back("generalized quorum", generalizedQuorum);

    // Lemma 1 covers every trace, so it runs last but reports as criterion 5.
    std::vector<std::pair<int, std::string>> lines;
    int failures = 0;
    const int numbers[] = {1, 2, 3, 4, 6, 7, 8, 9, 10, 11};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failures += !o.ok;
        lines.emplace_back(numbers[i], (o.ok ? "PASS " : "FAIL ") + criteria[i].first + ": " + o.detail);
    }
    auto l1 = lemma1();
    failures += !l1.ok;
    lines.emplace_back(5, (l1.ok ? "PASS " : "FAIL ") + std::string("lemma-1 accountability: ") + l1.detail);
    std::sort(lines.begin(), lines.end());
    for (const auto& [n, line] : lines)
        std::cout << "[" << n << "] " << line << "\n";
    std::cout << (failures ? "FAILED " + std::to_string(failures) : std::string("ALL PASS")) << "\n";
    return failures ? 1 : 0;
}
