#pragma once

#include "post/adversary.hpp"
#include "post/economics.hpp"
#include "post/longest_chain.hpp"

namespace post {

enum class Setting : std::uint8_t { DynamicallyAvailable, QuasiPermissionless, Permissioned };

const char* settingName(Setting s);
Setting parseSetting(const std::string& s);

struct PlayerSpec {
    PlayerId p = 0;
    std::vector<Identifier> ids;
    bool byzantine = false;
    // Initial stake per identifier, in multiples of N/x*.
    std::uint64_t quanta = 1;
};

struct Injection {
    Timeslot t = 0;
    PlayerId p = 0;
    TxKind type = TxKind::Payment;
    Identifier id = 0;
    std::uint64_t nonce = 0;
};

struct ScenarioConfig {
    std::string name = "custom";
    std::uint64_t seed = 1;
    std::vector<PlayerSpec> players;
    Setting setting = Setting::QuasiPermissionless;
    ActivitySchedule activity;
    NetworkModel net;
    StakeParams stake{100, 4};
    ProtocolParams protocol;
    // "none", "silent", "random", "equivocation", "withholding", "theorem2"
    json attack = json{{"kind", "none"}};
    std::vector<Injection> injections;
    PriceVector prices;
    Timeslot gamma = 0;
    Timeslot horizon = 200;

    std::vector<PlayerId> honest() const;
    std::vector<PlayerId> byzantine() const;
    InitialDistribution initialStake() const;
};

ScenarioConfig configFromJson(const json& j);
json configToJson(const ScenarioConfig& c);
// Throws ScenarioError naming the violated rule.
void validateConfig(const ScenarioConfig& c);

struct RunResult {
    ScenarioConfig config;
    TraceLog trace;
    json info = json::object();
};

RunResult runScenario(const ScenarioConfig& cfg);
// Every trace analysis in one object: violations, lemmas, liveness, EAAC verdict.
json reportJson(const TraceLog& log);
// Runs every config on a pool of POST_WORKERS threads (hardware concurrency by default).
std::vector<RunResult> runMany(const std::vector<ScenarioConfig>& cfgs);
int workerCount();

// Named presets; `param` selects a variant (seed, rho*, ...) where relevant.
std::vector<std::string> presetNames();
ScenarioConfig preset(const std::string& name, const json& param = json());

// Smallest number of identifiers' stake that meets quorum q among n equal stakes.
std::int64_t quorumCount(std::int64_t n, const Rational& q);

struct Theorem1Result {
    Timeslot tl = 0;
    Timeslot tstar = 0;
    std::vector<TraceLog> traces;
    // First differing record for each indistinguishability obligation, if any.
    std::optional<std::string> diffYEx3Ex2;
    std::optional<std::string> diffXEx4Ex1;
    ViolationReport ex3;
    ViolationReport ex4;
};

Theorem1Result runTheorem1(std::uint64_t seed, std::size_t groupSize = 3);

// Inputs of player p before t: received messages, injections and oracle responses.
std::vector<std::string> playerInputs(const TraceLog& log, PlayerId p, Timeslot before);

} // namespace post
