#pragma once

#include <unordered_map>

#include "post/kernel.hpp"
#include "post/post.hpp"

namespace post {

struct TraceBlock {
    Digest d = 0;
    bool genesis = false;
    std::int64_t h = 0;
    std::int64_t v = 0;
    std::int64_t e = 0;
    Digest par = 0;
    Identifier proposer = 0;
    std::vector<TxPtr> T;
    TxSeq Tr;
    TxSeq Tval;
};

struct PlayerInfo {
    PlayerId p = 0;
    std::vector<Identifier> ids;
    bool byzantine = false;
};

// Rebuilds blocks, transactions and per-player events from a trace alone.
class TraceIndex {
public:
    explicit TraceIndex(const TraceLog& log);

    const TraceLog& log() const { return log_; }
    const json& header() const { return log_.header(); }
    const std::vector<PlayerInfo>& players() const { return players_; }
    std::vector<PlayerId> honest() const;
    bool byzantinePlayer(PlayerId p) const;
    bool byzantineId(Identifier id) const { return byzIds_.count(id) > 0; }
    const std::set<Identifier>& byzantineIds() const { return byzIds_; }
    std::optional<PlayerId> ownerOf(Identifier id) const;

    const ProtocolParams& params() const { return params_; }
    const NetworkModel& net() const { return net_; }
    const ActivitySchedule& activity() const { return activity_; }
    Timeslot horizon() const { return horizon_; }
    StakeCache& stake() const { return *stake_; }

    const TraceBlock* block(Digest d) const;
    TxPtr tx(Digest d) const;
    const json* def(Digest d) const;
    bool isAncestor(Digest a, Digest b) const;
    bool incompatible(Digest a, Digest b) const { return !isAncestor(a, b) && !isAncestor(b, a); }

    // Records of kind k by honest players, in log order.
    std::vector<const TraceRecord*> honestEvents(const std::string& k) const;
    std::vector<const TraceRecord*> events(const std::string& k) const;

    // Transaction sequence a confirmation record refers to.
    TxSeq confirmedSeq(const TraceRecord& conf) const;

private:
    const TraceLog& log_;
    std::vector<PlayerInfo> players_;
    std::set<Identifier> byzIds_;
    ProtocolParams params_;
    NetworkModel net_;
    ActivitySchedule activity_;
    Timeslot horizon_ = 0;
    std::unique_ptr<StakeCache> stake_;
    std::unordered_map<Digest, json> defs_;
    std::unordered_map<Digest, TxPtr> txs_;
    std::unordered_map<Digest, TraceBlock> blocks_;
    std::unordered_map<Digest, TxSeq> genesisSeqs_;
    std::map<std::string, std::vector<const TraceRecord*>> byKind_;
};

struct ViolationReport {
    // Omniscient: first timeslot at which two honest confirmed sequences are incomparable.
    std::optional<Timeslot> omniscient;
    // First local sighting by an honest player.
    std::optional<Timeslot> sighted;
    std::optional<PlayerId> sightedBy;
    // Least epoch with incompatible confirmed blocks.
    std::optional<std::int64_t> epoch;
};

ViolationReport findViolations(const TraceIndex& ix);

struct CheckResult {
    bool ok = true;
    std::string detail;
};

// Every certificate of guilt seen by an honest player and every guilt
// transaction carried in recovery implicates only Byzantine identifiers.
CheckResult checkLemma1(const TraceIndex& ix);

struct Lemma2Report {
    CheckResult result;
    std::int64_t epoch = 0;
    Timeslot t = 0;
    Timeslot deadline = 0;
};

// Honest players hold an epoch-e certificate of guilt by t+2*deltaStar, where t
// is the first honest entry to epoch e+1 or the first recovery trigger.
Lemma2Report checkLemma2(const TraceIndex& ix);

struct RecoveryReport {
    CheckResult result;
    bool completed = false;
    std::int64_t epoch = 0;
    Digest bg = 0;
    Digest base = 0;
    Timeslot tf = 0;
    std::vector<Identifier> implicated;
    Rational implicatedShare = 0;
    Rational outputShare = 0;
    std::int64_t instance = 0;
};

// Unique b_g', implicated share >= 2q-1 of validating stake, output votes from
// more than half of the unimplicated stake, and every honest player done.
RecoveryReport checkLemma6(const TraceIndex& ix);

struct LivenessReport {
    struct Entry {
        Digest tx = 0;
        PlayerId p = 0;
        Timeslot injected = 0;
        std::optional<Timeslot> confirmed;
        Timeslot lag = 0;
    };
    std::vector<Entry> entries;
    std::int64_t kstar = 0;
    Timeslot bound = 0;
    Timeslot maxLag = 0;
    bool allConfirmed = true;
};

// Max consecutive views without an honest leader in any observed epoch, plus one.
std::int64_t leaderGap(const TraceIndex& ix);
LivenessReport measureLiveness(const TraceIndex& ix);
Timeslot livenessBound(Timeslot delta, std::int64_t kstar);

struct RhoBoundedReport {
    Rational maxByzantineShare = 0;
    std::int64_t worstEpoch = 0;
};

// Byzantine share of validating stake per epoch, over every base seen by honest players.
RhoBoundedReport rhoBounded(const TraceIndex& ix);

// Every delivery respects the regime; no inactive player sends or receives.
CheckResult checkDeliveries(const TraceIndex& ix);

} // namespace post
