#pragma once

#include <optional>

#include "post/kernel.hpp"
#include "post/recovery.hpp"

namespace post {

// Honest PosT player: Algorithm 1, then Algorithm 2 once recovery triggers.
class PostNode : public Process {
public:
    PostNode(PlayerId self, std::vector<Identifier> ids, ProtocolParams params, StakeCache& stake,
             SignatureRegistry& reg);

    void step(NodeContext& ctx) override;
    // One timeslot; returns the messages to disseminate. A null trace keeps the node silent in the log.
    std::vector<MsgPtr> advance(Timeslot t, const std::vector<Received>& inbox, TraceLog* trace);

    PlayerId self() const { return self_; }
    const std::vector<Identifier>& ids() const { return ids_; }
    const MessageStore& store() const { return store_; }
    std::int64_t epoch() const { return e_; }
    bool rec() const { return rec_; }
    bool ended() const { return end_; }
    bool recend() const { return recend_; }
    std::optional<Digest> finalGenesis() const { return bg_; }
    std::optional<Timeslot> epochBegan(std::int64_t e) const;
    Digest lockBlock() const { return lockBlock_; }
    std::int64_t lockView() const { return lockView_; }
    std::optional<Digest> tip() const { return tip_; }
    bool sawViolation() const { return sighted_; }
    bool holdsCog(std::int64_t e) const { return cogEpochs_.count(e) > 0; }

    // Identifier whose turn it is in view v, if defined.
    std::optional<Identifier> leader(std::int64_t v) const;
    // Unique confirmed epoch-(e-1)-ending block; genesis for e = 0.
    std::optional<Digest> epochBase(std::int64_t e) const;
    std::vector<Identifier> positiveIds(const TxSeq& seq) const;
    bool readyForRecovery(Timeslot t) const;
    bool admissible(const Block& b, std::int64_t v) const;

private:
    void ingest(Timeslot t, const std::vector<Received>& inbox);
    void afterRefresh(Timeslot t);
    void eupdate(Timeslot t);
    void setQset();
    void propose(std::int64_t v);
    void vote(std::int64_t v, int s);
    void recoveryStep(Timeslot t);
    bool chainValid(const ChainMessage& m, std::int64_t i) const;
    CogPtr bestCog() const;
    void emit(MsgPtr m) { out_.push_back(std::move(m)); }
    void log(const std::string& k, Timeslot t, Digest d, json extra = json());

    PlayerId self_;
    std::vector<Identifier> ids_;
    ProtocolParams params_;
    StakeCache& stake_;
    SignatureRegistry& reg_;
    MessageStore store_;
    TraceLog* trace_ = nullptr;
    std::vector<MsgPtr> out_;

    std::vector<TxPtr> tstar_;
    std::set<Digest> tstarSet_;

    std::int64_t e_ = 0;
    bool rec_ = false;
    bool end_ = false;
    std::map<std::int64_t, Timeslot> began_;
    std::int64_t maxEnding_ = -1;
    std::map<std::int64_t, std::vector<Digest>> endingByEpoch_;
    Digest lockBlock_ = 0;
    std::int64_t lockView_ = 0;
    std::optional<Digest> bstar_;
    TxSeq bstarT_;
    std::int64_t bstarVprev_ = 0;

    std::optional<Digest> tip_;
    bool sighted_ = false;
    std::set<std::int64_t> cogEpochs_;

    // Recovery.
    bool recInit_ = false;
    RecoverySchedule sched_;
    Digest recBase_ = 0;
    TxSeq recT_;
    std::vector<Identifier> recIds_;
    std::int64_t instance_ = -1;
    std::set<Digest> O_;
    std::map<Digest, ProposalPtr> Ovals_;
    std::vector<ChainPtr> chains_;
    std::set<Digest> chainSeen_;
    bool recend_ = false;
    std::optional<Digest> bg_;
};

} // namespace post
