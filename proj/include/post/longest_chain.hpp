#pragma once

#include <optional>

#include "post/kernel.hpp"
#include "post/post.hpp"

namespace post {

struct PowBlock : Message {
    PowBlock() : Message(MsgKind::ChainBlock) {}
    json describe() const override;
    void nested(std::vector<const Message*>& out) const override;

    Digest par = 0;
    std::int64_t h = 0;
    std::vector<TxPtr> T;
    TxSeq Tr;
    PlayerId miner = 0;
    PermitterResponse permit;
};

using PowBlockPtr = std::shared_ptr<const PowBlock>;

struct LongestChainParams {
    int difficulty = 2;
    int kappa = 3;
};

using QueryFn = std::function<PermitterResponse(const PermitterQuery&)>;

std::string powSigma(Digest parent, const TxSeq& T);

// Permitted longest-chain protocol: one query per timeslot on the current tip,
// longest chain wins with ties to the smaller digest, kappa-deep blocks are confirmed.
class LongestChainNode : public Process {
public:
    LongestChainNode(PlayerId self, LongestChainParams params, SignatureRegistry& reg);

    void step(NodeContext& ctx) override;
    std::vector<MsgPtr> advance(Timeslot t, const std::vector<Received>& inbox, const QueryFn& query,
                                TraceLog* trace);

    // Everything this node disseminated, with timeslots.
    const std::vector<std::pair<Timeslot, MsgPtr>>& sent() const { return sent_; }
    Digest tip() const { return tip_; }
    std::optional<Digest> confirmedTip() const { return conf_; }
    TxSeq confirmed() const;
    bool sawViolation() const { return sighted_; }

private:
    bool accept(const PowBlockPtr& b) const;
    void insert(const PowBlockPtr& b);
    void chooseTip();
    Digest ancestorAt(Digest d, std::int64_t h) const;
    bool isAncestor(Digest a, Digest b) const;
    std::int64_t height(Digest d) const;

    PlayerId self_;
    LongestChainParams params_;
    SignatureRegistry& reg_;
    std::map<Digest, PowBlockPtr> blocks_;
    std::map<Digest, std::vector<PowBlockPtr>> orphans_;
    std::vector<TxPtr> tstar_;
    std::set<Digest> tstarSet_;
    Digest tip_;
    std::optional<Digest> conf_;
    bool sighted_ = false;
    std::vector<std::pair<Timeslot, MsgPtr>> sent_;
};

} // namespace post
