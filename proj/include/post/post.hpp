#pragma once

#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "post/identity.hpp"

namespace post {

struct Vote : Message {
    Vote() : Message(MsgKind::Vote) {}
    json describe() const override;

    Digest block = 0;
    std::uint64_t c = 0;
    int s = 1;
    Identifier id = 0;
    std::int64_t vprev = 0;
    SignatureToken sig;
};

using VotePtr = std::shared_ptr<const Vote>;

Digest voteDigest(Digest block, std::uint64_t c, int s, Identifier id, std::int64_t vprev);
VotePtr makeVote(PlayerId p, Digest block, std::uint64_t c, int s, Identifier id, std::int64_t vprev,
                 SignatureRegistry& reg);

struct Block : Message {
    Block() : Message(MsgKind::Block) {}
    json describe() const override;
    void nested(std::vector<const Message*>& out) const override;
    Digest computeDigest() const;

    bool genesis = false;
    std::int64_t h = 0;
    std::int64_t v = 0;
    std::int64_t e = 0;
    Digest par = 0;
    std::vector<VotePtr> qcprev;
    std::vector<TxPtr> T;
    TxSeq Tr;
    TxSeq Tval;
    Identifier proposer = 0;
    SignatureToken sig;
};

using BlockPtr = std::shared_ptr<const Block>;

BlockPtr genesisBlock();

// A block with Tr and Tval derived honestly from the parent.
BlockPtr makeBlock(PlayerId p, Identifier proposer, std::int64_t v, std::int64_t e, const Block& parent,
                   std::vector<VotePtr> qcprev, std::vector<TxPtr> T, SignatureRegistry& reg);

struct QuorumCertificate {
    Digest block = 0;
    int s = 1;
    std::vector<VotePtr> votes;

    std::set<Identifier> ids() const;
    Digest digest() const;
};

struct CertificateOfGuilt {
    std::int64_t epoch = 0;
    // Stage-2 QC for b and stage-1 QC for the incompatible b'.
    QuorumCertificate q2;
    QuorumCertificate q1;
    BlockPtr b;
    BlockPtr bprime;
    std::vector<Identifier> implicated;
    Digest digest = 0;
};

using CogPtr = std::shared_ptr<const CertificateOfGuilt>;

TxPtr guiltTx(const CogPtr& g);

CogPtr makeCog(std::int64_t epoch, QuorumCertificate q2, QuorumCertificate q1, BlockPtr b, BlockPtr bprime);

struct ProtocolParams {
    std::int64_t x = 10;
    Timeslot delta = 1;
    Timeslot deltaStar = 1;
    Rational q = Rational(2, 3);
    bool twoStage = false;

    int stages() const { return twoStage ? 2 : 3; }
    bool epochEnding(std::int64_t h, std::int64_t e) const { return h == (e + 1) * x; }
};

// Everything a player has received that bears on Algorithm 1, with
// validity, QCs, confirmation and guilt detection maintained incrementally.
class MessageStore {
public:
    struct BlockInfo {
        BlockPtr b;
        std::size_t arrival = 0;
        bool valid = false;
        bool certified = false;
        bool confirmed = false;
        bool votesOpen = false;
        std::uint64_t N = 0;
        std::map<Identifier, VotePtr> votes[4];
        std::uint64_t sum[4] = {0, 0, 0, 0};
        bool qc[4] = {false, false, false, false};
    };

    MessageStore(const ProtocolParams& params, StakeCache& stake, const SignatureRegistry& reg);

    // Returns false for duplicates and unsupported kinds.
    bool add(const MsgPtr& m);
    // Brings validity, QCs, confirmation and guilt up to date.
    void refresh();

    const BlockInfo* info(Digest d) const;
    BlockPtr block(Digest d) const;
    bool valid(Digest d) const;
    bool confirmed(Digest d) const;
    bool hasQC(Digest d, int s) const;
    QuorumCertificate qc(Digest d, int s) const;
    std::int64_t viewOf(Digest d) const;

    bool isAncestor(Digest a, Digest b) const;
    bool incompatible(Digest a, Digest b) const { return !isAncestor(a, b) && !isAncestor(b, a); }

    // Blocks in the order they were enumerated into M.
    const std::vector<Digest>& arrival() const { return arrival_; }
    const std::vector<Digest>& confirmedBlocks() const { return confirmedList_; }
    const std::vector<CogPtr>& cogs() const { return cogs_; }
    std::vector<Digest> drainConfirmed();
    std::vector<CogPtr> drainCogs();

    std::uint64_t stakeUnder(const TxSeq& seq, Identifier id) const { return stake_.stake(seq, id); }
    const StakeMap& stakeMap(const TxSeq& seq) const { return stake_.get(seq); }
    bool meetsQuorum(std::uint64_t sum, std::uint64_t N) const;
    // True iff g is a certificate of guilt built from QCs whose votes are valid in M.
    bool verifyCog(const CertificateOfGuilt& g) const;
    const ProtocolParams& params() const { return params_; }

private:
    void addBlock(const BlockPtr& b);
    void addVote(const VotePtr& v);
    void openVotes(BlockInfo& bi);
    void recordVote(BlockInfo& bi, const VotePtr& v);
    bool checkValid(const BlockInfo& bi) const;
    void onQC(Digest d, int s);
    void certify(BlockInfo& bi);
    void pairGuilt(Digest d, int s);
    void addCog(const BlockInfo& b2, const BlockInfo& b1);

    ProtocolParams params_;
    StakeCache& stake_;
    const SignatureRegistry& reg_;
    std::unordered_map<Digest, BlockInfo> blocks_;
    std::vector<Digest> arrival_;
    std::vector<Digest> unsettled_;
    std::set<Digest> seen_;
    std::unordered_map<Digest, std::vector<VotePtr>> pendingVotes_;
    std::unordered_map<Digest, std::vector<Digest>> children_;
    std::map<std::int64_t, std::vector<Digest>> byEpoch_;
    std::vector<std::pair<Digest, int>> qcEvents_;
    std::vector<Digest> confirmedList_;
    std::vector<Digest> newConfirmed_;
    std::vector<CogPtr> cogs_;
    std::vector<CogPtr> newCogs_;
    std::set<std::pair<Digest, Digest>> cogPairs_;
};

} // namespace post
