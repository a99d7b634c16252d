#pragma once

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "post/post.hpp"

namespace post {

// Proposal (b_g', i): T(b_g') = Tr(base) * G * marker.
struct GenesisProposal {
    std::int64_t epoch = 0;
    std::int64_t instance = 0;
    Digest base = 0;
    TxSeq baseTr;
    CogPtr cog;
    TxPtr guilt;
    TxPtr marker;
    // Digest of T(b_g'), which identifies b_g'.
    Digest bg = 0;
    Digest digest = 0;

    TxSeq transactions() const { return TxSeq::extend(baseTr, {guilt, marker}); }
};

using ProposalPtr = std::shared_ptr<const GenesisProposal>;

ProposalPtr makeProposal(std::int64_t epoch, std::int64_t instance, const Block& base, CogPtr g);

struct ChainMessage : Message {
    ChainMessage() : Message(MsgKind::ChainProposal) {}
    json describe() const override;
    void nested(std::vector<const Message*>& out) const override;

    ProposalPtr y;
    std::vector<SignatureToken> sigs;

    std::vector<Identifier> signers() const;
};

using ChainPtr = std::shared_ptr<const ChainMessage>;

Digest chainPayload(Digest y, const std::vector<Identifier>& prefix);
ChainPtr startChain(ProposalPtr y, PlayerId p, Identifier id, SignatureRegistry& reg);
ChainPtr extendChain(const ChainMessage& m, PlayerId p, Identifier id, SignatureRegistry& reg);
// Distinct signers, each signature over the chain prefix it extends.
bool chainSignaturesValid(const ChainMessage& m, const SignatureRegistry& reg);

struct OutputVote : Message {
    OutputVote() : Message(MsgKind::OutputVote) {}
    json describe() const override;

    Digest bg = 0;
    std::int64_t instance = 0;
    std::uint64_t c = 0;
    Identifier id = 0;
    SignatureToken sig;
};

using OutputVotePtr = std::shared_ptr<const OutputVote>;

OutputVotePtr makeOutputVote(PlayerId p, Digest bg, std::int64_t instance, std::uint64_t c, Identifier id,
                             SignatureRegistry& reg);

struct RecoverySchedule {
    Timeslot init = 0;
    std::int64_t k = 0;
    Timeslot deltaStar = 1;

    Timeslot instanceStart(std::int64_t i) const { return init + (k + 1) * i * deltaStar; }
};

RecoverySchedule recoverySchedule(std::int64_t e, std::int64_t x, Timeslot delta, Timeslot deltaStar, std::int64_t k);

// Standalone round-based Dolev-Strong with n participants and f faults.
namespace ds {

struct Chain {
    int value = 0;
    std::vector<int> signers;

    bool operator<(const Chain& o) const { return std::tie(value, signers) < std::tie(o.value, o.signers); }
    bool operator==(const Chain& o) const = default;
};

struct Setup {
    int n = 4;
    int f = 1;
    int leader = 0;
    std::set<int> byzantine;
    // Input of an honest leader.
    int input = 0;
};

struct Outcome {
    std::map<int, std::set<int>> O;
    // Output per honest participant; nullopt is bottom.
    std::map<int, std::optional<int>> output;
};

// Byzantine sends for a round: recipient -> chains delivered at that round.
// Called with the round number and every chain the Byzantine players hold.
using ByzantineSends = std::function<std::map<int, std::vector<Chain>>(int round, const std::set<Chain>& known)>;

Outcome run(const Setup& s, const ByzantineSends& adversary);

} // namespace ds

} // namespace post
