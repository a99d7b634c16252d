#pragma once

#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "post/message.hpp"

namespace post {

struct SignatureToken {
    Identifier signer = 0;
    Digest payload = 0;

    bool operator==(const SignatureToken&) const = default;
};

// Tokens are unforgeable by construction: only the registered owner of an
// identifier can mint one for it.
class SignatureRegistry {
public:
    void assign(PlayerId p, Identifier id);
    std::optional<PlayerId> owner(Identifier id) const;

    SignatureToken sign(PlayerId p, Identifier id, Digest payload);
    SignatureToken signAsOracle(Digest payload);
    SignatureToken signAsEnvironment(Digest payload);
    bool verify(const SignatureToken& tok) const;
    std::size_t minted() const { return minted_.size(); }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<Identifier, Digest>& k) const
        {
            return std::hash<Digest>{}(k.second ^ (static_cast<Digest>(k.first) * 0x9E3779B97F4A7C15ULL));
        }
    };
    std::unordered_map<Identifier, PlayerId> owners_;
    std::unordered_set<std::pair<Identifier, Digest>, KeyHash> minted_;
};

enum class TxKind : std::uint8_t { Payment, AddEscrow, RemoveEscrow, EpochMarker, Guilt };

const char* txKindName(TxKind k);

struct CertificateOfGuilt;

struct Transaction : Message {
    Transaction() : Message(MsgKind::Transaction) {}
    json describe() const override;

    TxKind type = TxKind::Payment;
    Identifier target = 0;
    std::int64_t epoch = 0;
    std::uint64_t nonce = 0;
    std::vector<Identifier> implicated;
    std::shared_ptr<const CertificateOfGuilt> guilt;
    SignatureToken sig;

    bool implicates(Identifier id) const;
};

using TxPtr = std::shared_ptr<const Transaction>;

TxPtr makePayment(std::uint64_t nonce, SignatureRegistry& reg);
TxPtr makeAddEscrow(Identifier id, SignatureRegistry& reg, std::uint64_t nonce = 0);
TxPtr makeRemoveEscrow(Identifier id, SignatureRegistry& reg, std::uint64_t nonce = 0);
TxPtr makeEpochMarker(std::int64_t epoch);
TxPtr makeGuiltTx(std::shared_ptr<const CertificateOfGuilt> g, std::int64_t epoch,
                  std::vector<Identifier> implicated, Digest certDigest);
// Rebuilds a transaction from its trace description (no signature check).
TxPtr txFromJson(const json& j, Digest digest);

class TxSeq {
public:
    TxSeq();

    static TxSeq extend(const TxSeq& base, const std::vector<TxPtr>& more);
    static TxSeq of(const std::vector<TxPtr>& items) { return extend(TxSeq(), items); }

    const std::vector<TxPtr>& items() const { return *items_; }
    Digest digest() const { return digest_; }
    std::size_t size() const { return items_->size(); }
    bool empty() const { return items_->empty(); }
    bool isPrefixOf(const TxSeq& other) const;
    bool contains(Digest tx) const;

private:
    std::shared_ptr<const std::vector<TxPtr>> items_;
    Digest digest_;
};

bool prefixComparable(const std::vector<Digest>& a, const std::vector<Digest>& b);

struct StakeParams {
    std::uint64_t N = 0;
    std::uint64_t xstar = 1;

    std::uint64_t quantum() const { return N / xstar; }
};

using InitialDistribution = std::map<Identifier, std::uint64_t>;
using StakeMap = std::map<Identifier, std::uint64_t>;

std::uint64_t evalStake(const InitialDistribution& sstar, const StakeParams& params,
                        const std::vector<TxPtr>& T, Identifier id);
// All identifiers with positive stake under T.
StakeMap stakeMap(const InitialDistribution& sstar, const StakeParams& params, const std::vector<TxPtr>& T);

class StakeCache {
public:
    StakeCache(InitialDistribution sstar, StakeParams params)
        : sstar_(std::move(sstar)), params_(params) {}

    const StakeMap& get(const TxSeq& seq);
    std::uint64_t stake(const TxSeq& seq, Identifier id);
    std::uint64_t total(const TxSeq& seq);
    const InitialDistribution& initial() const { return sstar_; }
    const StakeParams& params() const { return params_; }

private:
    InitialDistribution sstar_;
    StakeParams params_;
    std::unordered_map<Digest, StakeMap> cache_;
};

std::vector<TxPtr> zeroOutSet(const InitialDistribution& sstar, const std::set<Identifier>& ids,
                              SignatureRegistry& reg);

} // namespace post
