#pragma once

#include "post/analysis.hpp"

namespace post {

enum class EaacClass : std::uint8_t { NoViolation, Cheap, ExpensiveDueToCollapse, ExpensiveAbsentCollapse };

const char* eaacClassName(EaacClass c);

// One staked resource: market price C and per-unit flow cost c.
struct PriceVector {
    Rational C = 1;
    Rational c = 1;
};

class Investment {
public:
    explicit Investment(const TraceIndex& ix) : ix_(ix) {}
    virtual ~Investment() = default;

    virtual Rational of(Identifier id, Timeslot t) const = 0;
    Rational ofPlayer(PlayerId p, Timeslot t) const;
    // Recovery completion, if any.
    virtual std::optional<Timeslot> tf() const { return std::nullopt; }
    // Identifiers whose stake the valuation discounts from tf on.
    virtual const std::set<Identifier>& slashed() const { return none_; }
    // First timeslot from which all given identifiers stay at zero investment.
    std::optional<Timeslot> exitTime(const std::vector<Identifier>& ids) const;

protected:
    const TraceIndex& ix_;

private:
    std::set<Identifier> none_;
};

// Canonical PoS investment: R(id,t) = N/x* while validating per b1(t), still
// escrowed per b2(t) (before any recovery trigger), or implicated by a guilt
// transaction in b1(t); b1 becomes b_g' once recovery completes.
class CanonicalInvestment : public Investment {
public:
    // Confirmation records of `viewers` decide e(t); all honest players when empty.
    explicit CanonicalInvestment(const TraceIndex& ix, std::vector<PlayerId> viewers = {});

    Rational of(Identifier id, Timeslot t) const override;
    std::optional<Timeslot> triggered() const { return triggered_; }
    std::optional<Timeslot> tf() const override { return tf_; }
    const std::set<Identifier>& slashed() const override { return slashed_; }

private:
    struct Snapshot {
        Timeslot from = 0;
        TxSeq b1;
        TxSeq b2;
    };
    const Snapshot& at(Timeslot t) const;
    const std::set<Identifier>& implicatedIn(const TxSeq& seq) const;

    std::vector<Snapshot> snaps_;
    std::optional<Timeslot> triggered_;
    std::optional<Timeslot> tf_;
    std::set<Identifier> slashed_;
    Rational unit_;
    mutable std::map<Digest, std::set<Identifier>> implicatedCache_;
};

// Stake cashed out off-chain: R(id,t) = N/x* until some viewer's confirmed
// transactions have shown id with zero stake for gamma consecutive timeslots.
class LiquidInvestment : public Investment {
public:
    LiquidInvestment(const TraceIndex& ix, Timeslot gamma, std::vector<PlayerId> viewers = {});

    Rational of(Identifier id, Timeslot t) const override;
    std::optional<Timeslot> cashedOut(Identifier id) const;

private:
    Rational unit_;
    std::map<Identifier, Timeslot> out_;
};

struct EaacVerdict {
    EaacClass classification = EaacClass::NoViolation;
    std::optional<Timeslot> tStar;
    std::optional<Timeslot> tF;
    // Minimum of the honest ratio over all timeslots, and where it occurs.
    Rational alphaHMin = 1;
    Timeslot alphaHWorst = 0;
    std::vector<Rational> alphaH;
    Rational alphaB = 1;
    Timeslot alphaBAt = 0;
    Rational rhoStar = 0;
    Rational alphaBound = 0;
    Rational flowCost = 0;
};

// Valuation of a player set: sum of R*C before t*, undefined (nullopt) until
// t_f, then the same sum over identifiers not slashed in b_g'.
std::optional<Rational> canonicalValuation(const Investment& inv, const TraceIndex& ix,
                                           const std::vector<PlayerId>& players, Timeslot t, const PriceVector& prices,
                                           std::optional<Timeslot> tStar);

// Ratio of valuation to investment; 1 when the investment is zero or the valuation undefined.
Rational alphaRatio(const std::optional<Rational>& value, const Rational& invested);

// max{0, (rho* - (2q-1)) / rho*}
Rational alphaBoundFor(const Rational& rhoStar, const Rational& q);

// Uses the canonical PoS investment unless another is given.
EaacVerdict computeVerdict(const TraceIndex& ix, const PriceVector& prices = {}, const Investment* inv = nullptr);

// Sum over Byzantine players and t <= until of c * R(p,t).
Rational flowCost(const Investment& inv, const TraceIndex& ix, const std::vector<PlayerId>& players,
                  Timeslot until, const PriceVector& prices);

struct LiquidityCounterexample {
    PlayerId p = 0;
    PlayerId viewer = 0;
    Timeslot t = 0;
    Rational residual = 0;
};

// Checks R(p, t+gamma) = 0 whenever, for t >= GST with no honest sighting by
// t+gamma, some honest viewer's confirmed transactions give p zero stake
// throughout [t, t+gamma].
std::optional<LiquidityCounterexample> checkGammaLiquidity(const TraceIndex& ix, Timeslot gamma);

} // namespace post
