#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "post/identity.hpp"

namespace post {

using Tau = std::array<std::uint8_t, 32>;

int leadingZeroBits(const Tau& tau);

struct PermitterQuery {
    std::uint64_t b = 0;
    std::string sigma;
};

struct PermitterResponse {
    std::string sigma;
    Tau tau{};
    SignatureToken sig;
    Digest digest = 0;
};

enum class UseMode : std::uint8_t { Single, Multi };

struct PermitterConfig {
    UseMode mode = UseMode::Single;
    bool deterministic = false;
    std::uint64_t rmax = 1;
};

// R^O(p, t); must be zero for inactive players.
using ResourceAllocation = std::function<std::uint64_t(PlayerId, Timeslot)>;

class QueryRejected : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

class Permitter {
public:
    Permitter(PermitterConfig cfg, ResourceAllocation alloc, std::uint64_t seed, SignatureRegistry& reg);

    PermitterResponse submitQuery(PlayerId p, Timeslot t, const PermitterQuery& q);

    const PermitterConfig& config() const { return cfg_; }
    std::uint64_t balance(PlayerId p, Timeslot t) const { return alloc_(p, t); }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }

private:
    Tau sample(PlayerId p, Timeslot t, std::uint64_t index, const PermitterQuery& q) const;

    PermitterConfig cfg_;
    ResourceAllocation alloc_;
    std::uint64_t seed_;
    SignatureRegistry& reg_;
    std::map<std::pair<PlayerId, Timeslot>, std::uint64_t> spent_;
    std::map<std::pair<PlayerId, Timeslot>, std::uint64_t> count_;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

// Checks R(t) in [1, rmax] and R_B(t)/R(t) <= rho for t in [1, horizon].
std::optional<Timeslot> checkExternalRhoBounded(const ResourceAllocation& alloc, const std::set<PlayerId>& players,
                                                const std::set<PlayerId>& byzantine, const Rational& rho,
                                                std::uint64_t rmax, Timeslot horizon);

} // namespace post
