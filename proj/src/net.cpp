#include "post/net.hpp"

#include <algorithm>
#include <limits>

namespace post {

const char* regimeName(Regime r)
{
    switch (r) {
    case Regime::Synchronous: return "synchronous";
    case Regime::PartialSynchrony: return "partialSynchrony";
    case Regime::StarBounded: return "starBounded";
    }
    return "?";
}

Regime parseRegime(const std::string& s)
{
    if (s == "synchronous")
        return Regime::Synchronous;
    if (s == "partialSynchrony")
        return Regime::PartialSynchrony;
    if (s == "starBounded")
        return Regime::StarBounded;
    throw ScenarioError("unknown network regime " + s);
}

Timeslot NetworkModel::latest(Timeslot sent) const
{
    if (regime == Regime::Synchronous)
        return sent + delta;
    Timeslot bound = std::max(gst, sent) + delta;
    if (regime == Regime::StarBounded) {
        if (!relaxed)
            bound = std::min(bound, sent + deltaStar);
        else if (t0star)
            bound = std::min(bound, std::max(sent, *t0star) + deltaStar);
    }
    return bound;
}

std::optional<std::string> NetworkModel::check(Timeslot sent, Timeslot at) const
{
    if (at < sent + 1)
        return "delivery before t+1";
    if (regime == Regime::Synchronous) {
        if (at > sent + delta)
            return "synchronous bound t+delta=" + std::to_string(sent + delta);
        return std::nullopt;
    }
    if (at > std::max(gst, sent) + delta)
        return "partial synchrony bound max(GST,t)+delta=" + std::to_string(std::max(gst, sent) + delta);
    if (regime == Regime::StarBounded) {
        if (!relaxed && at > sent + deltaStar)
            return "delta* bound t+delta*=" + std::to_string(sent + deltaStar);
        if (relaxed && t0star && at > std::max(sent, *t0star) + deltaStar)
            return "relaxed delta* bound max(t,t0*)+delta*=" + std::to_string(std::max(sent, *t0star) + deltaStar);
    }
    return std::nullopt;
}

void NetworkModel::validate() const
{
    if (delta < 1)
        throw ScenarioError("delta must be positive");
    if (gst < 0)
        throw ScenarioError("GST must be nonnegative");
    if (regime == Regime::StarBounded && deltaStar < delta)
        throw ScenarioError("delta* must be at least delta");
}

bool ActivitySchedule::active(PlayerId p, Timeslot t) const
{
    auto it = windows.find(p);
    if (it == windows.end())
        return true;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const auto& w) { return w.first <= t && t <= w.second; });
}

} // namespace post
