#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "post/common.hpp"

namespace post {

enum class Regime : std::uint8_t { Synchronous, PartialSynchrony, StarBounded };

const char* regimeName(Regime r);
Regime parseRegime(const std::string& s);

struct NetworkModel {
    Regime regime = Regime::Synchronous;
    Timeslot delta = 1;
    Timeslot gst = 0;
    Timeslot deltaStar = 1;
    // Delta* bounding only from t0* on, where t0* is set during the run.
    bool relaxed = false;
    std::optional<Timeslot> t0star;

    // Latest admissible delivery for a message disseminated at `sent`.
    Timeslot latest(Timeslot sent) const;
    // Name of the violated bound, if any.
    std::optional<std::string> check(Timeslot sent, Timeslot at) const;
    void validate() const;
};

struct ActivitySchedule {
    // Players without an entry are always active. Windows are inclusive.
    std::map<PlayerId, std::vector<std::pair<Timeslot, Timeslot>>> windows;

    bool active(PlayerId p, Timeslot t) const;
    void setInactive(PlayerId p) { windows[p] = {}; }
};

} // namespace post
