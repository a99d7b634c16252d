#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "post/identity.hpp"
#include "post/net.hpp"
#include "post/permitter.hpp"
#include "post/trace.hpp"

namespace post {

constexpr PlayerId kEnvironmentPlayer = 0xFFFFFFFFu;

struct Envelope {
    std::uint64_t uid = 0;
    PlayerId sender = 0;
    Timeslot sent = 0;
    std::uint64_t seq = 0;
    MsgPtr msg;
};

using EnvPtr = std::shared_ptr<const Envelope>;

struct Received {
    EnvPtr env;
    bool injected = false;
};

class Kernel;

class NodeContext {
public:
    NodeContext(Kernel& k, PlayerId self, Timeslot t, const std::vector<Received>& inbox)
        : k_(k), self_(self), t_(t), inbox_(inbox) {}

    Timeslot t() const { return t_; }
    PlayerId self() const { return self_; }
    const std::vector<Received>& inbox() const { return inbox_; }

    std::uint64_t disseminate(MsgPtr m);
    PermitterResponse query(const PermitterQuery& q);
    SignatureRegistry& reg();
    TraceLog& trace();

private:
    Kernel& k_;
    PlayerId self_;
    Timeslot t_;
    const std::vector<Received>& inbox_;
};

class Process {
public:
    virtual ~Process() = default;
    virtual void step(NodeContext& ctx) = 0;
};

class AdversaryContext {
public:
    AdversaryContext(Kernel& k, Timeslot t, const std::map<PlayerId, std::vector<Received>>& inboxes)
        : k_(k), t_(t), inboxes_(inboxes) {}

    Timeslot t() const { return t_; }
    // This timeslot's deliveries to every active Byzantine player.
    const std::map<PlayerId, std::vector<Received>>& inboxes() const { return inboxes_; }

    // Per-recipient delivery overrides; other recipients get the default delay.
    std::uint64_t disseminate(PlayerId as, MsgPtr m, const std::map<PlayerId, Timeslot>& at = {});
    PermitterResponse query(PlayerId as, const PermitterQuery& q);
    bool active(PlayerId p) const;
    SignatureRegistry& reg();
    TraceLog& trace();
    const NetworkModel& net() const;

private:
    Kernel& k_;
    Timeslot t_;
    const std::map<PlayerId, std::vector<Received>>& inboxes_;
};

class Adversary {
public:
    virtual ~Adversary() = default;
    virtual void step(AdversaryContext&) {}
    // Delivery time for any non-self delivery; must respect the regime.
    virtual Timeslot deliveryTime(const Envelope&, PlayerId, Timeslot dflt) { return dflt; }
};

struct KernelConfig {
    std::vector<PlayerId> players;
    std::set<PlayerId> byzantine;
    NetworkModel net;
    ActivitySchedule activity;
    Timeslot horizon = 100;
};

class Kernel {
public:
    Kernel(KernelConfig cfg, SignatureRegistry& reg, TraceLog& trace, Permitter* permitter = nullptr);

    void setProcess(PlayerId p, std::unique_ptr<Process> proc);
    void setAdversary(std::shared_ptr<Adversary> adv) { adversary_ = std::move(adv); }
    void inject(PlayerId p, Timeslot t, MsgPtr m);
    void onSlotEnd(std::function<void(Kernel&, Timeslot)> fn) { slotEnd_.push_back(std::move(fn)); }

    void run();
    // Runs one timeslot; false once the horizon is passed.
    bool step();

    Timeslot now() const { return t_; }
    const KernelConfig& config() const { return cfg_; }
    bool isByzantine(PlayerId p) const { return cfg_.byzantine.count(p) > 0; }
    bool active(PlayerId p, Timeslot t) const { return cfg_.activity.active(p, t); }
    Process* process(PlayerId p);
    std::unique_ptr<Process> releaseProcess(PlayerId p);
    const NetworkModel& network() const { return cfg_.net; }
    // Fixes t0* for the relaxed regime and clamps pending deliveries.
    void setT0Star(Timeslot t0);

    // Validates `at` against the regime; throws ScenarioError naming the bound.
    void scheduleDelivery(const EnvPtr& env, PlayerId recipient, Timeslot at);

    SignatureRegistry& reg() { return reg_; }
    TraceLog& trace() { return trace_; }
    std::uint64_t disseminate(PlayerId sender, MsgPtr m, const std::map<PlayerId, Timeslot>* at);
    PermitterResponse query(PlayerId p, const PermitterQuery& q);

private:
    std::vector<Received> collect(PlayerId p);

    KernelConfig cfg_;
    SignatureRegistry& reg_;
    TraceLog& trace_;
    Permitter* permitter_;
    std::shared_ptr<Adversary> adversary_;
    std::map<PlayerId, std::unique_ptr<Process>> procs_;
    std::map<PlayerId, std::multimap<Timeslot, EnvPtr>> pending_;
    std::map<std::pair<PlayerId, Timeslot>, std::vector<MsgPtr>> injections_;
    std::map<PlayerId, std::uint64_t> seq_;
    std::vector<std::function<void(Kernel&, Timeslot)>> slotEnd_;
    std::uint64_t uid_ = 0;
    Timeslot t_ = 0;
};

} // namespace post
