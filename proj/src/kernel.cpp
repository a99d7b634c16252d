#include "post/kernel.hpp"

#include <algorithm>

namespace post {

std::uint64_t NodeContext::disseminate(MsgPtr m)
{
    return k_.disseminate(self_, std::move(m), nullptr);
}

PermitterResponse NodeContext::query(const PermitterQuery& q)
{
    return k_.query(self_, q);
}

SignatureRegistry& NodeContext::reg()
{
    return k_.reg();
}

TraceLog& NodeContext::trace()
{
    return k_.trace();
}

std::uint64_t AdversaryContext::disseminate(PlayerId as, MsgPtr m, const std::map<PlayerId, Timeslot>& at)
{
    if (!k_.isByzantine(as))
        throw ScenarioError("adversary cannot disseminate as honest player " + std::to_string(as));
    return k_.disseminate(as, std::move(m), &at);
}

PermitterResponse AdversaryContext::query(PlayerId as, const PermitterQuery& q)
{
    if (!k_.isByzantine(as))
        throw ScenarioError("adversary cannot query as honest player " + std::to_string(as));
    return k_.query(as, q);
}

bool AdversaryContext::active(PlayerId p) const
{
    return k_.active(p, t_);
}

SignatureRegistry& AdversaryContext::reg()
{
    return k_.reg();
}

TraceLog& AdversaryContext::trace()
{
    return k_.trace();
}

const NetworkModel& AdversaryContext::net() const
{
    return k_.network();
}

Kernel::Kernel(KernelConfig cfg, SignatureRegistry& reg, TraceLog& trace, Permitter* permitter)
    : cfg_(std::move(cfg)), reg_(reg), trace_(trace), permitter_(permitter)
{
    cfg_.net.validate();
    std::sort(cfg_.players.begin(), cfg_.players.end());
}

void Kernel::setProcess(PlayerId p, std::unique_ptr<Process> proc)
{
    procs_[p] = std::move(proc);
}

Process* Kernel::process(PlayerId p)
{
    auto it = procs_.find(p);
    return it == procs_.end() ? nullptr : it->second.get();
}

std::unique_ptr<Process> Kernel::releaseProcess(PlayerId p)
{
    auto it = procs_.find(p);
    if (it == procs_.end())
        return nullptr;
    auto out = std::move(it->second);
    procs_.erase(it);
    return out;
}

void Kernel::inject(PlayerId p, Timeslot t, MsgPtr m)
{
    if (!active(p, t))
        throw ScenarioError("environment injection to inactive player " + std::to_string(p) + " at t=" +
                            std::to_string(t));
    injections_[{p, t}].push_back(std::move(m));
}

void Kernel::setT0Star(Timeslot t0)
{
    if (cfg_.net.t0star)
        return;
    cfg_.net.t0star = t0;
    if (!cfg_.net.relaxed || cfg_.net.regime != Regime::StarBounded)
        return;
    for (auto& [p, q] : pending_) {
        std::multimap<Timeslot, EnvPtr> next;
        for (auto& [at, env] : q)
            next.emplace(std::min(at, cfg_.net.latest(env->sent)), env);
        q = std::move(next);
    }
}

void Kernel::scheduleDelivery(const EnvPtr& env, PlayerId recipient, Timeslot at)
{
    if (auto bad = cfg_.net.check(env->sent, at))
        throw ScenarioError("delivery of " + hex(env->msg->digest) + " from " + std::to_string(env->sender) +
                            " to " + std::to_string(recipient) + " at t=" + std::to_string(at) + " rejected: " + *bad);
    pending_[recipient].emplace(at, env);
}

std::uint64_t Kernel::disseminate(PlayerId sender, MsgPtr m, const std::map<PlayerId, Timeslot>* at)
{
    if (!active(sender, t_))
        throw ScenarioError("inactive player " + std::to_string(sender) + " cannot disseminate at t=" +
                            std::to_string(t_));
    auto env = std::make_shared<Envelope>();
    env->uid = ++uid_;
    env->sender = sender;
    env->sent = t_;
    env->seq = seq_[sender]++;
    env->msg = std::move(m);
    trace_.define(*env->msg);
    trace_.add("send", t_, sender, env->msg->digest, json{{"uid", env->uid}});
    for (auto q : cfg_.players) {
        Timeslot when;
        if (q == sender) {
            when = t_ + 1;
        } else {
            when = t_ + cfg_.net.delta;
            if (adversary_)
                when = adversary_->deliveryTime(*env, q, when);
            if (at) {
                auto it = at->find(q);
                if (it != at->end())
                    when = it->second;
            }
        }
        scheduleDelivery(env, q, when);
    }
    return env->uid;
}

PermitterResponse Kernel::query(PlayerId p, const PermitterQuery& q)
{
    if (!permitter_)
        throw ScenarioError("no permitter configured");
    auto r = permitter_->submitQuery(p, t_, q);
    trace_.add("oracle", t_, p, r.digest, json{{"b", q.b}});
    return r;
}

std::vector<Received> Kernel::collect(PlayerId p)
{
    std::vector<Received> out;
    auto& q = pending_[p];
    auto end = q.upper_bound(t_);
    std::vector<EnvPtr> due;
    for (auto it = q.begin(); it != end; ++it)
        due.push_back(it->second);
    q.erase(q.begin(), end);
    std::sort(due.begin(), due.end(), [](const EnvPtr& a, const EnvPtr& b) {
        return std::tie(a->sent, a->sender, a->seq) < std::tie(b->sent, b->sender, b->seq);
    });
    for (auto& env : due) {
        trace_.addRecv(t_, p, env->msg->digest, env->sender, env->sent);
        out.push_back({env, false});
    }
    auto inj = injections_.find({p, t_});
    if (inj != injections_.end()) {
        for (auto& m : inj->second) {
            auto env = std::make_shared<Envelope>();
            env->uid = ++uid_;
            env->sender = kEnvironmentPlayer;
            env->sent = t_;
            env->msg = m;
            trace_.define(*m);
            trace_.add("inject", t_, p, m->digest);
            out.push_back({env, true});
        }
        injections_.erase(inj);
    }
    return out;
}

bool Kernel::step()
{
    if (t_ >= cfg_.horizon)
        return false;
    ++t_;
    std::map<PlayerId, std::vector<Received>> byzInbox;
    for (auto p : cfg_.players) {
        if (!active(p, t_))
            continue;
        auto inbox = collect(p);
        if (isByzantine(p)) {
            byzInbox[p] = std::move(inbox);
            continue;
        }
        if (auto* proc = process(p)) {
            NodeContext ctx(*this, p, t_, inbox);
            proc->step(ctx);
        }
    }
    if (adversary_) {
        AdversaryContext ctx(*this, t_, byzInbox);
        adversary_->step(ctx);
    }
    for (auto& fn : slotEnd_)
        fn(*this, t_);
    return true;
}

void Kernel::run()
{
    while (step()) {
    }
}

} // namespace post
