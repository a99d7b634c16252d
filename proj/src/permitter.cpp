#include "post/permitter.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <random>

namespace post {

int leadingZeroBits(const Tau& tau)
{
    int n = 0;
    for (auto byte : tau) {
        if (byte == 0) {
            n += 8;
            continue;
        }
        for (int bit = 7; bit >= 0 && !(byte >> bit & 1); --bit)
            ++n;
        break;
    }
    return n;
}

Permitter::Permitter(PermitterConfig cfg, ResourceAllocation alloc, std::uint64_t seed, SignatureRegistry& reg)
    : cfg_(cfg), alloc_(std::move(alloc)), seed_(seed), reg_(reg)
{
}

Tau Permitter::sample(PlayerId p, Timeslot t, std::uint64_t index, const PermitterQuery& q) const
{
    Tau best{};
    if (cfg_.deterministic) {
        unsigned char key[8];
        for (int i = 0; i < 8; ++i)
            key[i] = static_cast<unsigned char>(seed_ >> (56 - 8 * i));
        std::string msg = std::to_string(t) + "|" + std::to_string(q.b) + "|" + q.sigma;
        unsigned int len = 0;
        HMAC(EVP_sha256(), key, sizeof key, reinterpret_cast<const unsigned char*>(msg.data()), msg.size(),
             best.data(), &len);
        return best;
    }
    Digest key = Hasher().add(seed_).add(p).add(t).add(index).finish();
    std::seed_seq seq{static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key)};
    std::mt19937_64 rng(seq);
    best.fill(0xFF);
    for (std::uint64_t i = 0; i < q.b; ++i) {
        Tau cur;
        for (int w = 0; w < 4; ++w) {
            auto r = rng();
            for (int k = 0; k < 8; ++k)
                cur[static_cast<std::size_t>(w * 8 + k)] = static_cast<std::uint8_t>(r >> (56 - 8 * k));
        }
        if (cur < best)
            best = cur;
    }
    return best;
}

PermitterResponse Permitter::submitQuery(PlayerId p, Timeslot t, const PermitterQuery& q)
{
    auto bal = alloc_(p, t);
    auto key = std::make_pair(p, t);
    auto reject = [&](const std::string& why) -> PermitterResponse {
        ++rejected_;
        throw QueryRejected("permitter query rejected for player " + std::to_string(p) + " at t=" +
                            std::to_string(t) + ": " + why);
    };
    if (q.b == 0)
        return reject("b=0");
    if (q.b > bal)
        return reject("b=" + std::to_string(q.b) + " exceeds balance " + std::to_string(bal));
    if (cfg_.mode == UseMode::Single && spent_[key] + q.b > bal)
        return reject("single-use budget " + std::to_string(bal) + " exhausted");
    spent_[key] += q.b;
    auto index = count_[key]++;
    PermitterResponse r;
    r.sigma = q.sigma;
    r.tau = sample(p, t, index, q);
    Hasher h;
    h.add(std::string_view("permit")).add(std::string_view(r.sigma));
    h.add(std::string_view(reinterpret_cast<const char*>(r.tau.data()), r.tau.size()));
    r.digest = h.finish();
    r.sig = reg_.signAsOracle(r.digest);
    ++accepted_;
    return r;
}

std::optional<Timeslot> checkExternalRhoBounded(const ResourceAllocation& alloc, const std::set<PlayerId>& players,
                                                const std::set<PlayerId>& byzantine, const Rational& rho,
                                                std::uint64_t rmax, Timeslot horizon)
{
    for (Timeslot t = 1; t <= horizon; ++t) {
        std::uint64_t total = 0, byz = 0;
        for (auto p : players) {
            auto b = alloc(p, t);
            total += b;
            if (byzantine.count(p))
                byz += b;
        }
        if (total < 1 || total > rmax)
            return t;
        if (Rational(byz, total) > rho)
            return t;
    }
    return std::nullopt;
}

} // namespace post
