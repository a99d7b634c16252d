#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace post {

using Timeslot = std::int64_t;
using PlayerId = std::uint32_t;
using Identifier = std::uint32_t;
using Digest = std::uint64_t;
using Rational = boost::multiprecision::cpp_rational;

constexpr Identifier kOracleSigner = 0xFFFFFFFFu;
constexpr Identifier kEnvironmentSigner = 0xFFFFFFFEu;

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// SHA-256 over a canonical byte encoding, truncated to 64 bits.
class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    Hasher& add(std::uint64_t v);
    Hasher& add(std::int64_t v) { return add(static_cast<std::uint64_t>(v)); }
    Hasher& add(std::uint32_t v) { return add(static_cast<std::uint64_t>(v)); }
    Hasher& add(int v) { return add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    Hasher& add(std::string_view s);
    Digest finish();

private:
    void* ctx_;
};

std::string hex(Digest d);
Digest parseHex(std::string_view s);

Rational parseRational(const std::string& s);
std::string toString(const Rational& r);
double toDouble(const Rational& r);

} // namespace post
