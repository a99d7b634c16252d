#include "post/common.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>

namespace post {

Hasher::Hasher() : ctx_(EVP_MD_CTX_new())
{
    EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
}

Hasher::~Hasher()
{
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

Hasher& Hasher::add(std::uint64_t v)
{
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<unsigned char>(v >> (56 - 8 * i));
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), buf, sizeof buf);
    return *this;
}

Hasher& Hasher::add(std::string_view s)
{
    add(static_cast<std::uint64_t>(s.size()));
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), s.data(), s.size());
    return *this;
}

Digest Hasher::finish()
{
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out, &len);
    Digest d = 0;
    for (int i = 0; i < 8; ++i)
        d = (d << 8) | out[i];
    return d;
}

std::string hex(Digest d)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

Digest parseHex(std::string_view s)
{
    return std::stoull(std::string(s), nullptr, 16);
}

Rational parseRational(const std::string& s)
{
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        if (s.find('.') != std::string::npos || s.find('e') != std::string::npos)
            throw ScenarioError("rational field must not be a float: " + s);
        return Rational(boost::multiprecision::cpp_int(s));
    }
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0)
        throw ScenarioError("zero denominator: " + s);
    return Rational(num, den);
}

std::string toString(const Rational& r)
{
    auto n = boost::multiprecision::numerator(r);
    auto d = boost::multiprecision::denominator(r);
    if (d == 1)
        return n.str();
    return n.str() + "/" + d.str();
}

double toDouble(const Rational& r)
{
    return r.convert_to<double>();
}

} // namespace post
