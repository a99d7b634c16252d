#include "post/trace.hpp"

#include <fstream>
#include <sstream>

namespace post {

json TraceRecord::toJson() const
{
    json j = extra.is_object() ? extra : json::object();
    j["k"] = k;
    j["t"] = t;
    if (p >= 0)
        j["p"] = p;
    j["d"] = hex(d);
    if (from >= 0)
        j["from"] = from;
    if (sent >= 0)
        j["sent"] = sent;
    return j;
}

TraceRecord TraceRecord::fromJson(const json& j)
{
    TraceRecord r;
    r.k = j.at("k").get<std::string>();
    r.t = j.at("t").get<Timeslot>();
    r.p = j.value("p", std::int64_t{-1});
    r.d = parseHex(j.at("d").get<std::string>());
    r.from = j.value("from", std::int64_t{-1});
    r.sent = j.value("sent", std::int64_t{-1});
    json rest = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "k" && it.key() != "t" && it.key() != "p" && it.key() != "d" && it.key() != "from" &&
            it.key() != "sent")
            rest[it.key()] = it.value();
    if (!rest.empty())
        r.extra = std::move(rest);
    return r;
}

void TraceLog::define(const Message& m)
{
    if (defined_.count(m.digest))
        return;
    std::vector<const Message*> inner;
    m.nested(inner);
    for (const auto* c : inner)
        define(*c);
    defined_.insert(m.digest);
    TraceRecord r;
    r.k = "def";
    r.d = m.digest;
    r.extra = json{{"m", m.describe()}};
    records_.push_back(std::move(r));
}

void TraceLog::add(std::string k, Timeslot t, std::int64_t p, Digest d, json extra)
{
    TraceRecord r;
    r.k = std::move(k);
    r.t = t;
    r.p = p;
    r.d = d;
    r.extra = std::move(extra);
    records_.push_back(std::move(r));
}

void TraceLog::addRecv(Timeslot t, PlayerId p, Digest d, std::int64_t from, Timeslot sent)
{
    TraceRecord r;
    r.k = "recv";
    r.t = t;
    r.p = p;
    r.d = d;
    r.from = from;
    r.sent = sent;
    records_.push_back(std::move(r));
}

void TraceLog::write(std::ostream& os) const
{
    os << json{{"k", "header"}, {"h", header_}}.dump() << '\n';
    for (const auto& r : records_)
        os << r.toJson().dump() << '\n';
}

std::string TraceLog::serialize() const
{
    std::ostringstream os;
    write(os);
    return os.str();
}

TraceLog TraceLog::read(std::istream& is)
{
    TraceLog log;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto j = json::parse(line);
        if (first) {
            first = false;
            if (j.value("k", "") == "header") {
                log.header_ = j.at("h");
                continue;
            }
        }
        auto r = TraceRecord::fromJson(j);
        if (r.k == "def")
            log.defined_.insert(r.d);
        log.records_.push_back(std::move(r));
    }
    return log;
}

TraceLog TraceLog::readFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open trace " + path);
    return read(in);
}

void TraceLog::writeFile(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw ScenarioError("cannot write trace " + path);
    write(out);
}

} // namespace post
