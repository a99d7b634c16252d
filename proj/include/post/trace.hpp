#pragma once

#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "post/message.hpp"

namespace post {

struct TraceRecord {
    std::string k;
    Timeslot t = 0;
    std::int64_t p = -1;
    Digest d = 0;
    std::int64_t from = -1;
    std::int64_t sent = -1;
    json extra;

    json toJson() const;
    static TraceRecord fromJson(const json& j);
};

// Append-only event log. Message bodies are written once per digest as
// "def" records; every other record refers to them by digest.
class TraceLog {
public:
    void setHeader(json h) { header_ = std::move(h); }
    const json& header() const { return header_; }

    void define(const Message& m);
    bool defined(Digest d) const { return defined_.count(d) > 0; }
    void add(std::string k, Timeslot t, std::int64_t p, Digest d, json extra = json());
    void addRecv(Timeslot t, PlayerId p, Digest d, std::int64_t from, Timeslot sent);

    const std::vector<TraceRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    void write(std::ostream& os) const;
    std::string serialize() const;
    static TraceLog read(std::istream& is);
    static TraceLog readFile(const std::string& path);
    void writeFile(const std::string& path) const;

private:
    json header_;
    std::vector<TraceRecord> records_;
    std::unordered_set<Digest> defined_;
};

} // namespace post
