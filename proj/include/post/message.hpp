#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "post/common.hpp"

namespace post {

using json = nlohmann::json;

enum class MsgKind : std::uint8_t {
    Transaction,
    Block,
    Vote,
    ChainProposal,
    OutputVote,
    ChainBlock,
};

const char* kindName(MsgKind k);

struct Message {
    explicit Message(MsgKind k) : kind(k) {}
    virtual ~Message() = default;

    // Field dump written once per digest into the trace.
    virtual json describe() const = 0;
    // Messages carried inside this one; defined in the trace before it.
    virtual void nested(std::vector<const Message*>&) const {}

    MsgKind kind;
    Digest digest = 0;
};

using MsgPtr = std::shared_ptr<const Message>;

} // namespace post
