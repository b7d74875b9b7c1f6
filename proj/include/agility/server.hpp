#pragma once

#include <memory>

#include "agility/net.hpp"
#include "agility/zone.hpp"

namespace agility {

/// Wire-level handler answering from `tree`: FORMERR for undecodable
/// requests that still carry a header, silence for shorter junk, and
/// truncation to the requester's UDP limit.
RequestHandler authority_handler(ZoneTree tree);

/// Serves `tree` over UDP and TCP. Throws NetError(BindFailure).
std::unique_ptr<DnsListener> serve(const Endpoint& endpoint, ZoneTree tree, const ListenerOptions& options = {});

}  // namespace agility
