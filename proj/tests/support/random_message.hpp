#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "agility/message.hpp"

namespace testing_support {

using Rng = std::mt19937_64;

/// Names drawn from a small label pool with random case, so compression and
/// case preservation both get exercised.
agility::DnsName random_name(Rng& rng, std::size_t max_labels = 4);

agility::ResourceRecord random_record(Rng& rng, std::uint16_t type);
agility::ResourceRecord random_record(Rng& rng);

/// A message with random header bits, 0..2 questions, records of every
/// supported rdata type in all sections, and optional EDNS.
agility::DnsMessage random_message(Rng& rng);

/// RRset of `count` A records (distinct addresses) at one owner.
std::vector<agility::ResourceRecord> random_a_rrset(Rng& rng, std::size_t count);

}  // namespace testing_support
