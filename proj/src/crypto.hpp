#pragma once

// OpenSSL-backed primitives for the signable algorithm set. Internal to the library.

#include <openssl/evp.h>

#include <cstdint>
#include <memory>
#include <span>

#include "agility/dnssec.hpp"

namespace agility::crypto {

using PkeyPtr = std::shared_ptr<EVP_PKEY>;

struct GeneratedKey {
    PkeyPtr pkey;
    Bytes private_material;
};

GeneratedKey generate(std::uint8_t algorithm, const RandomBytes& random, unsigned rsa_bits);
PkeyPtr load_private(std::uint8_t algorithm, std::span<const std::uint8_t> material);

/// DNSKEY public key field for the given private key.
Bytes public_key_field(std::uint8_t algorithm, EVP_PKEY* pkey);

Bytes sign(std::uint8_t algorithm, EVP_PKEY* pkey, std::span<const std::uint8_t> data);
bool verify(std::uint8_t algorithm, std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> data,
            std::span<const std::uint8_t> signature);

}  // namespace agility::crypto
