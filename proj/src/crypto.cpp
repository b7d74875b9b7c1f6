#include "crypto.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/rand.h>
#include <openssl/x509.h>

#include <string>

#include "agility/errors.hpp"

namespace agility::crypto {

namespace {

using BnPtr = std::unique_ptr<BIGNUM, decltype([](BIGNUM* bn) { BN_clear_free(bn); })>;
using BnCtxPtr = std::unique_ptr<BN_CTX, decltype([](BN_CTX* c) { BN_CTX_free(c); })>;
using ParamBldPtr = std::unique_ptr<OSSL_PARAM_BLD, decltype([](OSSL_PARAM_BLD* b) { OSSL_PARAM_BLD_free(b); })>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, decltype([](OSSL_PARAM* p) { OSSL_PARAM_free(p); })>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype([](EVP_PKEY_CTX* c) { EVP_PKEY_CTX_free(c); })>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype([](EVP_MD_CTX* c) { EVP_MD_CTX_free(c); })>;
using EcGroupPtr = std::unique_ptr<EC_GROUP, decltype([](EC_GROUP* g) { EC_GROUP_free(g); })>;
using EcPointPtr = std::unique_ptr<EC_POINT, decltype([](EC_POINT* p) { EC_POINT_free(p); })>;
using EcSigPtr = std::unique_ptr<ECDSA_SIG, decltype([](ECDSA_SIG* s) { ECDSA_SIG_free(s); })>;

constexpr std::size_t kP256FieldBytes = 32;

[[noreturn]] void fail(const std::string& what) {
    const unsigned long err = ERR_get_error();
    std::string detail;
    if (err != 0) {
        char buf[256];
        ERR_error_string_n(err, buf, sizeof buf);
        detail = std::string(" (") + buf + ")";
    }
    ERR_clear_error();
    throw DnssecError(DnssecErrc::CryptoFailure, what + detail);
}

PkeyPtr wrap(EVP_PKEY* pkey) { return PkeyPtr(pkey, EVP_PKEY_free); }

BnPtr bn_from(std::span<const std::uint8_t> bytes) {
    BnPtr bn(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
    if (!bn) fail("BN_bin2bn");
    return bn;
}

Bytes bn_to_padded(const BIGNUM* bn, std::size_t width) {
    Bytes out(width);
    if (BN_bn2binpad(bn, out.data(), static_cast<int>(width)) < 0) fail("BN_bn2binpad");
    return out;
}

Bytes bn_to_bytes(const BIGNUM* bn) {
    Bytes out(static_cast<std::size_t>(BN_num_bytes(bn)));
    BN_bn2bin(bn, out.data());
    return out;
}

PkeyPtr from_params(const char* type, int selection, OSSL_PARAM* params) {
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, type, nullptr));
    if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1) fail(std::string("fromdata init for ") + type);
    EVP_PKEY* pkey = nullptr;
    if (EVP_PKEY_fromdata(ctx.get(), &pkey, selection, params) != 1) fail(std::string("fromdata for ") + type);
    return wrap(pkey);
}

// --- RSA ------------------------------------------------------------------

BnPtr seeded_prime(const RandomBytes& random, unsigned bits, const BIGNUM* e, BN_CTX* ctx) {
    if (bits < 64) fail("prime size too small");
    Bytes buf(bits / 8);
    BnPtr p_minus_1(BN_new());
    BnPtr gcd(BN_new());
    for (;;) {
        random(buf);
        buf[0] |= 0xC0;  // keeps the product at full length
        buf.back() |= 0x01;
        BnPtr candidate = bn_from(buf);
        for (int step = 0; step < 8192; ++step) {
            if (BN_check_prime(candidate.get(), ctx, nullptr) == 1) {
                BN_copy(p_minus_1.get(), candidate.get());
                BN_sub_word(p_minus_1.get(), 1);
                BN_gcd(gcd.get(), p_minus_1.get(), e, ctx);
                if (BN_is_one(gcd.get())) return candidate;
            }
            BN_add_word(candidate.get(), 2);
        }
    }
}

GeneratedKey generate_rsa(const RandomBytes& random, unsigned bits) {
    if (bits < 1024 || bits > 4096 || bits % 16 != 0) fail("RSA modulus size must be 1024..4096 and a multiple of 16");
    BnCtxPtr ctx(BN_CTX_new());
    BnPtr e(BN_new());
    BN_set_word(e.get(), 65537);
    BnPtr p = seeded_prime(random, bits / 2, e.get(), ctx.get());
    BnPtr q;
    do {
        q = seeded_prime(random, bits / 2, e.get(), ctx.get());
    } while (BN_cmp(p.get(), q.get()) == 0);
    if (BN_cmp(p.get(), q.get()) < 0) std::swap(p, q);

    BnPtr n(BN_new()), p1(BN_new()), q1(BN_new()), phi(BN_new()), d(BN_new());
    BnPtr dmp1(BN_new()), dmq1(BN_new()), iqmp(BN_new());
    BN_mul(n.get(), p.get(), q.get(), ctx.get());
    BN_sub(p1.get(), p.get(), BN_value_one());
    BN_sub(q1.get(), q.get(), BN_value_one());
    BN_mul(phi.get(), p1.get(), q1.get(), ctx.get());
    if (!BN_mod_inverse(d.get(), e.get(), phi.get(), ctx.get())) fail("RSA private exponent");
    BN_mod(dmp1.get(), d.get(), p1.get(), ctx.get());
    BN_mod(dmq1.get(), d.get(), q1.get(), ctx.get());
    if (!BN_mod_inverse(iqmp.get(), q.get(), p.get(), ctx.get())) fail("RSA CRT coefficient");

    ParamBldPtr bld(OSSL_PARAM_BLD_new());
    if (!bld || OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_D, d.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR1, p.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR2, q.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT1, dmp1.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT2, dmq1.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_COEFFICIENT1, iqmp.get()) != 1)
        fail("RSA parameter build");
    ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) fail("RSA parameter build");
    PkeyPtr pkey = from_params("RSA", EVP_PKEY_KEYPAIR, params.get());

    unsigned char* der = nullptr;
    const int len = i2d_PrivateKey(pkey.get(), &der);
    if (len <= 0) fail("RSA private key encoding");
    Bytes material(der, der + len);
    OPENSSL_free(der);
    return {std::move(pkey), std::move(material)};
}

PkeyPtr load_rsa_private(std::span<const std::uint8_t> der) {
    const unsigned char* p = der.data();
    EVP_PKEY* pkey = d2i_PrivateKey(EVP_PKEY_RSA, nullptr, &p, static_cast<long>(der.size()));
    if (!pkey) fail("RSA private key decoding");
    return wrap(pkey);
}

Bytes rsa_public_field(EVP_PKEY* pkey) {
    BIGNUM* n = nullptr;
    BIGNUM* e = nullptr;
    if (EVP_PKEY_get_bn_param(pkey, OSSL_PKEY_PARAM_RSA_N, &n) != 1 ||
        EVP_PKEY_get_bn_param(pkey, OSSL_PKEY_PARAM_RSA_E, &e) != 1) {
        BN_free(n);
        BN_free(e);
        fail("RSA public parameters");
    }
    BnPtr nn(n), ee(e);
    const Bytes exponent = bn_to_bytes(ee.get());
    const Bytes modulus = bn_to_bytes(nn.get());
    Bytes out;
    if (exponent.size() <= 255) {
        out.push_back(static_cast<std::uint8_t>(exponent.size()));
    } else {
        out.push_back(0);
        out.push_back(static_cast<std::uint8_t>(exponent.size() >> 8));
        out.push_back(static_cast<std::uint8_t>(exponent.size()));
    }
    out.insert(out.end(), exponent.begin(), exponent.end());
    out.insert(out.end(), modulus.begin(), modulus.end());
    return out;
}

PkeyPtr load_rsa_public(std::span<const std::uint8_t> field) {
    if (field.empty()) return nullptr;
    std::size_t exp_len = field[0];
    std::size_t offset = 1;
    if (exp_len == 0) {
        if (field.size() < 3) return nullptr;
        exp_len = static_cast<std::size_t>((field[1] << 8) | field[2]);
        offset = 3;
    }
    if (exp_len == 0 || field.size() <= offset + exp_len) return nullptr;
    BnPtr e = bn_from(field.subspan(offset, exp_len));
    BnPtr n = bn_from(field.subspan(offset + exp_len));
    ParamBldPtr bld(OSSL_PARAM_BLD_new());
    if (!bld || OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()) != 1)
        return nullptr;
    ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) return nullptr;
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    EVP_PKEY* pkey = nullptr;
    if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
        EVP_PKEY_fromdata(ctx.get(), &pkey, EVP_PKEY_PUBLIC_KEY, params.get()) != 1) {
        ERR_clear_error();
        return nullptr;
    }
    return wrap(pkey);
}

// --- ECDSA P-256 ------------------------------------------------------------

EcGroupPtr p256() {
    EcGroupPtr group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
    if (!group) fail("P-256 group");
    return group;
}

PkeyPtr ec_keypair_from_scalar(const BIGNUM* scalar) {
    EcGroupPtr group = p256();
    BnCtxPtr ctx(BN_CTX_new());
    EcPointPtr point(EC_POINT_new(group.get()));
    if (!point || EC_POINT_mul(group.get(), point.get(), scalar, nullptr, nullptr, ctx.get()) != 1)
        fail("P-256 public point");
    unsigned char pub[1 + 2 * kP256FieldBytes];
    if (EC_POINT_point2oct(group.get(), point.get(), POINT_CONVERSION_UNCOMPRESSED, pub, sizeof pub, ctx.get()) !=
        sizeof pub)
        fail("P-256 point encoding");
    ParamBldPtr bld(OSSL_PARAM_BLD_new());
    if (!bld || OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_PRIV_KEY, scalar) != 1 ||
        OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, pub, sizeof pub) != 1)
        fail("P-256 parameter build");
    ParamPtr params(OSSL_PARAM_BLD_to_param(bld.get()));
    if (!params) fail("P-256 parameter build");
    return from_params("EC", EVP_PKEY_KEYPAIR, params.get());
}

GeneratedKey generate_ec(const RandomBytes& random) {
    EcGroupPtr group = p256();
    const BIGNUM* order = EC_GROUP_get0_order(group.get());
    Bytes buf(kP256FieldBytes);
    for (;;) {
        random(buf);
        BnPtr scalar = bn_from(buf);
        if (BN_is_zero(scalar.get()) || BN_cmp(scalar.get(), order) >= 0) continue;
        return {ec_keypair_from_scalar(scalar.get()), buf};
    }
}

Bytes ec_public_field(EVP_PKEY* pkey) {
    unsigned char pub[1 + 2 * kP256FieldBytes];
    std::size_t len = 0;
    if (EVP_PKEY_get_octet_string_param(pkey, OSSL_PKEY_PARAM_ENCODED_PUBLIC_KEY, pub, sizeof pub, &len) != 1 ||
        len != sizeof pub || pub[0] != POINT_CONVERSION_UNCOMPRESSED)
        fail("P-256 public key export");
    return Bytes(pub + 1, pub + len);
}

PkeyPtr load_ec_public(std::span<const std::uint8_t> field) {
    if (field.size() != 2 * kP256FieldBytes) return nullptr;
    Bytes pub;
    pub.reserve(field.size() + 1);
    pub.push_back(POINT_CONVERSION_UNCOMPRESSED);
    pub.insert(pub.end(), field.begin(), field.end());
    char group_name[] = "prime256v1";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_PKEY_PARAM_GROUP_NAME, group_name, 0),
        OSSL_PARAM_construct_octet_string(OSSL_PKEY_PARAM_PUB_KEY, pub.data(), pub.size()),
        OSSL_PARAM_construct_end(),
    };
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
    EVP_PKEY* pkey = nullptr;
    if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
        EVP_PKEY_fromdata(ctx.get(), &pkey, EVP_PKEY_PUBLIC_KEY, params) != 1) {
        ERR_clear_error();
        return nullptr;
    }
    return wrap(pkey);
}

// DER ECDSA-Sig-Value <-> fixed-width r || s.
Bytes der_to_raw(std::span<const std::uint8_t> der) {
    const unsigned char* p = der.data();
    EcSigPtr sig(d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
    if (!sig) fail("ECDSA signature decoding");
    const BIGNUM* r = nullptr;
    const BIGNUM* s = nullptr;
    ECDSA_SIG_get0(sig.get(), &r, &s);
    Bytes out = bn_to_padded(r, kP256FieldBytes);
    const Bytes tail = bn_to_padded(s, kP256FieldBytes);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

bool raw_to_der(std::span<const std::uint8_t> raw, Bytes& der) {
    if (raw.size() != 2 * kP256FieldBytes) return false;
    EcSigPtr sig(ECDSA_SIG_new());
    BIGNUM* r = BN_bin2bn(raw.data(), kP256FieldBytes, nullptr);
    BIGNUM* s = BN_bin2bn(raw.data() + kP256FieldBytes, kP256FieldBytes, nullptr);
    if (!sig || !r || !s || ECDSA_SIG_set0(sig.get(), r, s) != 1) {
        BN_free(r);
        BN_free(s);
        return false;
    }
    const int len = i2d_ECDSA_SIG(sig.get(), nullptr);
    if (len <= 0) return false;
    der.resize(static_cast<std::size_t>(len));
    unsigned char* out = der.data();
    return i2d_ECDSA_SIG(sig.get(), &out) == len;
}

// --- Ed25519 ------------------------------------------------------------------

constexpr std::size_t kEd25519KeyBytes = 32;

PkeyPtr load_ed25519_private(std::span<const std::uint8_t> seed) {
    if (seed.size() != kEd25519KeyBytes) throw DnssecError(DnssecErrc::KeyFormat, "Ed25519 seed must be 32 bytes");
    EVP_PKEY* pkey = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
    if (!pkey) fail("Ed25519 private key");
    return wrap(pkey);
}

Bytes ed25519_public_field(EVP_PKEY* pkey) {
    Bytes out(kEd25519KeyBytes);
    std::size_t len = out.size();
    if (EVP_PKEY_get_raw_public_key(pkey, out.data(), &len) != 1 || len != kEd25519KeyBytes)
        fail("Ed25519 public key export");
    return out;
}

const EVP_MD* digest_for(std::uint8_t algorithm) {
    switch (algorithm) {
        case algorithm::RSASHA256:
        case algorithm::ECDSAP256SHA256: return EVP_sha256();
        case algorithm::ED25519: return nullptr;
        default: throw DnssecError(DnssecErrc::UnsupportedAlgorithm, "no signer for algorithm " + std::to_string(algorithm));
    }
}

}  // namespace

GeneratedKey generate(std::uint8_t alg, const RandomBytes& random, unsigned rsa_bits) {
    switch (alg) {
        case algorithm::RSASHA256: return generate_rsa(random, rsa_bits);
        case algorithm::ECDSAP256SHA256: return generate_ec(random);
        case algorithm::ED25519: {
            Bytes seed(kEd25519KeyBytes);
            random(seed);
            return {load_ed25519_private(seed), seed};
        }
        default: throw DnssecError(DnssecErrc::UnsupportedAlgorithm, "cannot generate keys for algorithm " + std::to_string(alg));
    }
}

PkeyPtr load_private(std::uint8_t alg, std::span<const std::uint8_t> material) {
    switch (alg) {
        case algorithm::RSASHA256: return load_rsa_private(material);
        case algorithm::ECDSAP256SHA256: {
            if (material.size() != kP256FieldBytes)
                throw DnssecError(DnssecErrc::KeyFormat, "P-256 private scalar must be 32 bytes");
            BnPtr scalar = bn_from(material);
            return ec_keypair_from_scalar(scalar.get());
        }
        case algorithm::ED25519: return load_ed25519_private(material);
        default: throw DnssecError(DnssecErrc::UnsupportedAlgorithm, "cannot load keys for algorithm " + std::to_string(alg));
    }
}

Bytes public_key_field(std::uint8_t alg, EVP_PKEY* pkey) {
    switch (alg) {
        case algorithm::RSASHA256: return rsa_public_field(pkey);
        case algorithm::ECDSAP256SHA256: return ec_public_field(pkey);
        case algorithm::ED25519: return ed25519_public_field(pkey);
        default: throw DnssecError(DnssecErrc::UnsupportedAlgorithm, "no public key format for algorithm " + std::to_string(alg));
    }
}

Bytes sign(std::uint8_t alg, EVP_PKEY* pkey, std::span<const std::uint8_t> data) {
    const EVP_MD* md = digest_for(alg);
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, md, nullptr, pkey) != 1) fail("sign init");
    std::size_t len = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &len, data.data(), data.size()) != 1) fail("sign length");
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, data.data(), data.size()) != 1) fail("sign");
    sig.resize(len);
    if (alg == algorithm::ECDSAP256SHA256) return der_to_raw(sig);
    return sig;
}

bool verify(std::uint8_t alg, std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> data,
            std::span<const std::uint8_t> signature) {
    PkeyPtr pkey;
    Bytes der;
    std::span<const std::uint8_t> sig = signature;
    switch (alg) {
        case algorithm::RSASHA256: pkey = load_rsa_public(public_key); break;
        case algorithm::ECDSAP256SHA256:
            pkey = load_ec_public(public_key);
            if (!raw_to_der(signature, der)) return false;
            sig = der;
            break;
        case algorithm::ED25519:
            if (public_key.size() != kEd25519KeyBytes) return false;
            pkey = wrap(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(), public_key.size()));
            break;
        default: return false;
    }
    if (!pkey) {
        ERR_clear_error();
        return false;
    }
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, digest_for(alg), nullptr, pkey.get()) != 1) {
        ERR_clear_error();
        return false;
    }
    const int rc = EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), data.data(), data.size());
    ERR_clear_error();
    return rc == 1;
}

}  // namespace agility::crypto
