#pragma once

// Values produced by tests/oracles/harvest.py (dnspython + cryptography) and
// frozen here. Regenerate only if the fixture definitions below change.

#include <cstdint>
#include <string_view>

namespace oracle {

// Worked example from the DNSSEC records specification (dskey.example.com., algorithm 5).
inline constexpr std::string_view kRfcDnskeyOwner = "dskey.example.com.";
inline constexpr std::string_view kRfcDnskey =
    "256 3 5 AQOeiiR0GOMYkDshWoSKz9XzfwJr1AYtsmx3TGkJaNXVbfi/2pHm822aJ5iI9BMzNXxeYCmZDRD99WYwYqUSdjMmmAphXdvxegXd/"
    "M5+X7OrzKBaMbCVdFLUUh6DhweJBjEVv5f2wwjM9XzcnOf+EPbtG9DMBmADjFDc2w/rljwvFw==";
inline constexpr std::uint16_t kRfcKeyTag = 60485;
inline constexpr std::string_view kRfcDsSha256 = "d4b7d520e7bb5f0f67674a0cceb1e3e0614b93c4f9e99b8383f6a1e4469da50a";

// Ed25519 worked example (example.com.).
inline constexpr std::string_view kEdOwner = "example.com.";
inline constexpr std::string_view kEdDnskey = "257 3 15 l02Woi0iS8Aa25FQkUd9RMzZHJpBoRQwAQEX1SxZJA4=";
inline constexpr std::string_view kEdPrivate = "ODIyNjAzODQ2MjgwODAxMjI2NDUxOTAyMDQxNDIyNjI=";
inline constexpr std::uint16_t kEdKeyTag = 3613;
inline constexpr std::string_view kEdDs = "3613 15 2 3aa5ab37efce57f737fc1627013fee07bdf241bd10f3b1964ab55c78e79a304b";
inline constexpr std::string_view kEdMx = "10 mail.example.com.";
inline constexpr std::uint32_t kEdMxTtl = 3600;
inline constexpr std::uint32_t kEdExpiration = 1440021600;
inline constexpr std::uint32_t kEdInception = 1438207200;
inline constexpr std::string_view kEdMxSignature =
    "oL9krJun7xfBOIWcGHi7mag5/hdZrKWw15jPGrHpjQeRAvTdszaPD+QLs3fx8A4M3e23mRZ9VrbpMngwcrqNAg==";

// Wire encodings.
inline constexpr std::string_view kQueryHex = "123401000001000000000001076578616d706c650474657374000001000100002904d0000080000000";  // id 0x1234, example.test A, DO, payload 1232, RD set
inline constexpr std::string_view kResponseHex = "beef8500000100010000000004686f7374076578616d706c6504746573740000010001c00c000100010000012c0004c0000207";  // id 0xbeef, AA, host.example.test A 192.0.2.7 ttl 300

// Cross-signer fixture: "WWW.Example.test." 300 IN A {10.0.0.2, 10.0.0.1}, signer example.test.,
// flags 257, inception 1700000000, expiration 1700604800.
inline constexpr std::string_view kFixtureOwner = "WWW.Example.test.";
inline constexpr std::string_view kFixtureSigner = "example.test.";
inline constexpr std::uint32_t kFixtureTtl = 300;
inline constexpr std::uint32_t kFixtureInception = 1700000000;
inline constexpr std::uint32_t kFixtureExpiration = 1700604800;

inline constexpr std::string_view kRsaPrivateDer = "MIICXgIBAAKBgQC48HSrCCj0KG9MyBQsRCqpr+To1OauF8fNBpRHi2QOTF955+kSDTbeqibLlid1WYEkjXHHNONLf/EJoGJGer+4xE8eDtPvRu9A2JNb/KQKp2QK5J9GMu0RdXHTW8+aC+7OmMf9J4cd7zFjv2IEJu2V6fxERspfV4eikkKi7knngwIDAQABAoGBAJWRyxmD2PNWPGWhr0b5vnNMEVsIzKPiEbJMbuHJ5xr1Q4ZpPANgco70l7mxb6olwB9a0bklmeo2yC9b6f9MSP75zxUTDY+IaFmlLu17+vJQeKfmkasIsBsA3rIflfuDL+nXR7EW2xhExcI5xTtNVxFuwtvS8J8AUo6zmZ06C8fZAkEA6dsG9IW9vvWpky4g1bsbuOaqHZHrMUGS0psVAOVkjaN2R6ox5tLUCrM6QvUnTrxM9NTHPFXSOwXSjTkqWWI/vwJBAMpzociQ0vxXucc6/rwqrABeyJc1iFuSweDXh+f419coajcxEEPHr1rvy6SfVvsLHEWnLc1egzmL8hRYp0sdCT0CQQDlypGFCT4wPJlKxJMDMf7Fq/MRZ2ciWXr6c+Upoj8yZqM9PGIYnKY7dW4UiWz8k09TbRnxkaso0Ena94dDmaVlAkBxuQ6yKZg7I9Q59AvQC3BfLN8lAW89cWzzLl8rkX89X3h61Fa8nFkGjhkoulET6CPThJuX93VjSBeOEla3PPJJAkEAyJg10QGTT2cj85JpCCce0zA3itHdZS4D9pl6rBqAQ4WZsh/xuN7bmGAoB/HBG2MuLGWO0h+GhuT6gRMGq/9X6A==";
inline constexpr std::string_view kRsaDnskey = "AwEAAbjwdKsIKPQob0zIFCxEKqmv5OjU5q4Xx80GlEeLZA5MX3nn6RINNt6qJsuWJ3VZgSSNccc040t/8QmgYkZ6v7jETx4O0+9G70DYk1v8pAqnZArkn0Yy7RF1cdNbz5oL7s6Yx/0nhx3vMWO/YgQm7ZXp/ERGyl9Xh6KSQqLuSeeD";
inline constexpr std::uint16_t kRsaKeyTag = 51595;
inline constexpr std::string_view kRsaSignature = "saUSE6/fIcUAfq+p5OkJ9tHQiQSkP5gPf++ca/QJDoMZE0OBKhyC2okxtboaDmqxAQi8sNN3VCZZB+eLSVfbbcVvGvTTwO9Q4aOCgQb/4ULP7/KOWze23qwyQfGsLP1tuI47WzttQWAn0v0z2kzvLS/5sV0U9ofzJ6PP/duD3aI=";

inline constexpr std::string_view kEcPrivate = "j1SbK8NgtCjUftQ7qQZbAGdj68d0scSKrCVl7cJVh3I=";
inline constexpr std::string_view kEcDnskey = "j84DMcnWe63KYE90tSsY0sDNCiNjSCiRsxN+IMLHKU28QPZWJcM9HRpaR6wXAFNugJaam1G+JOO8GedqYNKkvA==";
inline constexpr std::uint16_t kEcKeyTag = 21836;
inline constexpr std::string_view kEcSignature = "LjNHiwITYHi1VPJT7HRNHoRtUwwE8wbH+XfFyJ0H/k1iXztAGCAN1K+sh+uuDqIP+coJkJKnR9LBDF6NCHulDQ==";

inline constexpr std::string_view kEd25519Private = "AAECAwQFBgcICQoLDA0ODxAREhMUFRYXGBkaGxwdHh8=";
inline constexpr std::string_view kEd25519Dnskey = "A6EHv/POEL4dcN0Y50vAmWfk1jCbpQ1fHdyGZBJVMbg=";
inline constexpr std::uint16_t kEd25519KeyTag = 34259;
inline constexpr std::string_view kEd25519Signature = "fpoWVzmVUgGHE1blFbaK1abEd1SeZ4/M2uSppIohMNIqQ0iD11TQ6+n/wYNsl2R67E1f4H4aw0HJEl2zOhqJBw==";

}  // namespace oracle
