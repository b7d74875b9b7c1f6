#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agility {

enum class WireErrc {
    InvalidName,
    MalformedMessage,
    CompressionLoop,
    MessageTooLarge,
    InvalidRecord,
};

std::string_view to_string(WireErrc code) noexcept;

class WireError : public std::runtime_error {
public:
    WireError(WireErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    WireErrc code() const noexcept { return code_; }

private:
    WireErrc code_;
};

enum class DnssecErrc {
    MixedRrset,
    UnsupportedDigestType,
    UnsupportedAlgorithm,
    MetaMismatch,
    KeyFormat,
    CryptoFailure,
};

std::string_view to_string(DnssecErrc code) noexcept;

class DnssecError : public std::runtime_error {
public:
    DnssecError(DnssecErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    DnssecErrc code() const noexcept { return code_; }

private:
    DnssecErrc code_;
};

enum class ZoneErrc {
    UnsupportedAlgorithm,
    EmptyZone,
    InvalidConfig,
};

std::string_view to_string(ZoneErrc code) noexcept;

class ZoneError : public std::runtime_error {
public:
    ZoneError(ZoneErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ZoneErrc code() const noexcept { return code_; }

private:
    ZoneErrc code_;
};

enum class NetErrc {
    BindFailure,
    Timeout,
    IoError,
    BadEndpoint,
};

std::string_view to_string(NetErrc code) noexcept;

class NetError : public std::runtime_error {
public:
    NetError(NetErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    NetErrc code() const noexcept { return code_; }

private:
    NetErrc code_;
};

enum class MutationErrc {
    RuleTargetAbsent,
    FixtureMismatch,
    InvalidScenario,
};

std::string_view to_string(MutationErrc code) noexcept;

class MutationError : public std::runtime_error {
public:
    MutationError(MutationErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    MutationErrc code() const noexcept { return code_; }

private:
    MutationErrc code_;
};

enum class HarnessErrc {
    EthicsGate,
    InvalidTarget,
    InvalidReport,
};

std::string_view to_string(HarnessErrc code) noexcept;

class HarnessError : public std::runtime_error {
public:
    HarnessError(HarnessErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    HarnessErrc code() const noexcept { return code_; }

private:
    HarnessErrc code_;
};

}  // namespace agility
