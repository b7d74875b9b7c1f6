#include "agility/errors.hpp"

namespace agility {

std::string_view to_string(WireErrc code) noexcept {
    switch (code) {
        case WireErrc::InvalidName: return "InvalidName";
        case WireErrc::MalformedMessage: return "MalformedMessage";
        case WireErrc::CompressionLoop: return "CompressionLoop";
        case WireErrc::MessageTooLarge: return "MessageTooLarge";
        case WireErrc::InvalidRecord: return "InvalidRecord";
    }
    return "WireError";
}

std::string_view to_string(DnssecErrc code) noexcept {
    switch (code) {
        case DnssecErrc::MixedRrset: return "MixedRrset";
        case DnssecErrc::UnsupportedDigestType: return "UnsupportedDigestType";
        case DnssecErrc::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
        case DnssecErrc::MetaMismatch: return "MetaMismatch";
        case DnssecErrc::KeyFormat: return "KeyFormat";
        case DnssecErrc::CryptoFailure: return "CryptoFailure";
    }
    return "DnssecError";
}

std::string_view to_string(ZoneErrc code) noexcept {
    switch (code) {
        case ZoneErrc::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
        case ZoneErrc::EmptyZone: return "EmptyZone";
        case ZoneErrc::InvalidConfig: return "InvalidConfig";
    }
    return "ZoneError";
}

std::string_view to_string(NetErrc code) noexcept {
    switch (code) {
        case NetErrc::BindFailure: return "BindFailure";
        case NetErrc::Timeout: return "Timeout";
        case NetErrc::IoError: return "IoError";
        case NetErrc::BadEndpoint: return "BadEndpoint";
    }
    return "NetError";
}

std::string_view to_string(MutationErrc code) noexcept {
    switch (code) {
        case MutationErrc::RuleTargetAbsent: return "RuleTargetAbsent";
        case MutationErrc::FixtureMismatch: return "FixtureMismatch";
        case MutationErrc::InvalidScenario: return "InvalidScenario";
    }
    return "MutationError";
}

std::string_view to_string(HarnessErrc code) noexcept {
    switch (code) {
        case HarnessErrc::EthicsGate: return "EthicsGate";
        case HarnessErrc::InvalidTarget: return "InvalidTarget";
        case HarnessErrc::InvalidReport: return "InvalidReport";
    }
    return "HarnessError";
}

}  // namespace agility
