#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nilap {

enum class Errc {
    InvalidArgument,
    MaskTouchesBox,
    EmptyInterior,
    SamePoint,
    NoCandidates,
    NonNegativeLminus,
    BracketFailure,
    NotConverged,
    SignHypothesis,
    ArgminOutsideDomain,
    UnboundedData,
    HypothesisViolation,
    ParseError,
    ValidationError,
    EmptyCorpus,
};

constexpr std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::MaskTouchesBox: return "MaskTouchesBox";
        case Errc::EmptyInterior: return "EmptyInterior";
        case Errc::SamePoint: return "SamePoint";
        case Errc::NoCandidates: return "NoCandidates";
        case Errc::NonNegativeLminus: return "NonNegativeLminus";
        case Errc::BracketFailure: return "BracketFailure";
        case Errc::NotConverged: return "NotConverged";
        case Errc::SignHypothesis: return "SignHypothesis";
        case Errc::ArgminOutsideDomain: return "ArgminOutsideDomain";
        case Errc::UnboundedData: return "UnboundedData";
        case Errc::HypothesisViolation: return "HypothesisViolation";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::EmptyCorpus: return "EmptyCorpus";
    }
    return "Unknown";
}

/// Base exception for every failure raised by the library. The code is stable
/// and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace nilap
