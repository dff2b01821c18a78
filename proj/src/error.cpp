#include "redistmc/error.hpp"

namespace redistmc {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidPlan: return "InvalidPlan";
        case ErrorKind::UnknownDistrict: return "UnknownDistrict";
        case ErrorKind::DegenerateGraph: return "DegenerateGraph";
        case ErrorKind::DegenerateWeight: return "DegenerateWeight";
        case ErrorKind::NoBoundary: return "NoBoundary";
        case ErrorKind::StallDetected: return "StallDetected";
        case ErrorKind::StepOutOfRange: return "StepOutOfRange";
        case ErrorKind::ZeroWithinVariance: return "ZeroWithinVariance";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::InsufficientPlans: return "InsufficientPlans";
        case ErrorKind::DegenerateSpread: return "DegenerateSpread";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::AsymmetricAdjacency: return "AsymmetricAdjacency";
        case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorKind::DanglingReference: return "DanglingReference";
        case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorKind::SeedFailure: return "SeedFailure";
        case ErrorKind::CoherenceError: return "CoherenceError";
    }
    return "Unknown";
}

}  // namespace redistmc
