#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace redistmc {

enum class ErrorKind {
    InvalidArgument,
    InvalidPlan,
    UnknownDistrict,
    DegenerateGraph,
    DegenerateWeight,
    NoBoundary,
    StallDetected,
    StepOutOfRange,
    ZeroWithinVariance,
    InsufficientData,
    NotConverged,
    InsufficientPlans,
    DegenerateSpread,
    ParseError,
    AsymmetricAdjacency,
    DisconnectedGraph,
    DanglingReference,
    DegenerateGeometry,
    SeedFailure,
    CoherenceError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// R-hat per step-grid entry, kept for inspection when no entry converged.
class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& message,
                      std::vector<std::pair<std::size_t, double>> profile)
        : Error(ErrorKind::NotConverged, message), profile_(std::move(profile)) {}

    const std::vector<std::pair<std::size_t, double>>& profile() const noexcept {
        return profile_;
    }

private:
    std::vector<std::pair<std::size_t, double>> profile_;
};

}  // namespace redistmc
