#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccr {

/// Failure categories raised by the library. Each maps to a documented
/// contract violation or a numerical verdict (e.g. an infeasible instance).
enum class ErrorKind {
    DimensionMismatch,
    NotHermitian,
    NotPositiveDefinite,
    Singular,
    NoConvergence,
    ModeII,
    DegenerateRelayChannel,
    Diverged,
    DegenerateDirection,
    ZeroGain,
    Infeasible,
    NegativePower,
    Inconclusive,
    DimensionDeficit,
    ZeroProjection,
    PuInfeasible,
    OutOfRegime,
    InfeasibleScalar,
    NoFeasibleGridPoint,
    NoFeasibleInstance,
    InvalidConfig,
    Parse,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ccr
