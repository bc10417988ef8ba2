#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace equilibra {

/// Base class for all domain errors. `code()` is the stable machine-readable
/// name used in CLI diagnostics; the what() string carries the detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define EQUILIBRA_ERROR(Name)                                            \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& detail) : Error(#Name, detail) {} \
    }

// geometry
EQUILIBRA_ERROR(DimensionMismatch);
EQUILIBRA_ERROR(NotSkew);
EQUILIBRA_ERROR(DegenerateRotation);
EQUILIBRA_ERROR(OffInvariantSubspace);

// forcelaw
EQUILIBRA_ERROR(NonPositiveDistance);
EQUILIBRA_ERROR(AdmissibilityFailure);

// dynamics
EQUILIBRA_ERROR(CollisionSingularity);
EQUILIBRA_ERROR(AntipodalOrCoincidentSingularity);
EQUILIBRA_ERROR(OffManifold);
EQUILIBRA_ERROR(TangencyViolation);
EQUILIBRA_ERROR(ToleranceUnachievable);

// equilibria
EQUILIBRA_ERROR(SingularJacobian);
EQUILIBRA_ERROR(GaugeConflict);

// certify
EQUILIBRA_ERROR(UnverifiedMember);
EQUILIBRA_ERROR(HypothesisNotMet);
EQUILIBRA_ERROR(PathViolation);
EQUILIBRA_ERROR(AntipodalGuardViolation);

// cli / configuration (maps to exit code 1 instead of 2)
EQUILIBRA_ERROR(ConfigError);

#undef EQUILIBRA_ERROR

/// Thrown by the Newton corrector when max_iter is exhausted.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& detail, int iterations, double residual_norm)
        : Error("NoConvergence", detail),
          iterations(iterations),
          residual_norm(residual_norm) {}

    int iterations;
    double residual_norm;
};

}  // namespace equilibra
