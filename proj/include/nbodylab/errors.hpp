#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nbodylab {

namespace detail {
inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}
}  // namespace detail

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pairwise distance fell at or below the collision guard.
struct CollisionApproach : Error {
    int body_j;
    int body_k;
    double distance;

    CollisionApproach(int j, int k, double r)
        : Error("collision approach between bodies " + std::to_string(j) + " and " +
                std::to_string(k) + " at distance " + detail::sci(r)),
          body_j(j), body_k(k), distance(r) {}
};

struct NonPositiveArgument : Error {
    explicit NonPositiveArgument(double x)
        : Error("argument must be positive, got " + detail::sci(x)) {}
};

struct EmptyGrid : Error {
    EmptyGrid() : Error("sample grid must be non-empty") {}
};

struct MaxStepsExceeded : Error {
    explicit MaxStepsExceeded(unsigned long long steps)
        : Error("integration exceeded the step budget of " + std::to_string(steps)) {}
};

struct StepUnderflow : Error {
    explicit StepUnderflow(double h)
        : Error("adaptive step size underflowed to " + detail::sci(h)) {}
};

struct NonFiniteState : Error {
    explicit NonFiniteState(double t)
        : Error("integration produced a non-finite state at t = " + std::to_string(t)) {}
};

struct NoConvergence : Error {
    int iterations;
    double final_residual;

    NoConvergence(int iters, double resid, const std::string& detail = "")
        : Error("solver failed to converge after " + std::to_string(iters) +
                " iterations (residual " + detail::sci(resid) + ")" +
                (detail.empty() ? "" : ": " + detail)),
          iterations(iters), final_residual(resid) {}
};

struct SingularJacobian : Error {
    explicit SingularJacobian(int rank)
        : Error("Jacobian is rank-deficient beyond the gauge null-space (rank " +
                std::to_string(rank) + ")") {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(std::size_t n)
        : Error("trajectory has " + std::to_string(n) + " samples, need at least 10") {}
};

struct DegenerateSeed : Error {
    DegenerateSeed() : Error("velocity seed vanishes after constraint projection") {}
};

struct NonNegativePotential : Error {
    explicit NonNegativePotential(double v)
        : Error("potential energy is " + detail::sci(v) +
                "; no velocity scaling reaches zero total energy") {}
};

struct LawNotDegenerate : Error {
    LawNotDegenerate() : Error("force law is not in the degenerate inverse-cube class") {}
};

struct NonPositiveSample : Error {
    NonPositiveSample(int j, double z, double value)
        : Error("component " + std::to_string(j) + " is non-positive at z = " +
                detail::sci(z) + " (value " + detail::sci(value) + ")") {}
};

struct InvalidLawFamily : Error {
    explicit InvalidLawFamily(const std::string& why) : Error("invalid law family: " + why) {}
};

/// Raised while validating user-supplied configuration (scenario files, CLI input).
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace nbodylab
