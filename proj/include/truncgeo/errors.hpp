#pragma once

#include <stdexcept>
#include <string>

namespace truncgeo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad evaluation point or argument: x outside the support, theta outside its
// domain, negative step sizes, sample too small, and the like.
struct DomainError : Error {
    using Error::Error;
};

// Malformed user input: unknown model or prior name, unparsable expression,
// invalid experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Adaptive integration ran out of subdivisions before meeting tolerance.
// Carries the best estimate so callers can decide whether to limp on.
struct QuadratureError : Error {
    QuadratureError(const std::string& what, double estimate, double error)
        : Error(what), best_estimate(estimate), error_estimate(error) {}
    double best_estimate;
    double error_estimate;
};

// Metric not positive definite, or a geometric quantity undefined at the point.
struct GeometryError : Error {
    using Error::Error;
};

// eta -> theta inversion failed (point outside the image, or Newton diverged).
struct InversionError : Error {
    using Error::Error;
};

// Iterative solver (MLE Newton) failed to converge.
struct ConvergenceError : Error {
    using Error::Error;
};

}  // namespace truncgeo
