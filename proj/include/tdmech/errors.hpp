#pragma once

#include <stdexcept>
#include <string>

namespace tdmech {

/// A coordinate left the open box it was declared on.
class DomainError : public std::runtime_error {
public:
    DomainError(std::string what, int coordinate, double value, double lo, double hi)
        : std::runtime_error(std::move(what)),
          coordinate(coordinate), value(value), lo(lo), hi(hi) {}
    int coordinate;
    double value, lo, hi;
};

/// A finite-difference stencil does not fit inside the declared domain.
class StepError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The velocity Hessian of a Lagrangian is singular (or numerically so) where
/// a solve against it was requested.
class RegularityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field was asked for a derivative-carrying evaluation it was not built with.
class CapabilityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Construction-time consistency check failed (transition round trip, config
/// dimensions, off-constraint initial data, ...).
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An operation requires a field with a specific provenance tag.
class ProvenanceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integration stopped before reaching the end of the span.
class IntegrationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tdmech
