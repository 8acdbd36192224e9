#pragma once

#include <stdexcept>
#include <string>

namespace dmoments {

/// An enumeration (product space or tuple set) would exceed its configured cap.
/// Thrown instead of silently truncating; the caller must shrink the problem.
class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Ratio statistics on a sample or distribution with zero dispersion.
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two computational routes that must agree (algebraic vs pairwise) did not.
class RouteMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace dmoments
