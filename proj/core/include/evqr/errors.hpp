#ifndef EVQR_ERRORS_HPP
#define EVQR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace evqr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or size disagreement between inputs.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Matrix has an eigenvalue below the admissible negative tolerance.
class NotPSD : public Error {
public:
    using Error::Error;
};

// Cholesky pivot below threshold; the system cannot be solved reliably.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

// The mean-independence system has no solution: 0 is on or outside the
// convex hull of the covariate support.
class ConstraintInfeasible : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

// A log-domain entry exceeds the exp() range; potentials are un-normalized.
class Overflow : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Instance exceeds a hard size limit (dense oracle only).
class SizeGuard : public Error {
public:
    using Error::Error;
};

// Malformed input file; message carries the file and line.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace evqr

#endif // EVQR_ERRORS_HPP
