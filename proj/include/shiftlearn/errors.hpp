#pragma once

#include <stdexcept>
#include <string>

namespace shiftlearn {

// Root of every error raised by the library. Callers that only care about
// "did it work" catch this; the subclasses tell the CLI which exit code to use.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Configuration that violates a documented precondition.
class ParameterError : public Error {
public:
  using Error::Error;
};

// Problem size over the configured cap (lattice too large, etc).
class ResourceError : public Error {
public:
  using Error::Error;
};

// A caller contract was breached in a way only detectable mid-run.
class InvariantViolation : public Error {
public:
  using Error::Error;
};

// Rejection sampling for a conditioned frame stalled; the frame is discarded.
class InefficientFrame : public Error {
public:
  using Error::Error;
};

// Candidate sampler could not find an accepted point in its trial budget.
class CandidateStall : public Error {
public:
  using Error::Error;
};

// The learner produced no usable candidate.
class PipelineFailure : public Error {
public:
  using Error::Error;
};

class DegenerateCovariance : public Error {
public:
  using Error::Error;
};

class CoverageError : public Error {
public:
  using Error::Error;
};

class UnsupportedDensity : public Error {
public:
  using Error::Error;
};

} // namespace shiftlearn
