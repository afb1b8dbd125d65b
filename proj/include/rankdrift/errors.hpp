#pragma once

#include <stdexcept>
#include <string>

// Exception types thrown by the library. Each maps to one recoverable
// failure mode; everything else is a plain logic_error.

namespace rankdrift {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Selection-table problems: negative weight, duplicate or out-of-range rank,
// weights that cannot be normalized.
struct InvalidTable : Error {
  using Error::Error;
};

// Tuple size does not match the model's replacement count.
struct IncompatibleK : Error {
  using Error::Error;
};

struct RankOutOfRange : Error {
  using Error::Error;
};

// Asked for a threshold (or a threshold-based diagnostic) on a model that
// does not carry one.
struct UnknownThreshold : Error {
  using Error::Error;
};

struct BadInitialData : Error {
  using Error::Error;
};

// Replacement CDF fails the strictly-increasing check on its support.
struct NonInvertibleCdf : Error {
  using Error::Error;
};

// Count-chain F table is not a CDF over ranks (monotone, F(1)=0 allowed,
// F(N)=1 required).
struct BadFTable : Error {
  using Error::Error;
};

// The chain has more than one closed communicating class, so no unique
// stationary distribution exists.
struct ReducibleChain : Error {
  using Error::Error;
};

// Closed-form objects for the infinite chain exist only below s = 1/2.
struct Supercritical : Error {
  using Error::Error;
};

// A Monte Carlo estimate hit its step cap before collecting enough data.
struct TrialBudgetExceeded : Error {
  using Error::Error;
};

struct EmptySample : Error {
  using Error::Error;
};

// Excursion statistics need at least one visit to zero.
struct NoZeroVisit : Error {
  using Error::Error;
};

struct QuadratureNonConvergence : Error {
  using Error::Error;
};

// Bad experiment configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rankdrift
