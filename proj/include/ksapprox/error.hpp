#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksapprox {

// Invalid arguments are reported with std::invalid_argument. The types below
// carry the remaining failure categories so callers (the CLI in particular)
// can map them onto distinct exit codes.

/// A query or construction needs Poisson events beyond the simulated horizon.
class OutOfHorizon : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Evaluation requested exactly at a non-integrable kernel singularity.
class SingularPoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The parameter is inside the nominal range but the formula has no value
/// there (e.g. the Lei-Nualart covariance at H = 1).
class UnsupportedParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs that are individually fine but cannot be combined.
class InvalidCombination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Zero-variance sample passed to a moment statistic.
class DegenerateSample : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Expected work exceeds the configured event ceiling; raised before any
/// simulation starts.
class HorizonGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An adaptive integration did not reach its tolerance within budget.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature node budget exhausted during a transform. Carries the values
/// accumulated so far for diagnostics.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::size_t grid_index,
                 std::size_t segments_done, std::vector<double> partial_cos,
                 std::vector<double> partial_sin)
      : std::runtime_error(what),
        grid_index(grid_index),
        segments_done(segments_done),
        partial_cos(std::move(partial_cos)),
        partial_sin(std::move(partial_sin)) {}

  std::size_t grid_index;
  std::size_t segments_done;
  std::vector<double> partial_cos;
  std::vector<double> partial_sin;
};

/// A replica of an ensemble failed; `cause` holds the original exception.
class ReplicaFailure : public std::runtime_error {
 public:
  ReplicaFailure(const std::string& what, std::size_t replica, std::exception_ptr cause)
      : std::runtime_error(what), replica(replica), cause(std::move(cause)) {}

  std::size_t replica;
  std::exception_ptr cause;
};

}  // namespace ksapprox
