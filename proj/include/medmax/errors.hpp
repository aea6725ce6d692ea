#pragma once

#include <stdexcept>
#include <string>

namespace medmax {

// Invalid argument to a mathematical operation (empty set, gamma outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No basis set can be realized below the space's resolution.
class ResolutionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A homothetic image or similar construction leaves the grid.
class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A solver or experiment was asked to work on a problem above its size cap.
class SizeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested optimization is nonconvex and only feasibility checks are offered.
class NonconvexProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace medmax
