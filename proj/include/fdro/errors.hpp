#pragma once

#include <stdexcept>
#include <string>

namespace fdro {

// Invalid argument or parameter outside the valid domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature did not settle within the allowed number of refinements.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePriorsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IncompatibleDistributionsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyAcceptanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ImpossiblePreparationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoFeasiblePointError : public std::runtime_error {
 public:
  NoFeasiblePointError(const std::string& what, double best_fidelity)
      : std::runtime_error(what), best_fidelity_(best_fidelity) {}
  double best_fidelity() const noexcept { return best_fidelity_; }

 private:
  double best_fidelity_;
};

}  // namespace fdro
