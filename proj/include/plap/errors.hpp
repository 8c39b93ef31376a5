#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Invalid parameters or arguments outside an operation's domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Evaluation requested exactly at a singular endpoint of a drift family.
/// Callers should switch to the regularized start.
class SingularityError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Numerical failure of an iterative or integration routine.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operation called on an object in the wrong state (e.g. a profile
/// that never crossed zero).
class StateError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace plap
