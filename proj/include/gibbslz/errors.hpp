#pragma once

#include <stdexcept>
#include <string>

namespace gibbslz {

// Argument outside the domain of a function (y outside [0,1], mean out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Ensemble parameters that do not define a probability law (beta <= 0, Bose with omega <= 0).
class InvalidEnsemble : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature or root finding failed to converge, or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Target value outside the attainable range of a monotone map.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Conditioning event of zero probability.
class ImpossibleCondition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates the hypothesis a check is stated under (non-LC, non-unimodal, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gibbslz
