#pragma once

#include <stdexcept>
#include <string>

namespace spikedet {

/// Operands whose shapes (order, dimension, rank) do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside the admissible range of an operation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside the domain of a mathematical function (e.g. log det of a
/// matrix with spectral norm above one).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace spikedet
