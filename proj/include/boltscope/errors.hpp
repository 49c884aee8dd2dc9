#pragma once

#include <stdexcept>
#include <string>

namespace boltscope {

/// Invalid stimulus, model or analysis parameter.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Integrator blow-up or a non-finite intermediate.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unsupported input file.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace boltscope
