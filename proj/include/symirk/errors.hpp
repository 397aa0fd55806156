#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace symirk {

// Base of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GenerationFailure : public Error {
 public:
  using Error::Error;
};

// A tableau whose lower-triangle ratios fall outside (1/2, 2), so 1 - mu
// would not be exact in machine arithmetic.
class UnsupportedTableau : public Error {
 public:
  UnsupportedTableau(const std::string& what, std::size_t row, std::size_t col)
      : Error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class AccumulationFailure : public Error {
 public:
  AccumulationFailure(const std::string& what, std::size_t component)
      : Error(what), component_(component) {}
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

class RangeFailure : public Error {
 public:
  using Error::Error;
};

class RhsFailure : public Error {
 public:
  RhsFailure(const std::string& what, std::size_t stage)
      : Error(what), stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step, double delta_norm)
      : Error(what), step_(step), delta_norm_(delta_norm) {}
  std::int64_t step() const noexcept { return step_; }
  double delta_norm() const noexcept { return delta_norm_; }

 private:
  std::int64_t step_;
  double delta_norm_;
};

class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

class InvalidComparison : public Error {
 public:
  using Error::Error;
};

// Malformed run configuration; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace symirk
