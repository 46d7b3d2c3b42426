#ifndef CSD_ERRORS_HPP_
#define CSD_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csd {

// Base of every error raised by the library. Callers that only care about
// "the computation failed" catch this one.
class CsdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public CsdError {
 public:
  using CsdError::CsdError;
};

class EmptyInputError : public CsdError {
 public:
  using CsdError::CsdError;
};

// Raised by the RDD split when one side of the cutoff has no records.
class DegenerateSplitError : public CsdError {
 public:
  DegenerateSplitError(const std::string& side, const std::string& what)
      : CsdError(what), side_(side) {}
  const std::string& side() const noexcept { return side_; }

 private:
  std::string side_;
};

class DegenerateMomentsError : public CsdError {
 public:
  using CsdError::CsdError;
};

// The AD statistic has no defined term (every pooled value is identical).
class UndefinedStatisticError : public CsdError {
 public:
  using CsdError::CsdError;
};

// Enumeration or exact computation requested beyond its practical bound.
class UnsupportedSizeError : public CsdError {
 public:
  using CsdError::CsdError;
};

class ParseError : public CsdError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : CsdError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace csd

#endif  // CSD_ERRORS_HPP_
