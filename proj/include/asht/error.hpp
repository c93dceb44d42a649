#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asht {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or a malformed instance.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input file could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Two hypotheses agree on every action, so no policy can tell them apart.
class ValidityError : public Error {
 public:
  ValidityError(std::size_t first, std::size_t second, const std::string& what)
      : Error(what), first_(first), second_(second) {}

  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Exhaustive routines refuse inputs beyond their enumeration budget.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace asht
