#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mjr {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression text. `offset` is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation left the domain of a function (log of non-positive, x/0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Model data violates a structural rule or a modelling assumption.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed (step underflow, singular system, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mjr
