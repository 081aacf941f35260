#pragma once

#include <stdexcept>
#include <string>

namespace optimatch {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Point configuration leaves the rigid transform underdetermined.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class InsufficientPairs : public Error {
 public:
  using Error::Error;
};

class AllSamplesDegenerate : public Error {
 public:
  using Error::Error;
};

class PlacementFailure : public Error {
 public:
  using Error::Error;
};

class EmptyGroundTruth : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input. field() names the offending JSON path.
class MalformedInput : public Error {
 public:
  MalformedInput(std::string field, const std::string& what)
      : Error("malformed input at '" + field + "': " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace optimatch
