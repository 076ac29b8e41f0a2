#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nlos {

// Base for every error thrown by the toolkit. The CLI maps each subclass to
// a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, shape mismatches, broken invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training divergence, non-finite gradients.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind { BadMagic, BadVersion, Truncated, SizeMismatch, CrcMismatch, BadValue };

const char* to_string(FormatErrorKind kind);

// A structurally invalid file. `offset` is the byte position at which the
// problem was detected.
class FormatError : public IoError {
 public:
  FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& detail);

  FormatErrorKind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  FormatErrorKind kind_;
  std::uint64_t offset_;
};

}  // namespace nlos
