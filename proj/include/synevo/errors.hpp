#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synevo {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, labels or arguments that do not fit the operation.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (non-positive normalizers, bad budgets, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf appeared in an intermediate result.
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& detail)
      : Error("training diverged in epoch " + std::to_string(epoch) + ": " + detail),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

// Malformed on-disk data; carries the byte offset where parsing failed.
class ParseError : public Error {
 public:
  enum class Kind { bad_magic, version_mismatch, malformed_schema, truncated, checksum, dimension_mismatch, io };

  ParseError(Kind kind, std::size_t offset, const std::string& detail)
      : Error(std::string(kind_name(kind)) + " at byte offset " + std::to_string(offset) + ": " + detail),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

  static const char* kind_name(Kind kind) noexcept {
    switch (kind) {
      case Kind::bad_magic: return "bad magic";
      case Kind::version_mismatch: return "version mismatch";
      case Kind::malformed_schema: return "malformed schema";
      case Kind::truncated: return "truncated file";
      case Kind::checksum: return "checksum mismatch";
      case Kind::dimension_mismatch: return "dimension mismatch";
      case Kind::io: return "i/o error";
    }
    return "parse error";
  }

 private:
  Kind kind_;
  std::size_t offset_;
};

// The ratio of live synapses is undefined because the reference has none.
class UndefinedRatio : public Error {
 public:
  using Error::Error;
};

// Synthesis produced an offspring with no live synapse at all.
class DegenerateOffspring : public Error {
 public:
  using Error::Error;
};

class ResumeError : public Error {
 public:
  ResumeError(std::size_t generation, const std::string& detail)
      : Error("cannot resume at generation " + std::to_string(generation) + ": " + detail),
        generation_(generation) {}
  std::size_t generation() const noexcept { return generation_; }

 private:
  std::size_t generation_;
};

}  // namespace synevo
