#pragma once

#include <stdexcept>
#include <string>

namespace fasthash {

// Coarse failure category; the command-line tool maps each one to an exit code.
enum class ErrorClass { kUsage, kData, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

// A caller broke a documented precondition (size mismatch, index out of range, ...).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorClass::kData, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorClass::kData, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorClass::kUsage, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorClass::kNumeric, what) {}
};

// Raised when a pairwise term handed to the graph-cut reduction is not submodular.
class SubmodularityError : public NumericError {
 public:
  explicit SubmodularityError(const std::string& what) : NumericError(what) {}
};

// Binary file problems. Each failure mode has its own type so callers can tell
// a damaged file from one written by a newer tool.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class CorruptHeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

inline const char* to_string(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::kUsage: return "usage";
    case ErrorClass::kData: return "data";
    case ErrorClass::kNumeric: return "numeric";
  }
  return "unknown";
}

}  // namespace fasthash
