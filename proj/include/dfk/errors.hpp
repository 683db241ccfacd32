#pragma once

#include <stdexcept>
#include <string>

namespace dfk {

/// File-format failures carry a machine-checkable code alongside the message.
class IoError : public std::runtime_error {
  public:
    enum class Code { BadMagic, Truncated, VersionMismatch, Malformed, FileAccess };

    IoError(Code code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Code code() const { return code_; }

  private:
    Code code_;
};

/// Raised when a NaN/Inf loss or gradient is observed during optimization.
class TrainingDiverged : public std::runtime_error {
  public:
    explicit TrainingDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dfk
