#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wildocc {

enum class ErrorKind {
  kRange,
  kInvalidPose,
  kEmptyInput,
  kInsufficientPoints,
  kSolverNotConverged,
  kPrecondition,
  kIncompatibleGrid,
  kIncompatibleShape,
  kUndefinedLoss,
  kInvalidLoss,
  kUndefinedMetric,
  kMalformedFile,
  kPairing,
  kParse,
  kFormat,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is
/// stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SolverNotConverged : public Error {
 public:
  SolverNotConverged(double relative_residual, int iterations)
      : Error(ErrorKind::kSolverNotConverged,
              "solver did not converge: relative residual " +
                  std::to_string(relative_residual) + " after " +
                  std::to_string(iterations) + " iterations"),
        relative_residual_(relative_residual),
        iterations_(iterations) {}

  double relative_residual() const noexcept { return relative_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double relative_residual_;
  int iterations_;
};

/// Error re-raised by the pipeline with the failing stage name prefixed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "[" + stage + "] " + cause.what()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace wildocc
