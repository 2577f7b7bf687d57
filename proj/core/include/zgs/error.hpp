#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zgs {

/// Failure categories raised across the library. The CLI maps each one to an
/// exit status (see `exit_code`).
enum class ErrorKind {
  MissingInput,
  IntegrityError,
  ParseError,
  EmptyInput,
  DegenerateVector,
  NumericalError,
  DegenerateLabels,
  NotFound,
  EmptyGraph,
  ShapeError,
  EmptyNeighborhood,
  DegenerateTraining,
  MissingEmbedding,
  InsufficientData,
  InvalidK,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 2 for data/integrity failures, 3 for numerical failures.
int exit_code(ErrorKind kind);

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace zgs
