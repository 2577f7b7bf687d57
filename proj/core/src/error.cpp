#include "zgs/error.hpp"

namespace zgs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::IntegrityError: return "IntegrityError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateVector: return "DegenerateVector";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorKind::DegenerateTraining: return "DegenerateTraining";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateVector:
    case ErrorKind::NumericalError:
    case ErrorKind::DegenerateLabels:
    case ErrorKind::DegenerateTraining:
      return 3;
    default:
      return 2;
  }
}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace zgs
