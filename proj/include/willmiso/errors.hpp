#pragma once

#include <stdexcept>
#include <string>

namespace willmiso {

/// Failure categories. The CLI maps configuration/validation kinds to exit
/// code 1 and numerical kinds to exit code 2.
enum class ErrorKind {
  InvalidArgument,
  InvalidMesh,
  Io,
  Config,
  DegenerateNormal,
  NonPositiveVolume,
  PoleInput,
  QuadratureNotConverged,
  BisectionFailed,
  ProjectionStalled,
  LineSearchFailed,
  MeshDegenerated,
  FitDiverged,
  RecursionHypothesisViolated,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidMesh: return "InvalidMesh";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
    case ErrorKind::DegenerateNormal: return "DegenerateNormal";
    case ErrorKind::NonPositiveVolume: return "NonPositiveVolume";
    case ErrorKind::PoleInput: return "PoleInput";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::BisectionFailed: return "BisectionFailed";
    case ErrorKind::ProjectionStalled: return "ProjectionStalled";
    case ErrorKind::LineSearchFailed: return "LineSearchFailed";
    case ErrorKind::MeshDegenerated: return "MeshDegenerated";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::RecursionHypothesisViolated: return "RecursionHypothesisViolated";
  }
  return "Unknown";
}

inline bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidMesh:
    case ErrorKind::Io:
    case ErrorKind::Config:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace willmiso
