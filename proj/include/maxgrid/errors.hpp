#pragma once

#include <stdexcept>
#include <string>

namespace maxgrid {

enum class ErrorKind {
  NonEmbeddable,
  InvalidHorizon,
  NonPsd,
  GridMeshMismatch,
  EqualSpacings,
  MissingConstant,
  UnclassifiableGrid,
  ConfigMismatch,
  InsufficientExceedances,
  Usage,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  const char* kind_name() const {
    switch (kind_) {
      case ErrorKind::NonEmbeddable: return "NonEmbeddable";
      case ErrorKind::InvalidHorizon: return "InvalidHorizon";
      case ErrorKind::NonPsd: return "NonPSD";
      case ErrorKind::GridMeshMismatch: return "GridMeshMismatch";
      case ErrorKind::EqualSpacings: return "EqualSpacings";
      case ErrorKind::MissingConstant: return "MissingConstant";
      case ErrorKind::UnclassifiableGrid: return "UnclassifiableGrid";
      case ErrorKind::ConfigMismatch: return "ConfigMismatch";
      case ErrorKind::InsufficientExceedances: return "InsufficientExceedances";
      case ErrorKind::Usage: return "Usage";
      case ErrorKind::Io: return "Io";
    }
    return "Unknown";
  }

  // CLI exit-code contract: 2 usage/config, 3 numeric, 1 io.
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Usage:
      case ErrorKind::ConfigMismatch:
      case ErrorKind::UnclassifiableGrid:
      case ErrorKind::GridMeshMismatch:
      case ErrorKind::EqualSpacings:
        return 2;
      case ErrorKind::Io:
        return 1;
      default:
        return 3;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace maxgrid
