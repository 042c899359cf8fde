#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace asanakit {

enum class ErrorCode {
  WrongCount,
  DegenerateTriple,
  DegeneratePair,
  MissingLandmarks,
  ParseError,
  SchemaError,
  TooFewSamples,
  IoError,
  InvalidHyperparam,
  SingleClassDataset,
  NonFiniteFeature,
  LengthMismatch,
  VersionMismatch,
  CorruptModel,
  LabelSpaceMismatch,
  KindMismatch,
  InvalidProfile,
  OutOfOrder,
  UnknownSession,
  BadFrame,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::WrongCount: return "WrongCount";
    case ErrorCode::DegenerateTriple: return "DegenerateTriple";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::MissingLandmarks: return "MissingLandmarks";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidHyperparam: return "InvalidHyperparam";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::LabelSpaceMismatch: return "LabelSpaceMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::BadFrame: return "BadFrame";
  }
  return "Unknown";
}

/// Base exception for every recoverable failure in the library. The code is
/// stable and meant for dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MissingLandmarksError : public Error {
 public:
  explicit MissingLandmarksError(std::vector<std::size_t> indices)
      : Error(ErrorCode::MissingLandmarks, describe(indices)), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  static std::string describe(const std::vector<std::size_t>& indices) {
    std::string s = "landmarks below confidence threshold: {";
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(indices[i]);
    }
    return s + "}";
  }

  std::vector<std::size_t> indices_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace asanakit
