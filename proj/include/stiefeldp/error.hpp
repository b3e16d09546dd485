#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stiefeldp {

enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidShape,
  kDegenerateInput,
  kTruncationInsufficient,
  kConcentrationTooLarge,
  kParse,
  kDataQuality,
  kIo,
  kInvariantViolation,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the zonal series still carries relative mass above tolerance
// at the largest order the evaluator is willing to build.
class TruncationError : public Error {
 public:
  TruncationError(int order_reached, const std::string& what)
      : Error(ErrorCode::kTruncationInsufficient, what), order_reached_(order_reached) {}
  int order_reached() const noexcept { return order_reached_; }

 private:
  int order_reached_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DataQualityError : public Error {
 public:
  DataQualityError(std::vector<std::size_t> rows, const std::string& what)
      : Error(ErrorCode::kDataQuality, what), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

}  // namespace stiefeldp
