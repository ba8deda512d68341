#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vmcast {

enum class ErrorCode {
  PastEvent,
  EmptyFleet,
  InvalidScenario,
  InvalidPlan,
  MalformedRecord,
  PdrUndefined,
  EedUndefined,
  ThroughputUndefined,
  NrlUndefined,
  IncompleteMatrix,
  Io,
  BudgetExceeded,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Trace parse failure; `line()` is 1-based.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& why)
      : Error(ErrorCode::MalformedRecord, "malformed trace record at line " + std::to_string(line) + ": " + why),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vmcast
