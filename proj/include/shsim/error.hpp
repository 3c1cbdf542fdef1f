#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace shsim {

enum class ErrorCode {
  InvalidArgument,
  InvalidFormat,
  InvalidValue,
  DuplicateId,
  UnknownSensorKind,
  EmptySensorList,
  UnknownDevice,
  UnknownSensor,
  UnknownTask,
  UnknownScenario,
  UnknownTarget,
  OutOfBounds,
  TimestampRegression,
  ClockRegression,
  CycleDetected,
  NegativeDelay,
  MalformedLine,
  Unreachable,
  IoFailure,
  SchemaViolation,
  UnsupportedVersion,
  BindFailure,
};

std::string_view to_string(ErrorCode code);

// Every failure carries the offending entity (an id, a document path, or a
// wire field) so diagnostics can name it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string entity, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " [" + entity + "]: " + message),
        code_(code),
        entity_(std::move(entity)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& entity() const noexcept { return entity_; }

 private:
  ErrorCode code_;
  std::string entity_;
};

struct Violation {
  ErrorCode code;
  std::string entity;
  std::string message;

  bool operator==(const Violation&) const = default;
  std::string describe() const;
};

}  // namespace shsim
