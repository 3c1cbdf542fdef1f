#include "shsim/error.hpp"

namespace shsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidFormat: return "InvalidFormat";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownSensorKind: return "UnknownSensorKind";
    case ErrorCode::EmptySensorList: return "EmptySensorList";
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::TimestampRegression: return "TimestampRegression";
    case ErrorCode::ClockRegression: return "ClockRegression";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NegativeDelay: return "NegativeDelay";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::BindFailure: return "BindFailure";
  }
  return "Unknown";
}

std::string Violation::describe() const {
  return std::string(to_string(code)) + " [" + entity + "]: " + message;
}

}  // namespace shsim
