#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shsim/error.hpp"
#include "shsim/geometry.hpp"
#include "shsim/time.hpp"

namespace shsim {

using SensorKindId = std::string;
using DeviceId = std::string;
using SensorId = std::string;

// ---------------------------------------------------------------------------
// Data formats and values

struct NumeralFormat {
  double min = 0.0;
  double max = 0.0;
  std::string unit;

  bool operator==(const NumeralFormat&) const = default;
};

struct MultiStateFormat {
  std::vector<std::string> states;

  bool operator==(const MultiStateFormat&) const = default;
};

// Bounds left empty at creation are resolved to the house plan bounds.
struct PointFormat {
  std::optional<Rect> bounds;

  bool operator==(const PointFormat&) const = default;
};

using DataFormat = std::variant<NumeralFormat, MultiStateFormat, PointFormat>;

struct NumberValue {
  double value = 0.0;
  bool operator==(const NumberValue&) const = default;
};

struct StateValue {
  std::string name;
  bool operator==(const StateValue&) const = default;
};

struct PositionValue {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PositionValue&) const = default;
};

using SensorValue = std::variant<NumberValue, StateValue, PositionValue>;

/// Returns a description of the first broken format invariant, if any.
std::optional<std::string> check_format(const DataFormat& format);

/// Total check of a value against a format. Ranges and bounds are inclusive;
/// state names compare case-sensitively.
std::optional<std::string> validate_value(const DataFormat& format, const SensorValue& value);

/// Text form used on the wire and in event logs: numbers in shortest
/// round-trip notation, state names verbatim, positions as `x,y`.
std::string encode_value(const SensorValue& value);

/// Parses value text in the shape dictated by `format`. Does not range-check.
std::optional<SensorValue> decode_value(const DataFormat& format, std::string_view text);

std::string format_number(double v);

// ---------------------------------------------------------------------------
// Catalog entities

struct SensorKind {
  SensorKindId id;
  std::string name;
  DataFormat format;

  bool operator==(const SensorKind&) const = default;
};

struct SensorInstance {
  SensorId id;
  SensorKindId kind;
  std::optional<SensorValue> current;
  std::optional<VirtualTime> last_update;

  bool operator==(const SensorInstance&) const = default;
};

struct Device {
  DeviceId id;
  std::string name;
  std::string icon_id;
  std::vector<SensorInstance> sensors;

  const SensorInstance* find_sensor(std::string_view sensor_id) const;
  bool operator==(const Device&) const = default;
};

struct Room {
  std::string name;
  std::vector<Point2> polygon;

  bool operator==(const Room&) const = default;
};

enum class OpeningKind { Door, Window };

struct Opening {
  OpeningKind kind = OpeningKind::Door;
  Point2 from;
  Point2 to;

  bool operator==(const Opening&) const = default;
};

struct BackgroundImage {
  std::string image_path;
  double meters_per_pixel = 1.0;

  bool operator==(const BackgroundImage&) const = default;
};

struct HousePlan {
  Rect bounds{{0.0, 0.0}, {10.0, 10.0}};
  std::vector<Room> rooms;
  std::vector<Opening> openings;
  std::optional<BackgroundImage> background;

  bool operator==(const HousePlan&) const = default;
};

struct Placement {
  DeviceId device;
  Point2 position;

  bool operator==(const Placement&) const = default;
};

struct SensorStatus {
  SensorId sensor_id;
  std::optional<SensorValue> value;
  std::optional<VirtualTime> last_update;

  bool operator==(const SensorStatus&) const = default;
};

struct DeviceStatus {
  DeviceId device_id;
  std::vector<SensorStatus> entries;

  bool operator==(const DeviceStatus&) const = default;
};

// ---------------------------------------------------------------------------
// House

// Plain value type. Mutating members enforce the invariants; the public
// fields exist so persistence (and tests) can assemble arbitrary houses that
// validate_house then judges.
struct House {
  HousePlan plan;
  std::vector<SensorKind> sensor_kinds;
  std::vector<Device> devices;
  std::vector<Placement> placements;

  SensorKindId add_sensor_kind(std::string name, DataFormat format);

  DeviceId add_device(std::string name, std::span<const SensorKindId> kind_ids,
                      std::string icon_id);

  const Placement& place_device(const DeviceId& device, Point2 position);

  DeviceStatus set_sensor_value(const DeviceId& device, const SensorId& sensor,
                                const SensorValue& value, VirtualTime at);

  DeviceStatus get_status(const DeviceId& device) const;

  const SensorKind* find_kind(std::string_view id) const;
  const Device* find_device(std::string_view id) const;
  const Placement* find_placement(std::string_view device) const;

  /// Format of a device's sensor, or nullptr when either reference dangles.
  const DataFormat* sensor_format(std::string_view device, std::string_view sensor) const;

  bool operator==(const House&) const = default;
};

std::vector<Violation> validate_house(const House& house);

// Identifier helpers shared by every catalog.
bool is_safe_id(std::string_view id);
std::string slugify(std::string_view name, std::string_view fallback);

}  // namespace shsim
