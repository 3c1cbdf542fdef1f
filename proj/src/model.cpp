#include "shsim/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <system_error>

namespace shsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Smallest N such that "<base>-N" is not taken.
template <class Taken>
std::string fresh_id(std::string_view base, Taken&& taken) {
  for (std::size_t n = 1;; ++n) {
    std::string candidate = std::string(base) + "-" + std::to_string(n);
    if (!taken(candidate)) return candidate;
  }
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<std::string> check_format(const DataFormat& format) {
  return std::visit(
      overloaded{
          [](const NumeralFormat& f) -> std::optional<std::string> {
            if (!std::isfinite(f.min) || !std::isfinite(f.max)) return "numeral bounds must be finite";
            if (!(f.min < f.max)) {
              return "numeral range is empty (min " + format_number(f.min) + " >= max " +
                     format_number(f.max) + ")";
            }
            return std::nullopt;
          },
          [](const MultiStateFormat& f) -> std::optional<std::string> {
            if (f.states.size() < 2) return "multi-state format needs at least 2 states";
            std::set<std::string_view> seen;
            for (const auto& s : f.states) {
              if (s.empty()) return "state names must be non-empty";
              if (!seen.insert(s).second) return "duplicate state name '" + s + "'";
            }
            return std::nullopt;
          },
          [](const PointFormat& f) -> std::optional<std::string> {
            if (!f.bounds) return "point format has no bounds";
            if (!f.bounds->is_proper()) return "point bounds need positive width and height";
            return std::nullopt;
          },
      },
      format);
}

std::optional<std::string> validate_value(const DataFormat& format, const SensorValue& value) {
  if (auto bad = check_format(format)) return "format invalid: " + *bad;
  return std::visit(
      overloaded{
          [](const NumeralFormat& f, const NumberValue& v) -> std::optional<std::string> {
            if (!std::isfinite(v.value)) return "number is not finite";
            if (v.value < f.min || v.value > f.max) {
              return "number " + format_number(v.value) + " outside [" + format_number(f.min) +
                     ", " + format_number(f.max) + "]";
            }
            return std::nullopt;
          },
          [](const MultiStateFormat& f, const StateValue& v) -> std::optional<std::string> {
            if (std::find(f.states.begin(), f.states.end(), v.name) == f.states.end()) {
              return "unknown state '" + v.name + "'";
            }
            return std::nullopt;
          },
          [](const PointFormat& f, const PositionValue& v) -> std::optional<std::string> {
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) return "position is not finite";
            if (!f.bounds->contains({v.x, v.y})) {
              return "position (" + format_number(v.x) + "," + format_number(v.y) +
                     ") outside bounds";
            }
            return std::nullopt;
          },
          [](const auto&, const auto&) -> std::optional<std::string> {
            return std::string("value type does not match the data format");
          },
      },
      format, value);
}

std::string encode_value(const SensorValue& value) {
  return std::visit(overloaded{
                        [](const NumberValue& v) { return format_number(v.value); },
                        [](const StateValue& v) { return v.name; },
                        [](const PositionValue& v) {
                          return format_number(v.x) + "," + format_number(v.y);
                        },
                    },
                    value);
}

std::optional<SensorValue> decode_value(const DataFormat& format, std::string_view text) {
  return std::visit(
      overloaded{
          [&](const NumeralFormat&) -> std::optional<SensorValue> {
            if (auto v = parse_number(text)) return NumberValue{*v};
            return std::nullopt;
          },
          [&](const MultiStateFormat&) -> std::optional<SensorValue> {
            if (text.empty()) return std::nullopt;
            return StateValue{std::string(text)};
          },
          [&](const PointFormat&) -> std::optional<SensorValue> {
            const auto comma = text.find(',');
            if (comma == std::string_view::npos) return std::nullopt;
            auto x = parse_number(text.substr(0, comma));
            auto y = parse_number(text.substr(comma + 1));
            if (!x || !y) return std::nullopt;
            return PositionValue{*x, *y};
          },
      },
      format);
}

const SensorInstance* Device::find_sensor(std::string_view sensor_id) const {
  for (const auto& s : sensors) {
    if (s.id == sensor_id) return &s;
  }
  return nullptr;
}

bool is_safe_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

std::string slugify(std::string_view name, std::string_view fallback) {
  std::string out;
  for (char c : name) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (keep) {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  if (out.empty()) out = fallback;
  return out;
}

// ---------------------------------------------------------------------------

SensorKindId House::add_sensor_kind(std::string name, DataFormat format) {
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "sensor_kind", "name must be non-empty");
  if (auto* point = std::get_if<PointFormat>(&format); point && !point->bounds) {
    point->bounds = plan.bounds;
  }
  if (auto bad = check_format(format)) throw Error(ErrorCode::InvalidFormat, name, *bad);

  auto id = fresh_id(slugify(name, "kind"), [&](const std::string& c) { return find_kind(c); });
  sensor_kinds.push_back({id, std::move(name), std::move(format)});
  return id;
}

DeviceId House::add_device(std::string name, std::span<const SensorKindId> kind_ids,
                           std::string icon_id) {
  if (kind_ids.empty()) throw Error(ErrorCode::EmptySensorList, name, "a device needs at least one sensor");
  Device device;
  for (const auto& kind_id : kind_ids) {
    const SensorKind* kind = find_kind(kind_id);
    if (!kind) throw Error(ErrorCode::UnknownSensorKind, kind_id, "no such sensor kind");
    SensorInstance instance;
    instance.id = fresh_id(slugify(kind->name, "sensor"),
                           [&](const std::string& c) { return device.find_sensor(c); });
    instance.kind = kind_id;
    device.sensors.push_back(std::move(instance));
  }
  device.id = fresh_id(slugify(name, "device"), [&](const std::string& c) { return find_device(c); });
  device.name = std::move(name);
  device.icon_id = std::move(icon_id);
  devices.push_back(std::move(device));
  return devices.back().id;
}

const Placement& House::place_device(const DeviceId& device, Point2 position) {
  if (!find_device(device)) throw Error(ErrorCode::UnknownDevice, device, "no such device");
  if (!plan.bounds.contains(position)) {
    throw Error(ErrorCode::OutOfBounds, device,
                "position (" + format_number(position.x) + "," + format_number(position.y) +
                    ") outside the plan bounds");
  }
  for (auto& p : placements) {
    if (p.device == device) {
      p.position = position;
      return p;
    }
  }
  placements.push_back({device, position});
  return placements.back();
}

DeviceStatus House::set_sensor_value(const DeviceId& device_id, const SensorId& sensor_id,
                                     const SensorValue& value, VirtualTime at) {
  auto dev = std::find_if(devices.begin(), devices.end(),
                          [&](const Device& d) { return d.id == device_id; });
  if (dev == devices.end()) throw Error(ErrorCode::UnknownDevice, device_id, "no such device");
  auto sensor = std::find_if(dev->sensors.begin(), dev->sensors.end(),
                             [&](const SensorInstance& s) { return s.id == sensor_id; });
  if (sensor == dev->sensors.end()) {
    throw Error(ErrorCode::UnknownSensor, device_id + "/" + sensor_id, "no such sensor");
  }
  const SensorKind* kind = find_kind(sensor->kind);
  if (!kind) throw Error(ErrorCode::UnknownSensorKind, sensor->kind, "dangling sensor kind");
  if (auto bad = validate_value(kind->format, value)) {
    throw Error(ErrorCode::InvalidValue, device_id + "/" + sensor_id, *bad);
  }
  if (at < 0) throw Error(ErrorCode::TimestampRegression, device_id + "/" + sensor_id, "negative timestamp");
  if (sensor->last_update && at < *sensor->last_update) {
    throw Error(ErrorCode::TimestampRegression, device_id + "/" + sensor_id,
                "write at " + std::to_string(at) + " precedes last update " +
                    std::to_string(*sensor->last_update));
  }
  sensor->current = value;
  sensor->last_update = at;
  return get_status(device_id);
}

DeviceStatus House::get_status(const DeviceId& device_id) const {
  const Device* dev = find_device(device_id);
  if (!dev) throw Error(ErrorCode::UnknownDevice, device_id, "no such device");
  DeviceStatus status{dev->id, {}};
  status.entries.reserve(dev->sensors.size());
  for (const auto& s : dev->sensors) status.entries.push_back({s.id, s.current, s.last_update});
  return status;
}

const SensorKind* House::find_kind(std::string_view id) const {
  for (const auto& k : sensor_kinds) {
    if (k.id == id) return &k;
  }
  return nullptr;
}

const Device* House::find_device(std::string_view id) const {
  for (const auto& d : devices) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const Placement* House::find_placement(std::string_view device) const {
  for (const auto& p : placements) {
    if (p.device == device) return &p;
  }
  return nullptr;
}

const DataFormat* House::sensor_format(std::string_view device, std::string_view sensor) const {
  const Device* dev = find_device(device);
  if (!dev) return nullptr;
  const SensorInstance* inst = dev->find_sensor(sensor);
  if (!inst) return nullptr;
  const SensorKind* kind = find_kind(inst->kind);
  return kind ? &kind->format : nullptr;
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate_house(const House& house) {
  std::vector<Violation> out;
  auto report = [&](ErrorCode code, std::string entity, std::string message) {
    out.push_back({code, std::move(entity), std::move(message)});
  };

  const HousePlan& plan = house.plan;
  const bool bounds_ok = plan.bounds.is_proper();
  if (!bounds_ok) report(ErrorCode::InvalidArgument, "plan", "plan bounds need positive width and height");

  for (std::size_t i = 0; i < plan.rooms.size(); ++i) {
    const Room& room = plan.rooms[i];
    const std::string entity = "room:" + (room.name.empty() ? std::to_string(i) : room.name);
    if (room.polygon.size() < 3) {
      report(ErrorCode::InvalidArgument, entity, "room polygon needs at least 3 vertices");
      continue;
    }
    if (bounds_ok) {
      for (const auto& v : room.polygon) {
        if (!plan.bounds.contains(v)) {
          report(ErrorCode::OutOfBounds, entity,
                 "vertex (" + format_number(v.x) + "," + format_number(v.y) + ") outside the plan");
          break;
        }
      }
    }
    if (!is_simple_polygon(room.polygon)) {
      report(ErrorCode::InvalidArgument, entity, "room polygon is not simple");
    }
  }

  for (std::size_t i = 0; i < plan.openings.size(); ++i) {
    const Opening& o = plan.openings[i];
    const std::string entity = "opening:" + std::to_string(i);
    if (o.from == o.to) report(ErrorCode::InvalidArgument, entity, "opening has zero length");
    if (bounds_ok && (!plan.bounds.contains(o.from) || !plan.bounds.contains(o.to))) {
      report(ErrorCode::OutOfBounds, entity, "opening endpoint outside the plan");
    }
  }

  if (plan.background && !(plan.background->meters_per_pixel > 0.0 &&
                           std::isfinite(plan.background->meters_per_pixel))) {
    report(ErrorCode::InvalidArgument, "background", "meters_per_pixel must be positive");
  }

  std::set<std::string_view> kind_ids;
  for (const auto& kind : house.sensor_kinds) {
    if (!is_safe_id(kind.id)) report(ErrorCode::InvalidArgument, kind.id, "sensor kind id is not a safe identifier");
    if (!kind_ids.insert(kind.id).second) report(ErrorCode::DuplicateId, kind.id, "duplicate sensor kind id");
    if (kind.name.empty()) report(ErrorCode::InvalidArgument, kind.id, "sensor kind name is empty");
    if (auto bad = check_format(kind.format)) report(ErrorCode::InvalidFormat, kind.id, *bad);
  }

  std::set<std::string_view> device_ids;
  for (const auto& dev : house.devices) {
    if (!is_safe_id(dev.id)) report(ErrorCode::InvalidArgument, dev.id, "device id is not a safe identifier");
    if (!device_ids.insert(dev.id).second) report(ErrorCode::DuplicateId, dev.id, "duplicate device id");
    if (dev.sensors.empty()) report(ErrorCode::EmptySensorList, dev.id, "device has no sensors");
    std::set<std::string_view> sensor_ids;
    for (const auto& s : dev.sensors) {
      const std::string entity = dev.id + "/" + s.id;
      if (!is_safe_id(s.id)) report(ErrorCode::InvalidArgument, entity, "sensor id is not a safe identifier");
      if (!sensor_ids.insert(s.id).second) report(ErrorCode::DuplicateId, entity, "duplicate sensor id");
      const SensorKind* kind = house.find_kind(s.kind);
      if (!kind) {
        report(ErrorCode::UnknownSensorKind, entity, "references unknown sensor kind '" + s.kind + "'");
        continue;
      }
      if (s.current.has_value() != s.last_update.has_value()) {
        report(ErrorCode::InvalidValue, entity, "value and last_update must be set together");
      }
      if (s.current) {
        if (auto bad = validate_value(kind->format, *s.current)) {
          report(ErrorCode::InvalidValue, entity, *bad);
        }
      }
    }
  }

  std::set<std::string_view> placed;
  for (const auto& p : house.placements) {
    const std::string entity = "placement:" + p.device;
    if (!house.find_device(p.device)) {
      report(ErrorCode::UnknownDevice, entity, "placement references unknown device");
    }
    if (!placed.insert(p.device).second) {
      report(ErrorCode::DuplicateId, entity, "device placed more than once");
    }
    if (bounds_ok && !plan.bounds.contains(p.position)) {
      report(ErrorCode::OutOfBounds, entity,
             "position (" + format_number(p.position.x) + "," + format_number(p.position.y) +
                 ") outside the plan");
    }
  }
  return out;
}

}  // namespace shsim
