#include "shsim/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace shsim {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, path.empty() ? "/" : path, message);
}

// Millimetre rounding for canonical geometry.
double mm(double v) {
  const double r = std::round(v * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;
}

// ---- writing --------------------------------------------------------------

json point_json(Point2 p) { return json::array({mm(p.x), mm(p.y)}); }

json rect_json(const Rect& r) { return {{"min", point_json(r.min)}, {"max", point_json(r.max)}}; }

json format_json(const DataFormat& f, const Rect& plan_bounds) {
  return std::visit(overloaded{
                        [](const NumeralFormat& n) -> json {
                          return {{"type", "numeral"}, {"min", n.min}, {"max", n.max}, {"unit", n.unit}};
                        },
                        [](const MultiStateFormat& m) -> json {
                          return {{"type", "multi_state"}, {"states", m.states}};
                        },
                        [&](const PointFormat& p) -> json {
                          return {{"type", "point"}, {"bounds", rect_json(p.bounds.value_or(plan_bounds))}};
                        },
                    },
                    f);
}

json value_json(const SensorValue& v) {
  return std::visit(overloaded{
                        [](const NumberValue& n) -> json { return {{"type", "number"}, {"value", n.value}}; },
                        [](const StateValue& s) -> json { return {{"type", "state"}, {"name", s.name}}; },
                        [](const PositionValue& p) -> json {
                          return {{"type", "position"}, {"x", p.x}, {"y", p.y}};
                        },
                    },
                    v);
}

// ---- reading --------------------------------------------------------------

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  Reader object(std::initializer_list<std::string_view> allowed) const {
    if (!j_.is_object()) schema_error(path_, "expected an object");
    for (const auto& [key, _] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        schema_error(path_ + "/" + key, "unknown field");
      }
    }
    return *this;
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  Reader at(std::string_view key) const {
    const std::string k(key);
    if (!j_.contains(k)) schema_error(path_ + "/" + k, "missing field");
    return Reader(j_.at(k), path_ + "/" + k);
  }

  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "/" + std::to_string(i)); }

  std::size_t size() const {
    if (!j_.is_array()) schema_error(path_, "expected an array");
    return j_.size();
  }

  std::string str() const {
    if (!j_.is_string()) schema_error(path_, "expected a string");
    return j_.get<std::string>();
  }

  double number() const {
    if (!j_.is_number()) schema_error(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) schema_error(path_, "number is not finite");
    return v;
  }

  std::int64_t integer() const {
    if (!j_.is_number_integer()) schema_error(path_, "expected an integer");
    return j_.get<std::int64_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) schema_error(path_, "expected a boolean");
    return j_.get<bool>();
  }

  WallTime datetime() const {
    auto t = parse_iso8601(str());
    if (!t) schema_error(path_, "expected an ISO-8601 UTC datetime (YYYY-MM-DDTHH:MM:SS[.mmm]Z)");
    return *t;
  }

  Point2 point() const {
    if (size() != 2) schema_error(path_, "expected [x, y]");
    return {at(std::size_t{0}).number(), at(std::size_t{1}).number()};
  }

  Rect rect() const {
    const auto r = object({"min", "max"});
    return {r.at("min").point(), r.at("max").point()};
  }

 private:
  const json& j_;
  std::string path_;
};

DataFormat read_format(const Reader& r) {
  const auto type = r.at("type").str();
  if (type == "numeral") {
    const auto o = r.object({"type", "min", "max", "unit"});
    return NumeralFormat{o.at("min").number(), o.at("max").number(), o.has("unit") ? o.at("unit").str() : ""};
  }
  if (type == "multi_state") {
    const auto o = r.object({"type", "states"});
    const auto states = o.at("states");
    MultiStateFormat f;
    for (std::size_t i = 0; i < states.size(); ++i) f.states.push_back(states.at(i).str());
    return f;
  }
  if (type == "point") {
    const auto o = r.object({"type", "bounds"});
    PointFormat f;
    if (o.has("bounds")) f.bounds = o.at("bounds").rect();
    return f;
  }
  schema_error(r.path() + "/type", "unknown data format '" + type + "'");
}

SensorValue read_value(const Reader& r) {
  const auto type = r.at("type").str();
  if (type == "number") return NumberValue{r.object({"type", "value"}).at("value").number()};
  if (type == "state") return StateValue{r.object({"type", "name"}).at("name").str()};
  if (type == "position") {
    const auto o = r.object({"type", "x", "y"});
    return PositionValue{o.at("x").number(), o.at("y").number()};
  }
  schema_error(r.path() + "/type", "unknown value type '" + type + "'");
}

HousePlan read_plan(const Reader& r) {
  const auto o = r.object({"bounds", "rooms", "openings", "background"});
  HousePlan plan;
  plan.bounds = o.at("bounds").rect();
  if (o.has("rooms")) {
    const auto rooms = o.at("rooms");
    for (std::size_t i = 0; i < rooms.size(); ++i) {
      const auto room = rooms.at(i).object({"name", "polygon"});
      Room out{room.at("name").str(), {}};
      const auto poly = room.at("polygon");
      for (std::size_t k = 0; k < poly.size(); ++k) out.polygon.push_back(poly.at(k).point());
      plan.rooms.push_back(std::move(out));
    }
  }
  if (o.has("openings")) {
    const auto openings = o.at("openings");
    for (std::size_t i = 0; i < openings.size(); ++i) {
      const auto op = openings.at(i).object({"kind", "from", "to"});
      const auto kind = op.at("kind").str();
      if (kind != "door" && kind != "window") schema_error(op.path() + "/kind", "expected door or window");
      plan.openings.push_back({kind == "door" ? OpeningKind::Door : OpeningKind::Window, op.at("from").point(),
                               op.at("to").point()});
    }
  }
  if (o.has("background")) {
    const auto bg = o.at("background").object({"image_path", "meters_per_pixel"});
    plan.background = BackgroundImage{bg.at("image_path").str(), bg.at("meters_per_pixel").number()};
  }
  return plan;
}

House read_house(const Reader& r) {
  const auto o = r.object({"plan", "sensor_kinds", "devices", "placements"});
  House house;
  house.plan = read_plan(o.at("plan"));
  if (o.has("sensor_kinds")) {
    const auto kinds = o.at("sensor_kinds");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const auto k = kinds.at(i).object({"id", "name", "format"});
      DataFormat format = read_format(k.at("format"));
      if (auto* point = std::get_if<PointFormat>(&format); point && !point->bounds) {
        point->bounds = house.plan.bounds;
      }
      house.sensor_kinds.push_back({k.at("id").str(), k.at("name").str(), std::move(format)});
    }
  }
  if (o.has("devices")) {
    const auto devices = o.at("devices");
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const auto d = devices.at(i).object({"id", "name", "icon_id", "sensors"});
      Device dev{d.at("id").str(), d.at("name").str(), d.has("icon_id") ? d.at("icon_id").str() : "", {}};
      const auto sensors = d.at("sensors");
      for (std::size_t k = 0; k < sensors.size(); ++k) {
        const auto s = sensors.at(k).object({"id", "kind"});
        dev.sensors.push_back({s.at("id").str(), s.at("kind").str(), std::nullopt, std::nullopt});
      }
      house.devices.push_back(std::move(dev));
    }
  }
  if (o.has("placements")) {
    const auto placements = o.at("placements");
    for (std::size_t i = 0; i < placements.size(); ++i) {
      const auto p = placements.at(i).object({"device", "position"});
      house.placements.push_back({p.at("device").str(), p.at("position").point()});
    }
  }
  return house;
}

Schedule read_schedule(const Reader& root) {
  Schedule schedule;
  if (root.has("tasks")) {
    const auto tasks = root.at("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto t = tasks.at(i).object({"id", "name", "action", "absolute_time"});
      const auto a = t.at("action").object({"device", "sensor", "value"});
      ScheduledTask task{t.at("id").str(), t.at("name").str(),
                         TaskAction{a.at("device").str(), a.at("sensor").str(), read_value(a.at("value"))},
                         std::nullopt};
      if (t.has("absolute_time")) task.absolute_time = t.at("absolute_time").datetime();
      schedule.tasks.push_back(std::move(task));
    }
  }
  if (root.has("scenarios")) {
    const auto scenarios = root.at("scenarios");
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const auto s = scenarios.at(i).object({"id", "name", "first_time", "repeat_ms", "enabled", "entries"});
      Scenario sc{s.at("id").str(), s.at("name").str(), s.at("first_time").datetime(), std::nullopt,
                  s.has("enabled") ? s.at("enabled").boolean() : true, {}};
      if (s.has("repeat_ms")) sc.repeat_ms = s.at("repeat_ms").integer();
      const auto entries = s.at("entries");
      for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto e = entries.at(k).object({"delay_ms", "task", "scenario"});
        ScenarioEntry entry;
        entry.delay_ms = e.at("delay_ms").integer();
        if (e.has("task") == e.has("scenario")) {
          schema_error(e.path(), "entry needs exactly one of 'task' or 'scenario'");
        }
        if (e.has("task")) {
          entry.target = TaskRef{e.at("task").str()};
        } else {
          entry.target = ScenarioRef{e.at("scenario").str()};
        }
        sc.entries.push_back(std::move(entry));
      }
      schedule.scenarios.push_back(std::move(sc));
    }
  }
  return schedule;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits CSV text into rows of fields, honouring quoted fields.
std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    row_started = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      row_started = false;
    } else {
      field += c;
    }
  }
  if (row_started) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

constexpr const char* kLogColumns[] = {"fire_time_ms", "seq",     "object_id", "sensor_id",
                                       "value",        "outcome", "provenance"};

}  // namespace

json project_to_json(const Project& project) {
  const House& house = project.house;
  json plan = {{"bounds", rect_json(house.plan.bounds)}, {"rooms", json::array()}, {"openings", json::array()}};
  for (const auto& room : house.plan.rooms) {
    json poly = json::array();
    for (const auto& v : room.polygon) poly.push_back(point_json(v));
    plan["rooms"].push_back({{"name", room.name}, {"polygon", poly}});
  }
  for (const auto& o : house.plan.openings) {
    plan["openings"].push_back({{"kind", o.kind == OpeningKind::Door ? "door" : "window"},
                                {"from", point_json(o.from)},
                                {"to", point_json(o.to)}});
  }
  if (house.plan.background) {
    plan["background"] = {{"image_path", house.plan.background->image_path},
                          {"meters_per_pixel", house.plan.background->meters_per_pixel}};
  }

  json kinds = json::array();
  for (const auto& k : house.sensor_kinds) {
    kinds.push_back({{"id", k.id}, {"name", k.name}, {"format", format_json(k.format, house.plan.bounds)}});
  }
  json devices = json::array();
  for (const auto& d : house.devices) {
    json sensors = json::array();
    for (const auto& s : d.sensors) sensors.push_back({{"id", s.id}, {"kind", s.kind}});
    devices.push_back({{"id", d.id}, {"name", d.name}, {"icon_id", d.icon_id}, {"sensors", sensors}});
  }
  json placements = json::array();
  for (const auto& p : house.placements) {
    placements.push_back({{"device", p.device}, {"position", point_json(p.position)}});
  }

  json tasks = json::array();
  for (const auto& t : project.schedule.tasks) {
    json task = {{"id", t.id},
                 {"name", t.name},
                 {"action", {{"device", t.action.device}, {"sensor", t.action.sensor}, {"value", value_json(t.action.value)}}}};
    if (t.absolute_time) task["absolute_time"] = format_iso8601(*t.absolute_time);
    tasks.push_back(std::move(task));
  }
  json scenarios = json::array();
  for (const auto& s : project.schedule.scenarios) {
    json entries = json::array();
    for (const auto& e : s.entries) {
      json entry = {{"delay_ms", e.delay_ms}};
      if (const auto* t = std::get_if<TaskRef>(&e.target)) {
        entry["task"] = t->id;
      } else {
        entry["scenario"] = std::get<ScenarioRef>(e.target).id;
      }
      entries.push_back(std::move(entry));
    }
    json scenario = {{"id", s.id},
                     {"name", s.name},
                     {"first_time", format_iso8601(s.first_time)},
                     {"enabled", s.enabled},
                     {"entries", entries}};
    if (s.repeat_ms) scenario["repeat_ms"] = *s.repeat_ms;
    scenarios.push_back(std::move(scenario));
  }

  return {{"schema_version", kSchemaVersion},
          {"epoch", format_iso8601(project.epoch)},
          {"house", {{"plan", plan}, {"sensor_kinds", kinds}, {"devices", devices}, {"placements", placements}}},
          {"tasks", tasks},
          {"scenarios", scenarios}};
}

Project project_from_json(const json& doc) {
  const Reader root(doc, "");
  if (!doc.is_object()) schema_error("/", "expected an object");
  const auto version = root.at("schema_version").integer();
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "/schema_version",
                "schema_version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kSchemaVersion) + ")");
  }
  const auto o = root.object({"schema_version", "epoch", "house", "tasks", "scenarios"});
  Project project;
  project.epoch = o.at("epoch").datetime();
  project.house = read_house(o.at("house"));
  project.schedule = read_schedule(o);
  return project;
}

std::string serialize_project(const Project& project) {
  return project_to_json(project).dump(2) + "\n";
}

Project parse_project(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    schema_error("/", std::string("not valid JSON: ") + e.what());
  }
  Project project = project_from_json(doc);
  if (auto violations = validate_project(project); !violations.empty()) {
    const auto& v = violations.front();
    throw Error(v.code, v.entity, v.message);
  }
  return project;
}

void save_project(const Project& project, const std::filesystem::path& path) {
  if (auto violations = validate_project(project); !violations.empty()) {
    const auto& v = violations.front();
    throw Error(v.code, v.entity, "refusing to save: " + v.message);
  }
  const std::string text = serialize_project(project);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), "cannot open for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoFailure, path.string(), "write failed");
}

Project load_project(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, path.string(), "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_project(buf.str());
}

// ---------------------------------------------------------------------------

EventLogRecord to_record(const LogEntry& e) {
  return {e.fire_time, e.seq, e.device, e.sensor, e.value, e.outcome_text(), e.provenance.to_string()};
}

std::string render_event_log(std::span<const LogEntry> log, LogFormat format) {
  std::string out;
  if (format == LogFormat::Csv) {
    for (std::size_t i = 0; i < std::size(kLogColumns); ++i) {
      if (i) out += ',';
      out += kLogColumns[i];
    }
    out += '\n';
    for (const auto& entry : log) {
      const auto r = to_record(entry);
      out += std::to_string(r.fire_time_ms) + "," + std::to_string(r.seq) + "," + csv_field(r.object_id) + "," +
             csv_field(r.sensor_id) + "," + csv_field(r.value) + "," + csv_field(r.outcome) + "," +
             csv_field(r.provenance) + "\n";
    }
    return out;
  }
  for (const auto& entry : log) {
    const auto r = to_record(entry);
    nlohmann::ordered_json line;
    line["fire_time_ms"] = r.fire_time_ms;
    line["seq"] = r.seq;
    line["object_id"] = r.object_id;
    line["sensor_id"] = r.sensor_id;
    line["value"] = r.value;
    line["outcome"] = r.outcome;
    line["provenance"] = r.provenance;
    out += line.dump() + "\n";
  }
  return out;
}

std::size_t export_event_log(std::span<const LogEntry> log, const std::filesystem::path& path,
                             LogFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), "cannot open for writing");
  out << render_event_log(log, format);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, path.string(), "write failed");
  return log.size();
}

std::vector<EventLogRecord> parse_event_log(std::string_view text, LogFormat format) {
  std::vector<EventLogRecord> out;
  auto bad = [](std::size_t row, const std::string& why) -> Error {
    return Error(ErrorCode::SchemaViolation, "row " + std::to_string(row), why);
  };
  if (format == LogFormat::Csv) {
    const auto rows = csv_rows(text);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& f = rows[i];
      if (f.size() != std::size(kLogColumns)) throw bad(i, "expected 7 columns");
      try {
        out.push_back({std::stoll(f[0]), std::stoull(f[1]), f[2], f[3], f[4], f[5], f[6]});
      } catch (const std::logic_error&) {
        throw bad(i, "bad number");
      }
    }
    return out;
  }
  std::size_t row = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("fire_time_ms").get<VirtualTime>(), j.at("seq").get<std::uint64_t>(),
                     j.at("object_id").get<std::string>(), j.at("sensor_id").get<std::string>(),
                     j.at("value").get<std::string>(), j.at("outcome").get<std::string>(),
                     j.at("provenance").get<std::string>()});
    } catch (const json::exception& e) {
      throw bad(row, e.what());
    }
  }
  return out;
}

}  // namespace shsim
