#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shsim/engine.hpp"
#include "shsim/project.hpp"

namespace shsim {

inline constexpr int kSchemaVersion = 1;

// Canonical JSON: sorted keys, definition-ordered lists, geometry rounded to
// millimetres, timestamps in ISO-8601 UTC.
nlohmann::json project_to_json(const Project& project);

/// Strict reader: unknown or missing fields raise Error{SchemaViolation}
/// whose entity is the JSON pointer of the offending field.
Project project_from_json(const nlohmann::json& doc);

std::string serialize_project(const Project& project);

/// Parses and fully validates a project document.
Project parse_project(std::string_view text);

/// Refuses invalid projects before touching the file.
void save_project(const Project& project, const std::filesystem::path& path);

Project load_project(const std::filesystem::path& path);

enum class LogFormat { Csv, Jsonl };

struct EventLogRecord {
  VirtualTime fire_time_ms = 0;
  std::uint64_t seq = 0;
  std::string object_id;
  std::string sensor_id;
  std::string value;
  std::string outcome;
  std::string provenance;

  bool operator==(const EventLogRecord&) const = default;
};

EventLogRecord to_record(const LogEntry& entry);

std::string render_event_log(std::span<const LogEntry> log, LogFormat format);

/// Writes the log and returns the number of event rows.
std::size_t export_event_log(std::span<const LogEntry> log, const std::filesystem::path& path,
                             LogFormat format);

std::vector<EventLogRecord> parse_event_log(std::string_view text, LogFormat format);

}  // namespace shsim
