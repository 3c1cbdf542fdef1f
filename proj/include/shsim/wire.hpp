#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shsim/time.hpp"

namespace shsim::wire {

// Line grammar (UTF-8, one record per line):
//   STAT|<object_id>|<sensor_id>|<value>|<timestamp>\n
//   CMD|<command_id>|<object_id>|<sensor_id>|<value>|<issued_at>\n
//   POLL|<session_id>\n          -> zero or more CMD lines, then END\n
// Field escapes: `\` -> `\\`, `|` -> `\p`, newline -> `\n`.

struct StatusPacket {
  std::string object_id;
  std::string sensor_id;
  std::string sensor_value;
  WallTime timestamp{};

  bool operator==(const StatusPacket&) const = default;
};

struct RemoteCommand {
  std::string command_id;
  std::string object_id;
  std::string sensor_id;
  std::string value;
  WallTime issued_at{};

  bool operator==(const RemoteCommand&) const = default;
};

std::string escape_field(std::string_view raw);
std::optional<std::string> unescape_field(std::string_view escaped);

std::string encode_status_packet(const StatusPacket& packet);
std::string encode_command(const RemoteCommand& command);

// Both throw Error{MalformedLine} on any deviation from the grammar.
StatusPacket decode_status_packet(std::string_view line);
RemoteCommand decode_command(std::string_view line);

std::string encode_poll(std::string_view session_id);

/// Splits a body into lines without their terminators; a trailing partial
/// line is kept.
std::vector<std::string_view> split_lines(std::string_view body);

bool is_valid_utf8(std::string_view text);

}  // namespace shsim::wire
