#include "shsim/wire.hpp"

#include <cstdint>

#include "shsim/error.hpp"

namespace shsim::wire {

namespace {

[[noreturn]] void malformed(std::string_view what) {
  throw Error(ErrorCode::MalformedLine, "wire", std::string(what));
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = line.find('|', start);
    if (bar == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, bar - start));
    start = bar + 1;
  }
}

// Strips the terminator and checks the record-level rules shared by both
// decoders. Returns the unescaped fields after the tag.
std::vector<std::string> record_fields(std::string_view line, std::string_view tag, std::size_t count) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.empty()) malformed("empty line");
  if (line.find('\n') != std::string_view::npos) malformed("embedded newline");
  if (!is_valid_utf8(line)) malformed("invalid UTF-8");

  const auto raw = split_fields(line);
  if (raw.front() != tag) malformed("expected tag " + std::string(tag));
  if (raw.size() != count + 1) {
    malformed("expected " + std::to_string(count) + " fields, got " + std::to_string(raw.size() - 1));
  }
  std::vector<std::string> fields;
  fields.reserve(count);
  for (std::size_t i = 1; i < raw.size(); ++i) {
    auto text = unescape_field(raw[i]);
    if (!text) malformed("bad escape in field " + std::to_string(i));
    fields.push_back(std::move(*text));
  }
  return fields;
}

WallTime timestamp_field(const std::string& text) {
  auto t = parse_iso8601(text);
  if (!t) malformed("bad timestamp '" + text + "'");
  return *t;
}

void require_id(const std::string& text, std::string_view name) {
  if (text.empty()) malformed(std::string(name) + " is empty");
}

}  // namespace

std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '|': out += "\\p"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::optional<std::string> unescape_field(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    const char c = escaped[i];
    if (c == '|' || c == '\n') return std::nullopt;
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i == escaped.size()) return std::nullopt;
    switch (escaped[i]) {
      case '\\': out.push_back('\\'); break;
      case 'p': out.push_back('|'); break;
      case 'n': out.push_back('\n'); break;
      default: return std::nullopt;
    }
  }
  return out;
}

std::string encode_status_packet(const StatusPacket& p) {
  return "STAT|" + escape_field(p.object_id) + "|" + escape_field(p.sensor_id) + "|" +
         escape_field(p.sensor_value) + "|" + format_iso8601(p.timestamp) + "\n";
}

std::string encode_command(const RemoteCommand& c) {
  return "CMD|" + escape_field(c.command_id) + "|" + escape_field(c.object_id) + "|" +
         escape_field(c.sensor_id) + "|" + escape_field(c.value) + "|" + format_iso8601(c.issued_at) + "\n";
}

StatusPacket decode_status_packet(std::string_view line) {
  auto f = record_fields(line, "STAT", 4);
  require_id(f[0], "object_id");
  require_id(f[1], "sensor_id");
  return StatusPacket{std::move(f[0]), std::move(f[1]), std::move(f[2]), timestamp_field(f[3])};
}

RemoteCommand decode_command(std::string_view line) {
  auto f = record_fields(line, "CMD", 5);
  require_id(f[0], "command_id");
  require_id(f[1], "object_id");
  require_id(f[2], "sensor_id");
  return RemoteCommand{std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3]),
                       timestamp_field(f[4])};
}

std::string encode_poll(std::string_view session_id) {
  return "POLL|" + escape_field(session_id) + "\n";
}

std::vector<std::string_view> split_lines(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < body.size()) {
    const auto nl = body.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(body.substr(start));
      break;
    }
    out.push_back(body.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

}  // namespace shsim::wire
