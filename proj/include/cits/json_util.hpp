#pragma once

// Thin helpers over nlohmann::json that turn missing keys and type mismatches
// into ParseError with a location prefix.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "cits/errors.hpp"
#include "json.hpp"

namespace cits::json {

using JsonValue = nlohmann::json;

template <typename T>
T convert(const JsonValue& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

template <typename T>
T get_req(const JsonValue& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where + ": missing '" + key + "'");
  }
  return convert<T>(j.at(key), where + "." + key);
}

template <typename T>
std::optional<T> get_opt(const JsonValue& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return convert<T>(j.at(key), where + "." + key);
}

inline const JsonValue& array_or_empty(const JsonValue& j, const char* key,
                                       const std::string& where) {
  static const JsonValue empty = JsonValue::array();
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return empty;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ParseError(where + ": '" + key + "' must be an array");
  return v;
}

inline const JsonValue& require_object(const JsonValue& j, const char* key,
                                       const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_object()) throw ParseError(where + ": '" + key + "' must be an object");
  return v;
}

inline JsonValue parse_text(std::string_view text, const std::string& what) {
  try {
    return JsonValue::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": malformed JSON: " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cits::json
