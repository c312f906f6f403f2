#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ofdmsense/core/error.hpp"

namespace ofdmsense::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Errors in user-supplied configuration; the CLI maps this stage to exit code 2.
inline Error config_error(const std::string& detail) {
  return Error(ErrorCode::ConfigMismatch, detail).with_stage("config");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, what + ": " + e.what());
  }
}

/// Reads a configuration file; every failure is a config error.
inline json read_config_file(const std::filesystem::path& path) {
  try {
    return parse_json(read_text(path), path.string());
  } catch (const Error& e) {
    throw Error(e.code(), e.detail()).with_stage("config");
  }
}

/// Rejects keys outside `known`, naming the first offender.
inline void require_known_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw config_error(where + ": unknown key '" + key + "'");
  }
}

/// Typed field access with the field named in any error.
template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw config_error(where + ": missing field '" + std::string(key) + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": field '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key, where);
}

inline void check_schema_version(const json& j, const std::string& where) {
  const int v = field<int>(j, "schema_version", where);
  if (v != kSchemaVersion)
    throw config_error(where + ": field 'schema_version' is " + std::to_string(v) + ", expected " +
                       std::to_string(kSchemaVersion));
}

/// +inf (no noise) is stored as null.
inline json snr_to_json(double snr_db) { return std::isfinite(snr_db) ? json(snr_db) : json(nullptr); }

}  // namespace ofdmsense::io
