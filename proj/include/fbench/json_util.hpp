#pragma once
// JSON helpers shared by the catalog, run-config, episode and wire formats.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fbench/geometry.hpp"

namespace fbench {

using Json = nlohmann::json;

/// Schema/validation failure while decoding a document. `where` is a JSON
/// pointer or "line N" locator.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json quat_to_json(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

inline Json pose_to_json(const Pose& p) {
  return Json{{"position", vec3_to_json(p.position)}, {"orientation", quat_to_json(p.orientation)}};
}

inline double number_at(const Json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where, "expected a number");
  return j.get<double>();
}

inline Vec3 vec3_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw FormatError(where, "expected an array of 3 numbers");
  return {number_at(j[0], where + "/0"), number_at(j[1], where + "/1"), number_at(j[2], where + "/2")};
}

/// Reads (w,x,y,z). Components are stored exactly; callers decide whether to renormalize.
inline Quat quat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw FormatError(where, "expected quaternion [w,x,y,z]");
  Quat q(number_at(j[0], where + "/0"), number_at(j[1], where + "/1"), number_at(j[2], where + "/2"),
         number_at(j[3], where + "/3"));
  const double n = q.norm();
  if (!(n > 0.5 && n < 1.5)) throw FormatError(where, "quaternion is not unit length");
  return q;
}

inline void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw FormatError(where, "unknown key '" + key + "'");
  }
}

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw FormatError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(where, "missing key '" + key + "'");
  return *it;
}

inline Pose pose_from_json(const Json& j, const std::string& where) {
  require_keys(j, {"position", "orientation"}, where);
  return {vec3_from_json(field(j, "position", where), where + "/position"),
          quat_from_json(field(j, "orientation", where), where + "/orientation")};
}

inline double get_number(const Json& j, const std::string& key, const std::string& where) {
  return number_at(field(j, key, where), where + "/" + key);
}

inline std::string get_string(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw FormatError(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

inline int get_int(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) throw FormatError(where + "/" + key, "expected an integer");
  return v.get<int>();
}

/// 1-based line number of a byte offset, for parse diagnostics.
inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

/// Parse with line information in the error message.
inline Json parse_json_text(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    throw FormatError(source + ":line " + std::to_string(line_of_offset(text, byte)), "parse error");
  }
}

}  // namespace fbench
