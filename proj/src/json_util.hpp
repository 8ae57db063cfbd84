#pragma once

// Internal JSON helpers shared by the serialization code. Public headers stay
// free of the json dependency; modules expose string/path based functions.

#include "blendplan/errors.hpp"

#include <json.hpp>

#include <string>

namespace blendplan::detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded())
    fail(ErrorCode::ParseError, "malformed JSON in " + what);
  return j;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline const Json& require(const Json& j, const std::string& key,
                           const std::string& what) {
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::ParseError, what + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const Json& j, const std::string& key,
                                  const std::string& what) {
  const Json& v = require(j, key, what);
  if (!v.is_string())
    fail(ErrorCode::ParseError, what + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::int64_t require_int(const Json& j, const std::string& key,
                                const std::string& what) {
  const Json& v = require(j, key, what);
  if (!v.is_number_integer())
    fail(ErrorCode::ParseError,
         what + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace blendplan::detail
