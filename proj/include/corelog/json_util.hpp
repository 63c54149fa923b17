#pragma once

#include <json.hpp>

#include "corelog/result.hpp"
#include "corelog/time.hpp"
#include "corelog/value.hpp"

namespace corelog {

inline nlohmann::json value_to_json(const AttributeValue& v) {
  switch (v.kind()) {
    case AttributeValue::Kind::Null: return nullptr;
    case AttributeValue::Kind::Boolean: return v.as_boolean();
    case AttributeValue::Kind::Integer: return v.as_integer();
    case AttributeValue::Kind::Real: return v.as_real();
    case AttributeValue::Kind::Text: return v.as_text();
  }
  return nullptr;
}

inline Result<AttributeValue> json_to_value(const nlohmann::json& j, const std::string& path) {
  if (j.is_null()) return AttributeValue(nullptr);
  if (j.is_boolean()) return AttributeValue(j.get<bool>());
  if (j.is_number_integer()) return AttributeValue(j.get<std::int64_t>());
  if (j.is_number_float()) return AttributeValue(j.get<double>());
  if (j.is_string()) return AttributeValue(j.get<std::string>());
  return Error{ErrorKind::DecodeError, "unsupported value type at " + path, path};
}

inline Result<Timestamp> json_to_timestamp(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) {
    return Error{ErrorKind::DecodeError, "timestamp must be a string at " + path, path};
  }
  auto parsed = parse_timestamp(j.get<std::string>());
  if (!parsed) {
    return Error{ErrorKind::DecodeError, "malformed timestamp at " + path, path};
  }
  return parsed->value;
}

}  // namespace corelog
