#pragma once

#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "corelog/json_util.hpp"
#include "corelog/ocel.hpp"

namespace corelog {

/// Writes the OCEL 2.0 JSON interchange layout. Output is a byte-
/// deterministic function of the document: keys sorted, arrays kept in the
/// document's canonical order, timestamps in UTC.
inline void write_json(const OcelDocument& doc, std::ostream& out) {
  nlohmann::json root;  // nlohmann::json orders members lexicographically

  auto types_to_json = [](const std::vector<OcelTypeDecl>& types) {
    nlohmann::json arr = nlohmann::json::array();
    for (const OcelTypeDecl& t : types) {
      nlohmann::json attrs = nlohmann::json::array();
      for (const OcelAttributeSchema& a : t.attributes) {
        attrs.push_back({{"name", a.name}, {"type", a.type}});
      }
      arr.push_back({{"name", t.name}, {"attributes", attrs}});
    }
    return arr;
  };
  root["objectTypes"] = types_to_json(doc.object_types);
  root["eventTypes"] = types_to_json(doc.event_types);

  nlohmann::json objects = nlohmann::json::array();
  for (const OcelObject& obj : doc.objects) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const OcelObjectAttribute& a : obj.attributes) {
      attrs.push_back(
          {{"name", a.name}, {"time", a.time.to_iso8601()}, {"value", value_to_json(a.value)}});
    }
    nlohmann::json rels = nlohmann::json::array();
    for (const OcelRelationship& r : obj.relationships) {
      rels.push_back({{"objectId", r.object_id.value}, {"qualifier", r.qualifier}});
    }
    objects.push_back({{"id", obj.id.value},
                       {"type", obj.type},
                       {"attributes", attrs},
                       {"relationships", rels}});
  }
  root["objects"] = objects;

  nlohmann::json events = nlohmann::json::array();
  for (const OcelEvent& ev : doc.events) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const OcelEventAttribute& a : ev.attributes) {
      attrs.push_back({{"name", a.name}, {"value", value_to_json(a.value)}});
    }
    nlohmann::json rels = nlohmann::json::array();
    for (const OcelRelationship& r : ev.relationships) {
      rels.push_back({{"objectId", r.object_id.value}, {"qualifier", r.qualifier}});
    }
    events.push_back({{"id", ev.id.value},
                      {"type", ev.type},
                      {"time", ev.time.to_iso8601()},
                      {"attributes", attrs},
                      {"relationships", rels}});
  }
  root["events"] = events;

  out << root.dump(2) << '\n';
}

inline std::string write_json_string(const OcelDocument& doc) {
  std::ostringstream out;
  write_json(doc, out);
  return out.str();
}

struct JsonReadResult {
  OcelDocument doc;
  std::vector<Diagnostic> warnings;
};

/// Reads the JSON layout back. Member order is irrelevant; unknown
/// top-level members are ignored with a warning.
inline Result<JsonReadResult> read_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return Error{ErrorKind::DecodeError,
                 "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()};
  }
  if (!root.is_object()) {
    return Error{ErrorKind::DecodeError, "top level must be a JSON object"};
  }

  JsonReadResult out;
  for (const auto& [key, _] : root.items()) {
    if (key != "objectTypes" && key != "eventTypes" && key != "objects" && key != "events") {
      out.warnings.push_back(
          diag::warning(diag::kUnknownMember, key, "unknown top-level member ignored"));
    }
  }

  auto expect_array = [&root](const char* key) -> Result<nlohmann::json> {
    if (!root.contains(key)) return nlohmann::json::array();
    if (!root.at(key).is_array()) {
      return Error{ErrorKind::DecodeError, std::string(key) + " must be an array", key};
    }
    return root.at(key);
  };

  auto read_types = [](const nlohmann::json& arr, const std::string& path,
                       std::vector<OcelTypeDecl>& out_types) -> Status {
    for (size_t i = 0; i < arr.size(); ++i) {
      const auto& t = arr[i];
      const std::string p = path + "[" + std::to_string(i) + "]";
      if (!t.is_object() || !t.contains("name") || !t.at("name").is_string()) {
        return fail(ErrorKind::DecodeError, "type declaration needs a string name at " + p, p);
      }
      OcelTypeDecl decl{t.at("name").get<std::string>(), {}};
      for (const auto& a : t.value("attributes", nlohmann::json::array())) {
        if (!a.is_object() || !a.contains("name") || !a.at("name").is_string()) {
          return fail(ErrorKind::DecodeError, "malformed attribute schema at " + p, p);
        }
        decl.attributes.push_back(
            {a.at("name").get<std::string>(), a.value("type", std::string("string"))});
      }
      out_types.push_back(std::move(decl));
    }
    return ok_status();
  };

  auto read_rels = [](const nlohmann::json& item, const std::string& path,
                      std::vector<OcelRelationship>& rels) -> Status {
    for (const auto& r : item.value("relationships", nlohmann::json::array())) {
      if (!r.is_object() || !r.contains("objectId") || !r.at("objectId").is_string()) {
        return fail(ErrorKind::DecodeError, "malformed relationship at " + path, path);
      }
      rels.push_back(
          {Identifier{r.at("objectId").get<std::string>()}, r.value("qualifier", std::string{})});
    }
    return ok_status();
  };

  {
    auto arr = expect_array("objectTypes");
    if (!arr.ok()) return arr.error();
    if (auto st = read_types(arr.value(), "objectTypes", out.doc.object_types); !st.ok()) {
      return st.error();
    }
  }
  {
    auto arr = expect_array("eventTypes");
    if (!arr.ok()) return arr.error();
    if (auto st = read_types(arr.value(), "eventTypes", out.doc.event_types); !st.ok()) {
      return st.error();
    }
  }
  {
    auto arr = expect_array("objects");
    if (!arr.ok()) return arr.error();
    for (size_t i = 0; i < arr.value().size(); ++i) {
      const auto& o = arr.value()[i];
      const std::string p = "objects[" + std::to_string(i) + "]";
      if (!o.is_object() || !o.contains("id") || !o.at("id").is_string()) {
        return Error{ErrorKind::DecodeError, "object needs a string id at " + p, p};
      }
      OcelObject obj{Identifier{o.at("id").get<std::string>()}, o.value("type", std::string{}),
                     {}, {}};
      for (const auto& a : o.value("attributes", nlohmann::json::array())) {
        if (!a.is_object() || !a.contains("name") || !a.at("name").is_string()) {
          return Error{ErrorKind::DecodeError, "malformed attribute at " + p, p};
        }
        auto time = json_to_timestamp(a.value("time", nlohmann::json("1970-01-01T00:00:00Z")),
                                      p + ".time");
        if (!time.ok()) return time.error();
        auto value = json_to_value(a.value("value", nlohmann::json()), p + ".value");
        if (!value.ok()) return value.error();
        obj.attributes.push_back({a.at("name").get<std::string>(), time.value(), value.value()});
      }
      if (auto st = read_rels(o, p, obj.relationships); !st.ok()) return st.error();
      out.doc.objects.push_back(std::move(obj));
    }
  }
  {
    auto arr = expect_array("events");
    if (!arr.ok()) return arr.error();
    for (size_t i = 0; i < arr.value().size(); ++i) {
      const auto& e = arr.value()[i];
      const std::string p = "events[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("id") || !e.at("id").is_string()) {
        return Error{ErrorKind::DecodeError, "event needs a string id at " + p, p};
      }
      if (!e.contains("time")) {
        return Error{ErrorKind::DecodeError, "event needs a time at " + p, p};
      }
      auto time = json_to_timestamp(e.at("time"), p + ".time");
      if (!time.ok()) return time.error();
      OcelEvent ev{Identifier{e.at("id").get<std::string>()}, e.value("type", std::string{}),
                   time.value(), {}, {}};
      for (const auto& a : e.value("attributes", nlohmann::json::array())) {
        if (!a.is_object() || !a.contains("name") || !a.at("name").is_string()) {
          return Error{ErrorKind::DecodeError, "malformed attribute at " + p, p};
        }
        auto value = json_to_value(a.value("value", nlohmann::json()), p + ".value");
        if (!value.ok()) return value.error();
        ev.attributes.push_back({a.at("name").get<std::string>(), value.value()});
      }
      if (auto st = read_rels(e, p, ev.relationships); !st.ok()) return st.error();
      out.doc.events.push_back(std::move(ev));
    }
  }
  return out;
}

}  // namespace corelog
