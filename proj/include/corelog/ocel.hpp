#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corelog/diagnostics.hpp"
#include "corelog/model.hpp"
#include "corelog/validate.hpp"

namespace corelog {

/// Reserved attribute keys and object ids of the OCEL 2.0 encoding. The
/// "core:" prefix may not appear in user data; collisions fail encoding.
namespace reserved {
inline constexpr const char* kPrefix = "core:";
inline constexpr const char* kEventClass = "core:event_class";
inline constexpr const char* kObjectClass = "core:object_class";
inline constexpr const char* kLinkDirection = "core:link_direction";
inline constexpr const char* kActivity = "core:activity";
inline constexpr const char* kE2eLinkType = "core:e2e_link";
inline constexpr const char* kE2eSource = "core:e2e:source";
inline constexpr const char* kE2eTarget = "core:e2e:target";
inline constexpr const char* kE2eQualifier = "core:qualifier";
inline constexpr const char* kMetadataObject = "core:log_metadata";

inline bool is_reserved(std::string_view key) { return key.rfind(kPrefix, 0) == 0; }
}  // namespace reserved

struct OcelAttributeSchema {
  std::string name;
  std::string type;  // "string" | "integer" | "float" | "boolean" | "null"

  auto operator<=>(const OcelAttributeSchema&) const = default;
};

struct OcelTypeDecl {
  std::string name;
  std::vector<OcelAttributeSchema> attributes;

  auto operator<=>(const OcelTypeDecl&) const = default;
};

struct OcelRelationship {
  Identifier object_id;
  std::string qualifier;

  auto operator<=>(const OcelRelationship&) const = default;
};

struct OcelObjectAttribute {
  std::string name;
  Timestamp time;
  AttributeValue value;

  auto operator<=>(const OcelObjectAttribute&) const = default;
};

struct OcelEventAttribute {
  std::string name;
  AttributeValue value;

  auto operator<=>(const OcelEventAttribute&) const = default;
};

struct OcelObject {
  Identifier id;
  std::string type;
  std::vector<OcelObjectAttribute> attributes;
  std::vector<OcelRelationship> relationships;  // o2o, this object as source

  friend bool operator==(const OcelObject&, const OcelObject&) = default;
};

struct OcelEvent {
  Identifier id;
  std::string type;
  Timestamp time;
  std::vector<OcelEventAttribute> attributes;
  std::vector<OcelRelationship> relationships;  // e2o

  friend bool operator==(const OcelEvent&, const OcelEvent&) = default;
};

/// In-memory OCEL 2.0 document: the table set shared by the JSON and
/// relational backends. Canonically ordered when produced by to_ocel.
struct OcelDocument {
  std::vector<OcelTypeDecl> object_types;
  std::vector<OcelTypeDecl> event_types;
  std::vector<OcelObject> objects;
  std::vector<OcelEvent> events;

  friend bool operator==(const OcelDocument&, const OcelDocument&) = default;
};

namespace detail {

inline const Timestamp kSchemaEpoch{0};  // time slot for class/metadata attributes

inline void infer_schema(std::map<std::string, std::map<std::string, std::set<std::string>>>& acc,
                         const std::string& type, const std::string& attr,
                         const AttributeValue& v) {
  acc[type][attr].insert(v.kind_name());
}

inline std::vector<OcelTypeDecl> schemas_from(
    const std::map<std::string, std::map<std::string, std::set<std::string>>>& acc) {
  std::vector<OcelTypeDecl> out;
  for (const auto& [type, attrs] : acc) {
    OcelTypeDecl decl{type, {}};
    for (const auto& [name, kinds] : attrs) {
      // uniform kind keeps its name; mixed kinds weaken to string
      decl.attributes.push_back({name, kinds.size() == 1 ? *kinds.begin() : "string"});
    }
    out.push_back(std::move(decl));
  }
  return out;
}

inline std::string link_direction_name(LinkDirection d) {
  return d == LinkDirection::BottomUp ? "bottom_up" : "top_down";
}

}  // namespace detail

struct ToOcelOptions {
  bool enforce_valid = true;  // reject logs with error diagnostics
};

/// Three-phase encoding to OCEL 2.0: objects, then events, then
/// relationships. e2o and o2o map natively; every e2e edge becomes a
/// synthetic link object with two tagged e2o rows.
inline Result<OcelDocument> to_ocel(const CoreLog& input, ToOcelOptions opts = {}) {
  const CoreLog log = canonicalize(input);
  if (opts.enforce_valid && !is_strictly_valid(log)) {
    return Error{ErrorKind::InvalidLog, "log has validation errors; run validate for details"};
  }
  for (const auto& [key, v] : log.metadata) {
    if (reserved::is_reserved(key)) {
      return Error{ErrorKind::ReservedKeyCollision, "reserved metadata key \"" + key + "\"", key};
    }
  }
  for (const auto& [id, obj] : log.objects) {
    if (id.value == reserved::kMetadataObject || reserved::is_reserved(id.value)) {
      return Error{ErrorKind::ReservedKeyCollision, "reserved object id \"" + id.value + "\"",
                   id.value};
    }
    for (const auto& [key, history] : obj.attributes) {
      if (reserved::is_reserved(key)) {
        return Error{ErrorKind::ReservedKeyCollision,
                     "reserved attribute key \"" + key + "\" on object " + id.value, key};
      }
    }
  }
  for (const auto& [id, ev] : log.events) {
    for (const auto& [key, v] : ev.attributes) {
      if (reserved::is_reserved(key)) {
        return Error{ErrorKind::ReservedKeyCollision,
                     "reserved attribute key \"" + key + "\" on event " + id.value, key};
      }
    }
  }

  OcelDocument doc;
  std::map<std::string, std::map<std::string, std::set<std::string>>> obj_schema, ev_schema;

  // phase 1: objects
  for (const auto& [id, obj] : log.objects) {
    OcelObject out{id, obj.object_type, {}, {}};
    out.attributes.push_back({reserved::kObjectClass, detail::kSchemaEpoch,
                              AttributeValue(obj.object_class.to_string())});
    detail::infer_schema(obj_schema, obj.object_type, reserved::kObjectClass,
                         out.attributes.back().value);
    if (obj.object_class.kind() == ObjectClass::Kind::Link) {
      out.attributes.push_back(
          {reserved::kLinkDirection, detail::kSchemaEpoch,
           AttributeValue(detail::link_direction_name(obj.object_class.direction()))});
      detail::infer_schema(obj_schema, obj.object_type, reserved::kLinkDirection,
                           out.attributes.back().value);
    }
    for (const auto& [name, history] : obj.attributes) {
      for (const auto& [time, value] : history) {
        out.attributes.push_back({name, time, value});
        detail::infer_schema(obj_schema, obj.object_type, name, value);
      }
    }
    std::sort(out.attributes.begin(), out.attributes.end());
    doc.objects.push_back(std::move(out));
  }

  // log metadata rides along as a reserved singleton object
  {
    OcelObject meta{Identifier{reserved::kMetadataObject}, reserved::kMetadataObject, {}, {}};
    for (const auto& [key, value] : log.metadata) {
      meta.attributes.push_back({key, detail::kSchemaEpoch, value});
      detail::infer_schema(obj_schema, reserved::kMetadataObject, key, value);
    }
    obj_schema[reserved::kMetadataObject];  // declared even when empty
    doc.objects.push_back(std::move(meta));
  }

  // o2o rows live on their source object
  {
    std::map<Identifier, std::vector<OcelRelationship>> by_source;
    for (const ObjectObjectRel& rel : log.o2o) {
      by_source[rel.source_id].push_back({rel.target_id, rel.qualifier});
    }
    for (OcelObject& obj : doc.objects) {
      auto it = by_source.find(obj.id);
      if (it != by_source.end()) obj.relationships = std::move(it->second);
      std::sort(obj.relationships.begin(), obj.relationships.end());
    }
  }

  // phase 2: events
  std::map<Identifier, std::vector<OcelRelationship>> event_rels;
  for (const EventObjectRel& rel : log.e2o) {
    event_rels[rel.event_id].push_back({rel.object_id, rel.qualifier});
  }

  // phase 3: e2e edges become link objects plus two tagged e2o rows each
  std::map<std::pair<Identifier, Identifier>, int> e2e_seen;
  for (const EventEventRel& rel : log.e2e) {
    std::string link_id = "e2e:" + rel.source_event_id.value + ":" + rel.target_event_id.value;
    const int n = e2e_seen[{rel.source_event_id, rel.target_event_id}]++;
    if (n > 0) link_id += ":" + std::to_string(n);  // parallel edges with distinct qualifiers
    if (log.objects.count(Identifier{link_id})) {
      return Error{ErrorKind::ReservedKeyCollision,
                   "object id collides with synthetic e2e link \"" + link_id + "\"", link_id};
    }
    OcelObject link{Identifier{link_id}, reserved::kE2eLinkType, {}, {}};
    link.attributes.push_back(
        {reserved::kE2eQualifier, detail::kSchemaEpoch, AttributeValue(rel.qualifier)});
    detail::infer_schema(obj_schema, reserved::kE2eLinkType, reserved::kE2eQualifier,
                         link.attributes.back().value);
    doc.objects.push_back(std::move(link));
    event_rels[rel.source_event_id].push_back({Identifier{link_id}, reserved::kE2eSource});
    event_rels[rel.target_event_id].push_back({Identifier{link_id}, reserved::kE2eTarget});
  }

  for (const auto& [id, ev] : log.events) {
    OcelEvent out{id, ev.event_type, ev.timestamp, {}, {}};
    out.attributes.push_back(
        {reserved::kEventClass, AttributeValue(std::string(to_string(ev.event_class)))});
    detail::infer_schema(ev_schema, ev.event_type, reserved::kEventClass,
                         out.attributes.back().value);
    if (ev.activity) {
      out.attributes.push_back({reserved::kActivity, AttributeValue(*ev.activity)});
      detail::infer_schema(ev_schema, ev.event_type, reserved::kActivity,
                           out.attributes.back().value);
    }
    for (const auto& [name, value] : ev.attributes) {
      out.attributes.push_back({name, value});
      detail::infer_schema(ev_schema, ev.event_type, name, value);
    }
    std::sort(out.attributes.begin(), out.attributes.end());
    auto rels = event_rels.find(id);
    if (rels != event_rels.end()) {
      out.relationships = std::move(rels->second);
      std::sort(out.relationships.begin(), out.relationships.end());
    }
    doc.events.push_back(std::move(out));
  }

  std::sort(doc.objects.begin(), doc.objects.end(),
            [](const OcelObject& a, const OcelObject& b) { return a.id < b.id; });
  std::sort(doc.events.begin(), doc.events.end(), [](const OcelEvent& a, const OcelEvent& b) {
    return std::tie(a.time, a.id) < std::tie(b.time, b.id);
  });
  doc.object_types = detail::schemas_from(obj_schema);
  doc.event_types = detail::schemas_from(ev_schema);
  return doc;
}

struct DecodedLog {
  CoreLog log;
  std::vector<Diagnostic> diagnostics;  // plain-OCEL import defaults etc.
};

/// Inverse of to_ocel. Plain OCEL 2.0 documents (no "core:" attributes)
/// import with defaulted classes and a warning per defaulted record;
/// from_ocel(to_ocel(x)) == canonicalize(x) for strictly valid x.
inline Result<DecodedLog> from_ocel(const OcelDocument& doc) {
  DecodedLog out;
  CoreLog& log = out.log;

  struct E2eLink {
    std::string qualifier;
    std::vector<Identifier> sources;
    std::vector<Identifier> targets;
  };
  std::map<Identifier, E2eLink> links;

  for (const OcelObject& obj : doc.objects) {
    if (obj.id.value == reserved::kMetadataObject) {
      for (const OcelObjectAttribute& attr : obj.attributes) {
        log.metadata[attr.name] = attr.value;
      }
      continue;
    }
    if (obj.type == reserved::kE2eLinkType) {
      E2eLink link;
      for (const OcelObjectAttribute& attr : obj.attributes) {
        if (attr.name == reserved::kE2eQualifier &&
            attr.value.kind() == AttributeValue::Kind::Text) {
          link.qualifier = attr.value.as_text();
        }
      }
      if (!links.emplace(obj.id, std::move(link)).second) {
        return Error{ErrorKind::DecodeError, "duplicate object id \"" + obj.id.value + "\"",
                     obj.id.value};
      }
      continue;
    }

    CoreObject core{obj.id, obj.type, ObjectClass::case_object(), {}};
    std::optional<std::string> class_name;
    std::optional<LinkDirection> direction;
    for (const OcelObjectAttribute& attr : obj.attributes) {
      if (attr.name == reserved::kObjectClass) {
        if (attr.value.kind() != AttributeValue::Kind::Text) {
          return Error{ErrorKind::DecodeError, "core:object_class must be text", obj.id.value};
        }
        class_name = attr.value.as_text();
      } else if (attr.name == reserved::kLinkDirection) {
        if (attr.value.kind() == AttributeValue::Kind::Text) {
          direction = attr.value.as_text() == "top_down" ? LinkDirection::TopDown
                                                         : LinkDirection::BottomUp;
        }
      } else if (!reserved::is_reserved(attr.name)) {
        core.attributes[attr.name].emplace_back(attr.time, attr.value);
      }
    }
    if (class_name) {
      auto parsed = ObjectClass::parse(*class_name, direction);
      if (!parsed) {
        return Error{ErrorKind::DecodeError, "unknown object class \"" + *class_name + "\"",
                     obj.id.value};
      }
      core.object_class = *parsed;
    } else {
      out.diagnostics.push_back(diag::warning(diag::kDefaultedClass, obj.id.value,
                                              "no core:object_class, defaulted to business:case"));
    }
    for (auto& [name, history] : core.attributes) std::sort(history.begin(), history.end());
    if (log.objects.count(core.object_id)) {
      return Error{ErrorKind::DecodeError, "duplicate object id \"" + obj.id.value + "\"",
                   obj.id.value};
    }
    log.objects.emplace(core.object_id, std::move(core));
  }

  for (const OcelEvent& ev : doc.events) {
    CoreEvent core{ev.id, ev.time, EventClass::ProcessEvent, ev.type, std::nullopt, {}};
    std::optional<std::string> class_name;
    for (const OcelEventAttribute& attr : ev.attributes) {
      if (attr.name == reserved::kEventClass) {
        if (attr.value.kind() != AttributeValue::Kind::Text) {
          return Error{ErrorKind::DecodeError, "core:event_class must be text", ev.id.value};
        }
        class_name = attr.value.as_text();
      } else if (attr.name == reserved::kActivity) {
        if (attr.value.kind() == AttributeValue::Kind::Text) {
          core.activity = attr.value.as_text();
        }
      } else if (!reserved::is_reserved(attr.name)) {
        core.attributes[attr.name] = attr.value;
      }
    }
    if (class_name) {
      auto parsed = parse_event_class(*class_name);
      if (!parsed) {
        return Error{ErrorKind::DecodeError, "unknown event class \"" + *class_name + "\"",
                     ev.id.value};
      }
      core.event_class = *parsed;
    } else {
      // plain-OCEL import: events are process events typed by their label
      core.activity = ev.type;
      out.diagnostics.push_back(diag::warning(diag::kDefaultedClass, ev.id.value,
                                              "no core:event_class, defaulted to process_event"));
    }

    for (const OcelRelationship& rel : ev.relationships) {
      if (rel.qualifier == reserved::kE2eSource || rel.qualifier == reserved::kE2eTarget) {
        auto link = links.find(rel.object_id);
        if (link == links.end()) {
          return Error{ErrorKind::DecodeError,
                       "e2e tag references unknown link object \"" + rel.object_id.value + "\"",
                       rel.object_id.value};
        }
        (rel.qualifier == reserved::kE2eSource ? link->second.sources : link->second.targets)
            .push_back(ev.id);
      } else {
        if (!log.objects.count(rel.object_id)) {
          return Error{ErrorKind::DecodeError,
                       "event " + ev.id.value + " references unknown object \"" +
                           rel.object_id.value + "\"",
                       rel.object_id.value};
        }
        log.e2o.insert(EventObjectRel{ev.id, rel.object_id, rel.qualifier});
      }
    }
    if (log.events.count(core.event_id)) {
      return Error{ErrorKind::DecodeError, "duplicate event id \"" + ev.id.value + "\"",
                   ev.id.value};
    }
    log.events.emplace(core.event_id, std::move(core));
  }

  for (const auto& [id, link] : links) {
    if (link.sources.size() != 1 || link.targets.size() != 1) {
      return Error{ErrorKind::DecodeError,
                   "e2e link \"" + id.value + "\" must have exactly one source and one target row",
                   id.value};
    }
    log.e2e.insert(EventEventRel{link.sources[0], link.targets[0], link.qualifier});
  }

  for (const OcelObject& obj : doc.objects) {
    if (obj.id.value == reserved::kMetadataObject || obj.type == reserved::kE2eLinkType) continue;
    for (const OcelRelationship& rel : obj.relationships) {
      if (!log.objects.count(rel.object_id)) {
        return Error{ErrorKind::DecodeError,
                     "object " + obj.id.value + " references unknown object \"" +
                         rel.object_id.value + "\"",
                     rel.object_id.value};
      }
      log.o2o.insert(ObjectObjectRel{obj.id, rel.object_id, rel.qualifier});
    }
  }

  sort_diagnostics(out.diagnostics);
  return out;
}

}  // namespace corelog
