#pragma once

#include <algorithm>
#include <compare>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corelog/result.hpp"
#include "corelog/time.hpp"
#include "corelog/value.hpp"

namespace corelog {

/// Record identifier. Object ids and event ids live in separate namespaces.
struct Identifier {
  std::string value;

  Identifier() = default;
  Identifier(std::string v) : value(std::move(v)) {}
  Identifier(const char* v) : value(v) {}

  bool valid() const {
    if (value.empty()) return false;
    for (unsigned char c : value) {
      if (c < 0x20 || c == 0x7f) return false;
    }
    return true;
  }

  auto operator<=>(const Identifier&) const = default;
};

enum class LinkDirection { BottomUp, TopDown };

/// Position of an object in the taxonomy: data sources (sensor, IS, link),
/// business objects (case, context) and general objects.
class ObjectClass {
 public:
  enum class Kind {
    Sensor,
    InformationSystem,
    Link,
    CaseObject,
    ContextObject,
    Activity,
    Subprocess,
    Resource,
    Machine,
    Other,
  };

  ObjectClass() : kind_(Kind::Other), label_("unspecified") {}

  static ObjectClass sensor() { return ObjectClass(Kind::Sensor); }
  static ObjectClass information_system() { return ObjectClass(Kind::InformationSystem); }
  static ObjectClass link(LinkDirection dir) {
    ObjectClass c(Kind::Link);
    c.direction_ = dir;
    return c;
  }
  static ObjectClass case_object() { return ObjectClass(Kind::CaseObject); }
  static ObjectClass context_object() { return ObjectClass(Kind::ContextObject); }
  static ObjectClass activity() { return ObjectClass(Kind::Activity); }
  static ObjectClass subprocess() { return ObjectClass(Kind::Subprocess); }
  static ObjectClass resource() { return ObjectClass(Kind::Resource); }
  static ObjectClass machine() { return ObjectClass(Kind::Machine); }
  static ObjectClass other(std::string label) {
    ObjectClass c(Kind::Other);
    c.label_ = std::move(label);
    return c;
  }

  Kind kind() const { return kind_; }
  LinkDirection direction() const { return direction_; }
  const std::string& label() const { return label_; }

  bool is_data_source() const {
    return kind_ == Kind::Sensor || kind_ == Kind::InformationSystem || kind_ == Kind::Link;
  }
  bool is_business() const {
    return kind_ == Kind::CaseObject || kind_ == Kind::ContextObject;
  }
  bool is_general() const { return !is_data_source() && !is_business(); }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Sensor: return "datasource:sensor";
      case Kind::InformationSystem: return "datasource:information_system";
      case Kind::Link: return "datasource:link";
      case Kind::CaseObject: return "business:case";
      case Kind::ContextObject: return "business:context";
      case Kind::Activity: return "general:activity";
      case Kind::Subprocess: return "general:subprocess";
      case Kind::Resource: return "general:resource";
      case Kind::Machine: return "general:machine";
      case Kind::Other: return "general:other:" + label_;
    }
    return {};
  }

  static std::optional<ObjectClass> parse(std::string_view s,
                                          std::optional<LinkDirection> dir = std::nullopt) {
    if (s == "datasource:sensor") return sensor();
    if (s == "datasource:information_system") return information_system();
    if (s == "datasource:link") return link(dir.value_or(LinkDirection::BottomUp));
    if (s == "business:case") return case_object();
    if (s == "business:context") return context_object();
    if (s == "general:activity") return activity();
    if (s == "general:subprocess") return subprocess();
    if (s == "general:resource") return resource();
    if (s == "general:machine") return machine();
    if (s.rfind("general:other:", 0) == 0) return other(std::string(s.substr(14)));
    return std::nullopt;
  }

  friend bool operator==(const ObjectClass& a, const ObjectClass& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == Kind::Link) return a.direction_ == b.direction_;
    if (a.kind_ == Kind::Other) return a.label_ == b.label_;
    return true;
  }
  friend auto operator<=>(const ObjectClass& a, const ObjectClass& b) {
    return a.to_string() <=> b.to_string();
  }

 private:
  explicit ObjectClass(Kind k) : kind_(k) {}

  Kind kind_;
  LinkDirection direction_ = LinkDirection::BottomUp;
  std::string label_;
};

/// Timestamped attribute history of one object attribute.
using AttributeHistory = std::vector<std::pair<Timestamp, AttributeValue>>;

struct CoreObject {
  Identifier object_id;
  std::string object_type;
  ObjectClass object_class;
  std::map<std::string, AttributeHistory> attributes;

  friend bool operator==(const CoreObject&, const CoreObject&) = default;
};

enum class EventClass { ProcessEvent, IotEvent, Observation };

inline const char* to_string(EventClass c) {
  switch (c) {
    case EventClass::ProcessEvent: return "process_event";
    case EventClass::IotEvent: return "iot_event";
    case EventClass::Observation: return "observation";
  }
  return {};
}

inline std::optional<EventClass> parse_event_class(std::string_view s) {
  if (s == "process_event") return EventClass::ProcessEvent;
  if (s == "iot_event") return EventClass::IotEvent;
  if (s == "observation") return EventClass::Observation;
  return std::nullopt;
}

/// Event type label carried by every Observation.
inline constexpr const char* kObservedType = "observed";
/// Qualifier used for derivation lineage edges.
inline constexpr const char* kDerivedFromQualifier = "derived-from";

struct CoreEvent {
  Identifier event_id;
  Timestamp timestamp;
  EventClass event_class = EventClass::Observation;
  std::string event_type = kObservedType;
  std::optional<std::string> activity;
  std::map<std::string, AttributeValue> attributes;

  friend bool operator==(const CoreEvent&, const CoreEvent&) = default;
};

struct EventObjectRel {
  Identifier event_id;
  Identifier object_id;
  std::string qualifier;

  auto operator<=>(const EventObjectRel&) const = default;
};

struct ObjectObjectRel {
  Identifier source_id;
  Identifier target_id;
  std::string qualifier;

  auto operator<=>(const ObjectObjectRel&) const = default;
};

/// Lineage edge from a lower-level event to the higher-level event derived
/// from it. The e2e graph over a log is kept acyclic.
struct EventEventRel {
  Identifier source_event_id;
  Identifier target_event_id;
  std::string qualifier;

  auto operator<=>(const EventEventRel&) const = default;
};

struct CoreLog {
  std::map<Identifier, CoreObject> objects;
  std::map<Identifier, CoreEvent> events;
  std::set<EventObjectRel> e2o;
  std::set<ObjectObjectRel> o2o;
  std::set<EventEventRel> e2e;
  std::map<std::string, AttributeValue> metadata;

  friend bool operator==(const CoreLog&, const CoreLog&) = default;
};

inline CoreLog new_log(std::map<std::string, AttributeValue> metadata = {}) {
  CoreLog log;
  log.metadata = std::move(metadata);
  return log;
}

/// Checks the per-class typing rules: observations are typed "observed",
/// process events are typed by their activity label.
inline std::optional<Error> check_event_class_rules(const CoreEvent& ev) {
  switch (ev.event_class) {
    case EventClass::Observation:
      if (ev.event_type != kObservedType) {
        return Error{ErrorKind::ClassRuleViolation,
                     "observation event_type must be \"observed\", got \"" + ev.event_type + "\"",
                     ev.event_id.value};
      }
      break;
    case EventClass::ProcessEvent:
      if (!ev.activity || ev.activity->empty() || ev.event_type != *ev.activity) {
        return Error{ErrorKind::ClassRuleViolation,
                     "process event requires activity, with event_type equal to it",
                     ev.event_id.value};
      }
      break;
    case EventClass::IotEvent:
      if (ev.event_type.empty()) {
        return Error{ErrorKind::ClassRuleViolation, "iot event requires a non-empty event_type",
                     ev.event_id.value};
      }
      break;
  }
  return std::nullopt;
}

inline Status add_object(CoreLog& log, CoreObject obj) {
  if (!obj.object_id.valid()) {
    return fail(ErrorKind::MalformedRecord, "invalid object id", obj.object_id.value);
  }
  if (log.objects.count(obj.object_id)) {
    return fail(ErrorKind::DuplicateId, "duplicate object id \"" + obj.object_id.value + "\"",
                obj.object_id.value);
  }
  Identifier id = obj.object_id;
  log.objects.emplace(std::move(id), std::move(obj));
  return ok_status();
}

inline Status add_event(CoreLog& log, CoreEvent ev,
                        const std::vector<std::pair<Identifier, std::string>>& e2o_links = {}) {
  if (!ev.event_id.valid()) {
    return fail(ErrorKind::MalformedRecord, "invalid event id", ev.event_id.value);
  }
  if (log.events.count(ev.event_id)) {
    return fail(ErrorKind::DuplicateId, "duplicate event id \"" + ev.event_id.value + "\"",
                ev.event_id.value);
  }
  for (const auto& [oid, q] : e2o_links) {
    if (!log.objects.count(oid)) {
      return fail(ErrorKind::DanglingObjectRef, "unknown object \"" + oid.value + "\"", oid.value);
    }
  }
  if (auto err = check_event_class_rules(ev)) return Status(*err);
  for (const auto& [oid, q] : e2o_links) {
    log.e2o.insert(EventObjectRel{ev.event_id, oid, q});
  }
  Identifier id = ev.event_id;
  log.events.emplace(std::move(id), std::move(ev));
  return ok_status();
}

inline Status add_o2o(CoreLog& log, ObjectObjectRel rel) {
  if (!log.objects.count(rel.source_id)) {
    return fail(ErrorKind::DanglingObjectRef, "unknown object \"" + rel.source_id.value + "\"",
                rel.source_id.value);
  }
  if (!log.objects.count(rel.target_id)) {
    return fail(ErrorKind::DanglingObjectRef, "unknown object \"" + rel.target_id.value + "\"",
                rel.target_id.value);
  }
  // self-relations only through the reserved "self" qualifier
  if (rel.source_id == rel.target_id && rel.qualifier != "self") {
    return fail(ErrorKind::MalformedRecord, "o2o self-relation requires qualifier \"self\"",
                rel.source_id.value);
  }
  log.o2o.insert(std::move(rel));
  return ok_status();
}

namespace detail {

/// True if `to` is reachable from `from` over existing e2e edges.
inline bool e2e_reachable(const CoreLog& log, const Identifier& from, const Identifier& to) {
  std::set<Identifier> seen{from};
  std::deque<Identifier> queue{from};
  while (!queue.empty()) {
    Identifier cur = queue.front();
    queue.pop_front();
    if (cur == to) return true;
    auto it = log.e2e.lower_bound(EventEventRel{cur, Identifier{}, {}});
    for (; it != log.e2e.end() && it->source_event_id == cur; ++it) {
      if (seen.insert(it->target_event_id).second) queue.push_back(it->target_event_id);
    }
  }
  return false;
}

}  // namespace detail

inline Status add_e2e(CoreLog& log, EventEventRel rel) {
  if (!log.events.count(rel.source_event_id)) {
    return fail(ErrorKind::DanglingEventRef, "unknown event \"" + rel.source_event_id.value + "\"",
                rel.source_event_id.value);
  }
  if (!log.events.count(rel.target_event_id)) {
    return fail(ErrorKind::DanglingEventRef, "unknown event \"" + rel.target_event_id.value + "\"",
                rel.target_event_id.value);
  }
  if (rel.source_event_id == rel.target_event_id ||
      detail::e2e_reachable(log, rel.target_event_id, rel.source_event_id)) {
    return fail(ErrorKind::CycleDetected,
                "edge " + rel.source_event_id.value + " -> " + rel.target_event_id.value +
                    " would close a cycle",
                rel.source_event_id.value);
  }
  log.e2e.insert(std::move(rel));
  return ok_status();
}

/// Inserts a derived higher-level event: one data-source edge to the link
/// object, the given business edges, and a "derived-from" lineage edge from
/// every source. An unset timestamp becomes the latest source timestamp.
inline Result<Identifier> derive_event(
    CoreLog& log, CoreObject link_obj, const std::vector<Identifier>& sources, CoreEvent new_event,
    const std::vector<std::pair<Identifier, std::string>>& business_links) {
  if (link_obj.object_class.kind() != ObjectClass::Kind::Link) {
    return Error{ErrorKind::ClassRuleViolation, "derive_event requires a DataSource.Link object",
                 link_obj.object_id.value};
  }
  if (sources.empty()) {
    return Error{ErrorKind::PreconditionViolated, "derive_event requires at least one source"};
  }
  Timestamp max_source_ts = Timestamp::unset();
  for (const Identifier& src : sources) {
    auto it = log.events.find(src);
    if (it == log.events.end()) {
      return Error{ErrorKind::DanglingEventRef, "unknown source event \"" + src.value + "\"",
                   src.value};
    }
    if (link_obj.object_class.direction() == LinkDirection::BottomUp &&
        it->second.event_class == EventClass::ProcessEvent) {
      return Error{ErrorKind::ClassRuleViolation,
                   "bottom-up link sources must be iot events or observations", src.value};
    }
    max_source_ts = std::max(max_source_ts, it->second.timestamp);
  }
  if (link_obj.object_class.direction() == LinkDirection::BottomUp &&
      new_event.event_class == EventClass::Observation) {
    return Error{ErrorKind::ClassRuleViolation,
                 "bottom-up link target must be an iot or process event", new_event.event_id.value};
  }
  if (!new_event.timestamp.is_set()) new_event.timestamp = max_source_ts;

  if (!log.objects.count(link_obj.object_id)) {
    if (auto st = add_object(log, link_obj); !st.ok()) return st.error();
  }
  std::vector<std::pair<Identifier, std::string>> links;
  links.emplace_back(link_obj.object_id, "derived-by");
  links.insert(links.end(), business_links.begin(), business_links.end());
  Identifier new_id = new_event.event_id;
  if (auto st = add_event(log, std::move(new_event), links); !st.ok()) return st.error();
  for (const Identifier& src : sources) {
    if (auto st = add_e2e(log, EventEventRel{src, new_id, kDerivedFromQualifier}); !st.ok()) {
      return st.error();
    }
  }
  return new_id;
}

/// Events reachable backwards over e2e edges from `event_id` (its transitive
/// lineage), excluding the event itself.
inline std::set<Identifier> lineage_sources(const CoreLog& log, const Identifier& event_id) {
  std::map<Identifier, std::vector<Identifier>> incoming;
  for (const EventEventRel& rel : log.e2e) {
    incoming[rel.target_event_id].push_back(rel.source_event_id);
  }
  std::set<Identifier> out;
  std::deque<Identifier> queue{event_id};
  while (!queue.empty()) {
    Identifier cur = queue.front();
    queue.pop_front();
    auto it = incoming.find(cur);
    if (it == incoming.end()) continue;
    for (const Identifier& src : it->second) {
      if (out.insert(src).second) queue.push_back(src);
    }
  }
  return out;
}

/// Normal form: attribute histories sorted and deduplicated, empty e2o
/// qualifiers replaced by the event's event_type (the fallback the OCEL
/// encoding applies). Containers are ordered, so semantically equal logs
/// compare equal after this.
inline CoreLog canonicalize(const CoreLog& log) {
  CoreLog out = log;
  for (auto& [id, obj] : out.objects) {
    for (auto& [name, history] : obj.attributes) {
      std::sort(history.begin(), history.end());
      history.erase(std::unique(history.begin(), history.end()), history.end());
    }
  }
  std::set<EventObjectRel> e2o;
  for (EventObjectRel rel : out.e2o) {
    if (rel.qualifier.empty()) {
      auto it = out.events.find(rel.event_id);
      if (it != out.events.end()) rel.qualifier = it->second.event_type;
    }
    e2o.insert(std::move(rel));
  }
  out.e2o = std::move(e2o);
  return out;
}

}  // namespace corelog
