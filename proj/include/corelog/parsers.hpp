#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corelog/diagnostics.hpp"
#include "corelog/json_util.hpp"
#include "corelog/model.hpp"
#include "corelog/xml.hpp"

namespace corelog {

/// Outcome of one translation run: the log, translation diagnostics, and
/// per-concept bookkeeping (events/objects parsed and skipped reconcile
/// with the source record counts).
struct ParseReport {
  CoreLog log;
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, std::int64_t> counts;
};

enum class DataStreamProfile { Trier, Tum };

struct ObjectClassRule {
  std::string pattern;  // object_type match: exact, "prefix*", or "*"
  ObjectClass object_class;
};

/// Field bindings for custom record streams (JSON records, one map each).
struct MappingConfig {
  std::optional<std::string> resource_key;
  std::string activity_key = "concept:name";
  std::vector<std::string> observation_attribute_keys;
  std::vector<ObjectClassRule> object_class_rules;
  std::map<std::string, std::string> qualifier_defaults;

  std::string qualifier(const std::string& kind, const char* fallback) const {
    auto it = qualifier_defaults.find(kind);
    return it != qualifier_defaults.end() ? it->second : fallback;
  }
};

namespace detail {

inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Shared lenient-insertion state for the legacy parsers: parsers must
/// survive dirty logs, so duplicates become W003 diagnostics, not failures.
class ParseContext {
 public:
  explicit ParseContext(std::string source_name) : source_name_(std::move(source_name)) {
    static const char* keys[] = {"source_events",  "events_parsed", "events_skipped",
                                 "objects_parsed", "objects_skipped", "relations_parsed"};
    for (const char* k : keys) report.counts[k] = 0;
  }

  ParseReport report;

  std::string data_source_id() const { return "ds:" + fnv1a_hex(source_name_); }

  /// Synthesizes the per-document information-system data source on first use.
  Identifier ensure_data_source() {
    Identifier id{data_source_id()};
    if (!report.log.objects.count(id)) {
      add_object(CoreObject{id, "information system", ObjectClass::information_system(), {}});
    }
    return id;
  }

  bool add_object(CoreObject obj) {
    auto st = corelog::add_object(report.log, std::move(obj));
    if (st.ok()) {
      ++report.counts["objects_parsed"];
      return true;
    }
    if (st.error().kind == ErrorKind::DuplicateId) {
      ++report.counts["objects_skipped"];
      report.diagnostics.push_back(
          diag::warning(diag::kDuplicateSkipped, st.error().subject, "duplicate object skipped"));
      return false;
    }
    report.diagnostics.push_back(
        diag::error(diag::kDanglingRef, st.error().subject, st.error().message));
    ++report.counts["objects_skipped"];
    return false;
  }

  bool add_event(CoreEvent ev, std::vector<std::pair<Identifier, std::string>> links) {
    const std::int64_t n_links = static_cast<std::int64_t>(links.size());
    auto st = corelog::add_event(report.log, std::move(ev), links);
    if (st.ok()) {
      ++report.counts["events_parsed"];
      report.counts["relations_parsed"] += n_links;
      return true;
    }
    ++report.counts["events_skipped"];
    if (st.error().kind == ErrorKind::DuplicateId) {
      report.diagnostics.push_back(
          diag::warning(diag::kDuplicateSkipped, st.error().subject, "duplicate event skipped"));
    } else {
      report.diagnostics.push_back(
          diag::error(diag::kDanglingRef, st.error().subject, st.error().message));
    }
    return false;
  }

  void add_e2e(EventEventRel rel) {
    auto st = corelog::add_e2e(report.log, rel);
    if (st.ok()) {
      ++report.counts["relations_parsed"];
    } else {
      report.diagnostics.push_back(
          diag::error(diag::kDanglingRef, st.error().subject, st.error().message));
    }
  }

  void add_o2o(ObjectObjectRel rel) {
    auto st = corelog::add_o2o(report.log, rel);
    if (st.ok()) {
      ++report.counts["relations_parsed"];
    } else {
      report.diagnostics.push_back(
          diag::error(diag::kDanglingRef, st.error().subject, st.error().message));
    }
  }

  Timestamp parse_time(const std::string& text, const std::string& subject) {
    if (text.empty()) {
      report.diagnostics.push_back(
          diag::warning(diag::kAssumedUtc, subject, "missing timestamp, epoch UTC assumed"));
      return Timestamp{0};
    }
    auto parsed = parse_timestamp(text);
    if (!parsed) {
      report.diagnostics.push_back(
          diag::warning(diag::kAssumedUtc, subject, "unreadable timestamp, epoch UTC assumed"));
      return Timestamp{0};
    }
    if (!parsed->had_offset) {
      report.diagnostics.push_back(
          diag::warning(diag::kAssumedUtc, subject, "timestamp without zone, UTC assumed"));
    }
    return parsed->value;
  }

  ParseReport finish() {
    sort_diagnostics(report.diagnostics);
    return std::move(report);
  }

 private:
  std::string source_name_;
};

/// Interprets a free-form source value: numeric and boolean lexical forms
/// get their natural tag, everything else stays text.
inline AttributeValue sniff_value(const std::string& text) { return decode_cell(text); }

inline std::string fresh_id(const char* prefix, int& counter) {
  return std::string(prefix) + std::to_string(++counter);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// XES with the DataStream extension
// ---------------------------------------------------------------------------

namespace detail {

/// XES attribute children of an element (<string key=.. value=../> etc.),
/// excluding nested containers.
inline std::map<std::string, std::pair<std::string, AttributeValue>> xes_attributes(
    const xml::Element& el) {
  std::map<std::string, std::pair<std::string, AttributeValue>> out;
  for (const xml::Element& child : el.children) {
    const std::string* key = child.attr("key");
    const std::string* value = child.attr("value");
    if (!key || !value) continue;
    AttributeValue v;
    if (child.name == "int") {
      std::int64_t i = 0;
      lex_as_integer(*value, i);
      v = AttributeValue(i);
    } else if (child.name == "float") {
      double d = 0;
      lex_as_real(*value, d);
      v = AttributeValue(d);
    } else if (child.name == "boolean") {
      v = AttributeValue(*value == "true");
    } else if (child.name == "string" || child.name == "date" || child.name == "id") {
      v = AttributeValue(*value);
    } else {
      continue;
    }
    out[*key] = {child.name, std::move(v)};
  }
  return out;
}

inline bool has_stream_namespace(const xml::Element& root) {
  for (const auto& [k, v] : root.attributes) {
    if (k == "xmlns:stream") return true;
  }
  return false;
}

// Trier observation attribute names, mapped from their stream: keys.
inline const std::pair<const char*, const char*> kTrierObservationKeys[] = {
    {"stream:system", "system"},
    {"stream:system_type", "system_type"},
    {"stream:observation", "observation"},
    {"stream:procedure_type", "procedure_type"},
    {"stream:interaction_type", "interaction_type"},
    {"stream:value", "value"},
};

}  // namespace detail

/// Translates an XES document carrying the DataStream extension. The Trier
/// profile models participants as resource objects; the TUM profile models
/// devices as machine objects; both synthesize an information-system data
/// source per document and keep unmapped source fields as attributes.
inline Result<ParseReport> parse_datastream(std::string_view document, DataStreamProfile profile,
                                            std::string source_name = {}) {
  auto parsed = xml::parse_document(document);
  if (!parsed.ok()) return parsed.error();
  const xml::Element& root = parsed.value();
  if (root.name != "log") {
    return Error{ErrorKind::MalformedXml, "expected <log> document element", root.name};
  }
  if (!detail::has_stream_namespace(root)) {
    return Error{ErrorKind::MissingExtension, "document does not declare the stream: namespace"};
  }

  detail::ParseContext ctx(std::move(source_name));
  int event_counter = 0;
  int obs_counter = 0;
  std::map<std::pair<std::string, std::string>, Identifier> machines;

  // events may appear directly under <log> or inside <trace> elements
  std::vector<const xml::Element*> events;
  for (const xml::Element& child : root.children) {
    if (child.name == "event") events.push_back(&child);
    if (child.name == "trace") {
      for (const xml::Element& sub : child.children) {
        if (sub.name == "event") events.push_back(&sub);
      }
    }
  }
  if (events.empty()) {
    ctx.report.diagnostics.push_back(
        diag::warning(diag::kEmptyInput, ctx.data_source_id(), "document contains no events"));
  }

  auto resource_object = [&ctx](const std::string& name) {
    Identifier id{name};
    if (!ctx.report.log.objects.count(id)) {
      ctx.add_object(CoreObject{id, "resource", ObjectClass::resource(), {}});
    }
    return id;
  };
  auto machine_object = [&](const std::string& name, const std::string& source) {
    auto key = std::make_pair(name, source);
    auto it = machines.find(key);
    if (it != machines.end()) return it->second;
    Identifier id{"machine:" + (name.empty() ? source : name + "/" + source)};
    if (!ctx.report.log.objects.count(id)) {
      CoreObject machine{id, "IoT-Device", ObjectClass::machine(), {}};
      if (!name.empty()) machine.attributes["stream:name"] = {{Timestamp{0}, AttributeValue(name)}};
      if (!source.empty()) {
        machine.attributes["stream:source"] = {{Timestamp{0}, AttributeValue(source)}};
      }
      ctx.add_object(std::move(machine));
    }
    machines.emplace(key, id);
    return id;
  };

  struct PendingE2e {
    Identifier source;
    Identifier target;
  };
  std::vector<PendingE2e> lineage;

  for (const xml::Element* event_el : events) {
    auto attrs = detail::xes_attributes(*event_el);
    std::optional<Identifier> process_event_id;

    auto take = [&attrs](const char* key) -> std::optional<std::string> {
      auto it = attrs.find(key);
      if (it == attrs.end()) return std::nullopt;
      std::string text = it->second.second.kind() == AttributeValue::Kind::Text
                             ? it->second.second.as_text()
                             : it->second.second.to_display();
      attrs.erase(it);
      return text;
    };

    const auto concept_name = take("concept:name");
    const auto resource = take("org:resource");
    const auto time_text = take("time:timestamp");
    const auto identity = take("identity:id");

    if (concept_name) {
      ++ctx.report.counts["source_events"];
      CoreEvent ev;
      ev.event_id = Identifier{identity ? *identity : detail::fresh_id("ev", event_counter)};
      ev.event_class = EventClass::ProcessEvent;
      ev.activity = *concept_name;
      ev.event_type = *concept_name;
      ev.timestamp = ctx.parse_time(time_text.value_or(""), ev.event_id.value);
      for (const auto& [key, typed] : attrs) ev.attributes[key] = typed.second;

      std::vector<std::pair<Identifier, std::string>> links;
      links.emplace_back(ctx.ensure_data_source(), "recorded-by");
      if (resource) links.emplace_back(resource_object(*resource), "executed-by");
      if (ctx.add_event(ev, links)) process_event_id = ev.event_id;
    }

    // stream:datastream children: points, plus shared datacontext attributes
    for (const xml::Element* ds : event_el->children_named("stream:datastream")) {
      std::map<std::string, std::pair<std::string, AttributeValue>> context_attrs;
      for (const xml::Element* dc : ds->children_named("stream:datacontext")) {
        for (auto& [k, v] : detail::xes_attributes(*dc)) context_attrs[k] = v;
      }
      for (const xml::Element* point : ds->children_named("stream:point")) {
        ++ctx.report.counts["source_events"];
        auto point_attrs = detail::xes_attributes(*point);
        // shared context data is attached to every referenced event
        for (const auto& [k, v] : context_attrs) point_attrs.emplace(k, v);

        auto point_take = [&point_attrs](const char* key) -> std::optional<std::string> {
          auto it = point_attrs.find(key);
          if (it == point_attrs.end()) return std::nullopt;
          std::string text = it->second.second.kind() == AttributeValue::Kind::Text
                                 ? it->second.second.as_text()
                                 : it->second.second.to_display();
          point_attrs.erase(it);
          return text;
        };

        const auto point_concept = point_take("concept:name");
        const auto point_id = point_take("identity:id");
        const auto point_time = point_take("stream:timestamp");
        const auto stream_name = point_take("stream:name");
        const auto stream_source = point_take("stream:source");

        CoreEvent ev;
        ev.event_id = Identifier{point_id ? *point_id : detail::fresh_id("obs", obs_counter)};
        ev.timestamp = point_time ? ctx.parse_time(*point_time, ev.event_id.value)
                                  : ctx.parse_time(time_text.value_or(""), ev.event_id.value);

        std::vector<std::pair<Identifier, std::string>> links;
        links.emplace_back(ctx.ensure_data_source(),
                           profile == DataStreamProfile::Tum ? "logged-by" : "recorded-by");
        if (profile == DataStreamProfile::Tum && (stream_name || stream_source)) {
          links.emplace_back(
              machine_object(stream_name.value_or(""), stream_source.value_or("")), "recorded-by");
        } else {
          if (stream_name) ev.attributes["stream:name"] = AttributeValue(*stream_name);
          if (stream_source) ev.attributes["stream:source"] = AttributeValue(*stream_source);
        }

        if (point_concept) {
          ev.event_class = EventClass::ProcessEvent;
          ev.activity = *point_concept;
          ev.event_type = *point_concept;
          for (const auto& [key, typed] : point_attrs) ev.attributes[key] = typed.second;
          if (ctx.add_event(ev, links) && !process_event_id) process_event_id = ev.event_id;
          continue;
        }

        ev.event_class = EventClass::Observation;
        ev.event_type = kObservedType;
        if (profile == DataStreamProfile::Trier) {
          for (const auto& [stream_key, plain_key] : detail::kTrierObservationKeys) {
            auto it = point_attrs.find(stream_key);
            if (it != point_attrs.end()) {
              ev.attributes[plain_key] = it->second.second;
              point_attrs.erase(it);
            }
          }
        }
        // unmapped source fields are preserved as attributes
        for (const auto& [key, typed] : point_attrs) ev.attributes[key] = typed.second;
        if (ctx.add_event(ev, links)) {
          lineage.push_back({ev.event_id, Identifier{}});  // target patched below
          lineage.back().target = Identifier{};
          if (process_event_id) {
            lineage.back().target = *process_event_id;
          } else {
            lineage.pop_back();  // no process event in scope: observation stands alone (R2)
          }
        }
      }
    }

    // observations precede the process event in document order when the
    // point list comes first; resolve lineage after the whole event element
    if (process_event_id) {
      for (PendingE2e& edge : lineage) {
        if (edge.target.value.empty()) edge.target = *process_event_id;
      }
    }
  }

  for (const PendingE2e& edge : lineage) {
    if (!edge.target.value.empty()) {
      ctx.add_e2e(EventEventRel{edge.source, edge.target, kDerivedFromQualifier});
    }
  }

  return ctx.finish();
}

// ---------------------------------------------------------------------------
// NICE
// ---------------------------------------------------------------------------

/// Translates a NICE log: features of interest and users become objects,
/// sensors become sensor objects with location/metadata attributes (and a
/// "located-at" o2o edge), bottom-level IoT events become observations, and
/// context events fold into object attribute histories when their target
/// resolves, otherwise they are dropped and counted.
inline Result<ParseReport> parse_nice(std::string_view document, std::string source_name = {}) {
  auto parsed = xml::parse_document(document);
  if (!parsed.ok()) return parsed.error();
  const xml::Element& root = parsed.value();
  if (root.name != "nice:log" && root.name != "log") {
    return Error{ErrorKind::MalformedXml, "expected <nice:log> document element", root.name};
  }

  detail::ParseContext ctx(std::move(source_name));
  auto strip = [](const std::string& name) {
    return name.rfind("nice:", 0) == 0 ? name.substr(5) : name;
  };

  // objects and data sources first; events reference them
  if (const xml::Element* sources = root.first_child("nice:dataSources")) {
    for (const xml::Element& el : sources->children) {
      const std::string kind = strip(el.name);
      const std::string* id = el.attr("id");
      if (!id) {
        return Error{ErrorKind::SchemaViolation, "data source without id", "nice:dataSources"};
      }
      if (kind == "sensor") {
        CoreObject sensor{Identifier{*id}, "Sensor", ObjectClass::sensor(), {}};
        if (const std::string* loc = el.attr("location")) {
          sensor.attributes["location"] = {{Timestamp{0}, AttributeValue(*loc)}};
        }
        if (const xml::Element* meta = el.first_child("nice:metadata")) {
          std::string joined;
          for (const auto& [k, v] : meta->attributes) {
            if (!joined.empty()) joined += ';';
            joined += k + "=" + v;
          }
          sensor.attributes["metadata"] = {{Timestamp{0}, AttributeValue(joined)}};
        }
        ctx.add_object(std::move(sensor));
      } else if (kind == "informationSystem") {
        ctx.add_object(CoreObject{Identifier{*id}, "information system",
                                  ObjectClass::information_system(), {}});
      } else {
        return Error{ErrorKind::SchemaViolation, "unknown data source kind <" + el.name + ">",
                     el.name};
      }
    }
  }
  if (const xml::Element* objects = root.first_child("nice:objects")) {
    for (const xml::Element& el : objects->children) {
      const std::string kind = strip(el.name);
      const std::string* id = el.attr("id");
      if (!id) return Error{ErrorKind::SchemaViolation, "object without id", "nice:objects"};
      if (kind == "featureOfInterest") {
        const std::string foi_kind = el.attr_or("kind", "location");
        // location and date features become business context objects
        ctx.add_object(CoreObject{Identifier{*id}, foi_kind, ObjectClass::context_object(), {}});
      } else if (kind == "user") {
        ctx.add_object(CoreObject{Identifier{*id}, "resource", ObjectClass::resource(), {}});
      } else {
        return Error{ErrorKind::SchemaViolation, "unknown object kind <" + el.name + ">", el.name};
      }
    }
  }

  // sensor locations: auto-create the context object when undeclared
  for (auto& [id, obj] : ctx.report.log.objects) {
    if (obj.object_class.kind() != ObjectClass::Kind::Sensor) continue;
    auto loc = obj.attributes.find("location");
    if (loc == obj.attributes.end() || loc->second.empty()) continue;
    const std::string location = loc->second.front().second.as_text();
    if (!ctx.report.log.objects.count(Identifier{location})) {
      ctx.add_object(CoreObject{Identifier{location}, "location", ObjectClass::context_object(), {}});
    }
  }
  {
    std::vector<ObjectObjectRel> located;
    for (const auto& [id, obj] : ctx.report.log.objects) {
      if (obj.object_class.kind() != ObjectClass::Kind::Sensor) continue;
      auto loc = obj.attributes.find("location");
      if (loc == obj.attributes.end() || loc->second.empty()) continue;
      located.push_back(
          ObjectObjectRel{id, Identifier{loc->second.front().second.as_text()}, "located-at"});
    }
    for (ObjectObjectRel& rel : located) ctx.add_o2o(std::move(rel));
  }

  const xml::Element* events = root.first_child("nice:events");
  if (!events || events->children.empty()) {
    ctx.report.diagnostics.push_back(
        diag::warning(diag::kEmptyInput, ctx.data_source_id(), "document contains no events"));
  }

  struct PendingDerivation {
    Identifier target;
    std::vector<std::string> sources;
  };
  std::vector<PendingDerivation> derivations;
  int link_counter = 0;

  if (events) {
    for (const xml::Element& el : events->children) {
      const std::string kind = strip(el.name);
      const std::string* id = el.attr("id");

      if (kind == "contextEvent") {
        ++ctx.report.counts["source_events"];
        const std::string target = el.attr_or("object");
        const std::string property = el.attr_or("property");
        auto obj = ctx.report.log.objects.find(Identifier{target});
        if (!target.empty() && !property.empty() && obj != ctx.report.log.objects.end()) {
          const Timestamp ts =
              ctx.parse_time(el.attr_or("timestamp"), id ? *id : target);
          obj->second.attributes[property].emplace_back(
              ts, detail::sniff_value(el.attr_or("value")));
          ++ctx.report.counts["context_events_applied"];
        } else {
          ctx.report.diagnostics.push_back(diag::warning(
              diag::kRecordDropped, id ? *id : target, "context event has no resolvable object"));
          ++ctx.report.counts["context_events_dropped"];
        }
        ++ctx.report.counts["events_skipped"];  // context events are not log events
        continue;
      }

      if (kind != "observation" && kind != "iotEvent" && kind != "processEvent") {
        return Error{ErrorKind::SchemaViolation, "unknown event kind <" + el.name + ">", el.name};
      }
      ++ctx.report.counts["source_events"];
      if (!id) return Error{ErrorKind::SchemaViolation, "event without id", el.name};

      CoreEvent ev;
      ev.event_id = Identifier{*id};
      ev.timestamp = ctx.parse_time(el.attr_or("timestamp"), *id);

      std::vector<std::pair<Identifier, std::string>> links;
      const std::string source = el.attr_or("source");
      std::vector<std::string> derived_from;
      {
        const std::string raw = el.attr_or("derivedFrom");
        size_t pos = 0;
        while (pos < raw.size()) {
          size_t next = raw.find(' ', pos);
          if (next == std::string::npos) next = raw.size();
          if (next > pos) derived_from.push_back(raw.substr(pos, next - pos));
          pos = next + 1;
        }
      }

      if (!source.empty()) {
        links.emplace_back(Identifier{source}, "recorded-by");
      } else if (!derived_from.empty()) {
        // derived events get a bottom-up analytics link as their data source
        Identifier link_id{"link:" + detail::fresh_id("analytics", link_counter)};
        ctx.add_object(CoreObject{link_id, "Analytics",
                                  ObjectClass::link(LinkDirection::BottomUp), {}});
        links.emplace_back(link_id, "derived-by");
      }

      for (const std::string& obj_id :
           [&] {
             std::vector<std::string> out;
             const std::string raw = el.attr_or("objects");
             size_t pos = 0;
             while (pos < raw.size()) {
               size_t next = raw.find(' ', pos);
               if (next == std::string::npos) next = raw.size();
               if (next > pos) out.push_back(raw.substr(pos, next - pos));
               pos = next + 1;
             }
             return out;
           }()) {
        links.emplace_back(Identifier{obj_id}, "involves");
      }

      if (kind == "observation") {
        ev.event_class = EventClass::Observation;
        ev.event_type = kObservedType;
      } else if (kind == "iotEvent") {
        ev.event_class = EventClass::IotEvent;
        const std::string label = el.attr_or("label");
        const std::string property = el.attr_or("property");
        // default the label to the observed property when known
        ev.event_type = !label.empty() ? label : (!property.empty() ? property : "iot_event");
      } else {
        ev.event_class = EventClass::ProcessEvent;
        const std::string activity = el.attr_or("activity");
        if (activity.empty()) {
          return Error{ErrorKind::SchemaViolation, "process event without activity", *id};
        }
        ev.activity = activity;
        ev.event_type = activity;
      }
      if (const std::string* property = el.attr(kind == "iotEvent" ? "property" : "property")) {
        if (kind != "processEvent") ev.attributes["property"] = AttributeValue(*property);
      }
      if (const std::string* value = el.attr("value")) {
        ev.attributes["value"] = detail::sniff_value(*value);
      }

      if (ctx.add_event(ev, links) && !derived_from.empty()) {
        derivations.push_back({ev.event_id, derived_from});
      }
    }
  }

  for (const PendingDerivation& d : derivations) {
    for (const std::string& src : d.sources) {
      ctx.add_e2e(EventEventRel{Identifier{src}, d.target, kDerivedFromQualifier});
    }
  }

  return ctx.finish();
}

// ---------------------------------------------------------------------------
// CAIRO
// ---------------------------------------------------------------------------

/// Translates a CAIRO log: one case object per trace, labeled points become
/// IoT events (unlabeled raw points are reclassified as observations, noted
/// in the report), and ambiguity annotations pass through verbatim under
/// the "cairo:ambiguity:" attribute prefix.
inline Result<ParseReport> parse_cairo(std::string_view document, std::string source_name = {}) {
  auto parsed = xml::parse_document(document);
  if (!parsed.ok()) return parsed.error();
  const xml::Element& root = parsed.value();
  if (root.name != "cairo:log" && root.name != "log") {
    return Error{ErrorKind::MalformedInput, "expected <cairo:log> document element", root.name};
  }

  detail::ParseContext ctx(std::move(source_name));
  int point_counter = 0;

  std::vector<const xml::Element*> traces;
  for (const xml::Element& child : root.children) {
    if (child.name == "cairo:trace" || child.name == "trace") traces.push_back(&child);
  }
  if (traces.empty()) {
    ctx.report.diagnostics.push_back(
        diag::warning(diag::kEmptyInput, ctx.data_source_id(), "document contains no traces"));
  }

  for (const xml::Element* trace : traces) {
    const std::string* trace_id = trace->attr("id");
    if (!trace_id) {
      return Error{ErrorKind::MalformedInput, "trace without id", "trace"};
    }
    ctx.add_object(CoreObject{Identifier{*trace_id}, "case", ObjectClass::case_object(), {}});

    std::vector<const xml::Element*> points;
    for (const xml::Element& child : trace->children) {
      if (child.name == "stream:point" || child.name == "point") points.push_back(&child);
    }
    if (points.empty()) {
      ctx.report.diagnostics.push_back(
          diag::warning(diag::kEmptyInput, *trace_id, "trace contains no events"));
    }

    for (const xml::Element* point : points) {
      ++ctx.report.counts["source_events"];
      CoreEvent ev;
      const std::string* id = point->attr("id");
      ev.event_id = Identifier{id ? *id : detail::fresh_id("point", point_counter)};
      ev.timestamp = ctx.parse_time(point->attr_or("timestamp"), ev.event_id.value);

      const std::string label = point->attr_or("label");
      if (!label.empty()) {
        ev.event_class = EventClass::IotEvent;
        ev.event_type = label;
      } else {
        ev.event_class = EventClass::Observation;
        ev.event_type = kObservedType;
        ++ctx.report.counts["points_reclassified_observation"];
      }

      for (const xml::Element& child : point->children) {
        const std::string* key = child.attr("key");
        const std::string* value = child.attr("value");
        if (!key || !value) continue;
        if (child.name == "ambiguity") {
          // not interpreted; preserved verbatim
          ev.attributes["cairo:ambiguity:" + *key] = AttributeValue(*value);
        } else if (child.name == "attribute") {
          ev.attributes[*key] = detail::sniff_value(*value);
        }
      }

      std::vector<std::pair<Identifier, std::string>> links;
      links.emplace_back(ctx.ensure_data_source(), "logged-by");
      links.emplace_back(Identifier{*trace_id}, "belongs-to");
      ctx.add_event(std::move(ev), links);
    }
  }

  return ctx.finish();
}

// ---------------------------------------------------------------------------
// Custom records
// ---------------------------------------------------------------------------

/// Applies a MappingConfig to a stream of flat JSON records (an array or
/// one record per line). Reserved keys: "id", "timestamp"/"time", "object",
/// "object_type", plus the configured bindings; everything else lands in
/// event attributes.
inline Result<ParseReport> parse_custom(std::string_view document, const MappingConfig& mapping,
                                        std::string source_name = {}) {
  if (mapping.activity_key.empty()) {
    return Error{ErrorKind::MappingError, "activity_key must be non-empty", "activity_key"};
  }

  std::vector<nlohmann::json> records;
  {
    nlohmann::json doc = nlohmann::json::parse(document, nullptr, false);
    if (doc.is_array()) {
      records.assign(doc.begin(), doc.end());
    } else {
      // fall back to one JSON record per line
      size_t pos = 0;
      size_t line_no = 0;
      while (pos < document.size()) {
        size_t end = document.find('\n', pos);
        if (end == std::string_view::npos) end = document.size();
        ++line_no;
        std::string_view line = document.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
          return Error{ErrorKind::MalformedInput,
                       "malformed record at line " + std::to_string(line_no),
                       std::to_string(line_no)};
        }
        records.push_back(std::move(rec));
      }
    }
  }
  for (const nlohmann::json& rec : records) {
    if (!rec.is_object()) {
      return Error{ErrorKind::MalformedInput, "records must be JSON objects"};
    }
  }

  detail::ParseContext ctx(std::move(source_name));
  if (records.empty()) {
    ctx.report.diagnostics.push_back(
        diag::warning(diag::kEmptyInput, ctx.data_source_id(), "document contains no records"));
  }

  auto classify = [&mapping](const std::string& object_type) {
    for (const ObjectClassRule& rule : mapping.object_class_rules) {
      if (rule.pattern == "*" || rule.pattern == object_type) return rule.object_class;
      if (!rule.pattern.empty() && rule.pattern.back() == '*' &&
          object_type.rfind(rule.pattern.substr(0, rule.pattern.size() - 1), 0) == 0) {
        return rule.object_class;
      }
    }
    return ObjectClass::other("unmapped");
  };

  int event_counter = 0;
  for (const nlohmann::json& rec : records) {
    ++ctx.report.counts["source_events"];
    CoreEvent ev;
    ev.event_id = Identifier{rec.contains("id") && rec["id"].is_string()
                                 ? rec["id"].get<std::string>()
                                 : detail::fresh_id("ev", event_counter)};
    std::string time_text;
    if (rec.contains("timestamp") && rec["timestamp"].is_string()) {
      time_text = rec["timestamp"].get<std::string>();
    } else if (rec.contains("time") && rec["time"].is_string()) {
      time_text = rec["time"].get<std::string>();
    }
    ev.timestamp = ctx.parse_time(time_text, ev.event_id.value);

    std::vector<std::pair<Identifier, std::string>> links;
    links.emplace_back(ctx.ensure_data_source(), mapping.qualifier("data_source", "recorded-by"));

    std::optional<std::string> activity;
    bool has_observation_key = false;
    for (const auto& [key, value] : rec.items()) {
      if (key == "id" || key == "timestamp" || key == "time") continue;
      if (key == mapping.activity_key) {
        activity = value.is_string() ? value.get<std::string>() : value.dump();
        continue;
      }
      if (mapping.resource_key && key == *mapping.resource_key) {
        const std::string name = value.is_string() ? value.get<std::string>() : value.dump();
        Identifier rid{name};
        if (!ctx.report.log.objects.count(rid)) {
          ctx.add_object(CoreObject{rid, "resource", ObjectClass::resource(), {}});
        }
        links.emplace_back(rid, mapping.qualifier("resource", "executed-by"));
        continue;
      }
      if (key == "object") {
        const std::string oid = value.is_string() ? value.get<std::string>() : value.dump();
        const std::string otype = rec.value("object_type", std::string("object"));
        Identifier obj_id{oid};
        if (!ctx.report.log.objects.count(obj_id)) {
          ctx.add_object(CoreObject{obj_id, otype, classify(otype), {}});
        }
        links.emplace_back(obj_id, mapping.qualifier("e2o", "involves"));
        continue;
      }
      if (key == "object_type") continue;
      auto converted = json_to_value(value, key);
      if (!converted.ok()) {
        return Error{ErrorKind::MalformedInput, "unsupported value for key \"" + key + "\"", key};
      }
      for (const std::string& obs_key : mapping.observation_attribute_keys) {
        if (key == obs_key) has_observation_key = true;
      }
      ev.attributes[key] = converted.value();
    }

    if (activity) {
      ev.event_class = EventClass::ProcessEvent;
      ev.activity = *activity;
      ev.event_type = *activity;
    } else if (has_observation_key) {
      ev.event_class = EventClass::Observation;
      ev.event_type = kObservedType;
    } else {
      ev.event_class = EventClass::IotEvent;
      ev.event_type = "iot_event";
    }
    ctx.add_event(std::move(ev), links);
  }

  return ctx.finish();
}

}  // namespace corelog
