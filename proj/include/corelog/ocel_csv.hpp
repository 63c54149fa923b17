#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corelog/ocel.hpp"

namespace corelog {
namespace csv {

inline bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline std::string quote(std::string_view field) {
  if (!needs_quoting(field)) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << "\r\n";
}

/// RFC 4180 reader. Returns rows of fields; reports the 1-based line of the
/// first malformed construct (stray quote, unterminated quoted field).
inline Result<std::vector<std::vector<std::string>>> read_rows(const std::string& text,
                                                               const std::string& file) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  size_t line = 1;
  bool in_quotes = false;
  bool field_quoted = false;
  bool field_open = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    field_open = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_open || field_quoted) {
          return Error{ErrorKind::DecodeError,
                       file + ": stray quote at line " + std::to_string(line), file};
        }
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;  // handled by \n
        end_row();
        ++line;
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (field_quoted) {
          return Error{ErrorKind::DecodeError,
                       file + ": content after closing quote at line " + std::to_string(line),
                       file};
        }
        field_open = true;
        field += c;
    }
  }
  if (in_quotes) {
    return Error{ErrorKind::DecodeError, file + ": unterminated quoted field", file};
  }
  if (field_open || field_quoted || !row.empty()) end_row();
  return rows;
}

}  // namespace csv

namespace detail {

inline std::vector<std::string> attr_columns_for_objects(const OcelDocument& doc) {
  std::set<std::string> keys;
  for (const OcelObject& obj : doc.objects) {
    for (const OcelObjectAttribute& a : obj.attributes) keys.insert(a.name);
  }
  return {keys.begin(), keys.end()};
}

inline std::vector<std::string> attr_columns_for_events(const OcelDocument& doc) {
  std::set<std::string> keys;
  for (const OcelEvent& ev : doc.events) {
    for (const OcelEventAttribute& a : ev.attributes) keys.insert(a.name);
  }
  return {keys.begin(), keys.end()};
}

}  // namespace detail

/// Writes the relational CSV bundle: objects.csv, events.csv,
/// object_attribute_changes.csv, e2o.csv, o2o.csv. Attribute values use the
/// column convention "ocel:attr:<key>". Byte-deterministic for a canonical
/// document.
inline Status write_relational(const OcelDocument& doc, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return fail(ErrorKind::IoError, "cannot create directory " + dir.string());

  auto open = [&](const char* name, std::ofstream& out) -> Status {
    out.open(dir / name, std::ios::binary);
    if (!out) return fail(ErrorKind::IoError, std::string("cannot write ") + name, name);
    return ok_status();
  };

  const auto obj_attr_keys = detail::attr_columns_for_objects(doc);
  const auto ev_attr_keys = detail::attr_columns_for_events(doc);
  for (const std::string& key : obj_attr_keys) {
    if (key == "ocel:oid" || key == "ocel:type") {
      return fail(ErrorKind::ReservedKeyCollision, "attribute key collides with column: " + key,
                  key);
    }
  }

  {
    std::ofstream out;
    if (auto st = open("objects.csv", out); !st.ok()) return st;
    std::vector<std::string> header{"ocel:oid", "ocel:type"};
    for (const std::string& key : obj_attr_keys) header.push_back("ocel:attr:" + key);
    csv::write_row(out, header);
    for (const OcelObject& obj : doc.objects) {
      std::vector<std::string> row{obj.id.value, obj.type};
      for (const std::string& key : obj_attr_keys) {
        // latest value per key; full history lives in the changes table
        const OcelObjectAttribute* last = nullptr;
        for (const OcelObjectAttribute& a : obj.attributes) {
          if (a.name == key && (!last || last->time <= a.time)) last = &a;
        }
        row.push_back(last ? encode_cell(last->value) : std::string{});
      }
      csv::write_row(out, row);
    }
  }
  {
    std::ofstream out;
    if (auto st = open("object_attribute_changes.csv", out); !st.ok()) return st;
    csv::write_row(out, {"ocel:oid", "name", "time", "value"});
    for (const OcelObject& obj : doc.objects) {
      for (const OcelObjectAttribute& a : obj.attributes) {
        csv::write_row(out, {obj.id.value, a.name, a.time.to_iso8601(), encode_cell(a.value)});
      }
    }
  }
  {
    std::ofstream out;
    if (auto st = open("events.csv", out); !st.ok()) return st;
    std::vector<std::string> header{"ocel:eid", "ocel:type", "ocel:timestamp"};
    for (const std::string& key : ev_attr_keys) header.push_back("ocel:attr:" + key);
    csv::write_row(out, header);
    for (const OcelEvent& ev : doc.events) {
      std::vector<std::string> row{ev.id.value, ev.type, ev.time.to_iso8601()};
      for (const std::string& key : ev_attr_keys) {
        const OcelEventAttribute* found = nullptr;
        for (const OcelEventAttribute& a : ev.attributes) {
          if (a.name == key) found = &a;
        }
        row.push_back(found ? encode_cell(found->value) : std::string{});
      }
      csv::write_row(out, row);
    }
  }
  {
    std::ofstream out;
    if (auto st = open("e2o.csv", out); !st.ok()) return st;
    csv::write_row(out, {"ocel:eid", "ocel:oid", "ocel:qualifier"});
    for (const OcelEvent& ev : doc.events) {
      for (const OcelRelationship& r : ev.relationships) {
        csv::write_row(out, {ev.id.value, r.object_id.value, r.qualifier});
      }
    }
  }
  {
    std::ofstream out;
    if (auto st = open("o2o.csv", out); !st.ok()) return st;
    csv::write_row(out, {"source", "target", "qualifier"});
    for (const OcelObject& obj : doc.objects) {
      for (const OcelRelationship& r : obj.relationships) {
        csv::write_row(out, {obj.id.value, r.object_id.value, r.qualifier});
      }
    }
  }
  return ok_status();
}

/// Reads a CSV bundle back into a document (inverse of write_relational up
/// to canonical form; attribute schemas are re-inferred from the data).
inline Result<OcelDocument> read_relational(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;

  auto load = [&](const char* name) -> Result<std::vector<std::vector<std::string>>> {
    const fs::path path = dir / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      return Error{ErrorKind::DecodeError, "missing file " + std::string(name), name};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return csv::read_rows(buf.str(), name);
  };

  auto check_header = [](const std::vector<std::vector<std::string>>& rows, const char* name,
                         const std::vector<std::string>& fixed,
                         bool allow_attr_columns) -> Status {
    if (rows.empty()) return fail(ErrorKind::DecodeError, std::string(name) + ": missing header", name);
    const auto& header = rows.front();
    if (header.size() < fixed.size()) {
      return fail(ErrorKind::DecodeError, std::string(name) + ": header mismatch", name);
    }
    for (size_t i = 0; i < fixed.size(); ++i) {
      if (header[i] != fixed[i]) {
        return fail(ErrorKind::DecodeError,
                    std::string(name) + ": header mismatch, expected " + fixed[i], name);
      }
    }
    if (!allow_attr_columns && header.size() != fixed.size()) {
      return fail(ErrorKind::DecodeError, std::string(name) + ": header mismatch", name);
    }
    for (size_t i = fixed.size(); i < header.size(); ++i) {
      if (header[i].rfind("ocel:attr:", 0) != 0) {
        return fail(ErrorKind::DecodeError,
                    std::string(name) + ": unexpected column " + header[i], name);
      }
    }
    return ok_status();
  };

  OcelDocument doc;
  std::map<Identifier, size_t> object_index;
  std::map<Identifier, size_t> event_index;
  std::map<std::string, std::map<std::string, std::set<std::string>>> obj_schema, ev_schema;

  auto objects = load("objects.csv");
  if (!objects.ok()) return objects.error();
  if (auto st = check_header(objects.value(), "objects.csv", {"ocel:oid", "ocel:type"}, true);
      !st.ok()) {
    return st.error();
  }
  for (size_t i = 1; i < objects.value().size(); ++i) {
    const auto& row = objects.value()[i];
    if (row.size() < 2) {
      return Error{ErrorKind::DecodeError,
                   "objects.csv: malformed row at line " + std::to_string(i + 1), "objects.csv"};
    }
    Identifier id{row[0]};
    if (object_index.count(id)) {
      return Error{ErrorKind::DecodeError, "objects.csv: duplicate id \"" + id.value + "\"",
                   id.value};
    }
    object_index[id] = doc.objects.size();
    obj_schema[row[1]];
    doc.objects.push_back(OcelObject{id, row[1], {}, {}});
    // attribute cells are a denormalized view; values come from the changes table
  }

  auto changes = load("object_attribute_changes.csv");
  if (!changes.ok()) return changes.error();
  if (auto st = check_header(changes.value(), "object_attribute_changes.csv",
                             {"ocel:oid", "name", "time", "value"}, false);
      !st.ok()) {
    return st.error();
  }
  for (size_t i = 1; i < changes.value().size(); ++i) {
    const auto& row = changes.value()[i];
    if (row.size() != 4) {
      return Error{ErrorKind::DecodeError,
                   "object_attribute_changes.csv: malformed row at line " + std::to_string(i + 1),
                   "object_attribute_changes.csv"};
    }
    auto it = object_index.find(Identifier{row[0]});
    if (it == object_index.end()) {
      return Error{ErrorKind::DecodeError,
                   "object_attribute_changes.csv: unknown object \"" + row[0] + "\" at line " +
                       std::to_string(i + 1),
                   row[0]};
    }
    auto time = parse_timestamp(row[2]);
    if (!time) {
      return Error{ErrorKind::DecodeError,
                   "object_attribute_changes.csv: malformed time at line " + std::to_string(i + 1),
                   row[2]};
    }
    const AttributeValue value = decode_cell(row[3]);
    OcelObject& obj = doc.objects[it->second];
    obj.attributes.push_back({row[1], time->value, value});
    detail::infer_schema(obj_schema, obj.type, row[1], value);
  }

  auto events = load("events.csv");
  if (!events.ok()) return events.error();
  if (auto st = check_header(events.value(), "events.csv",
                             {"ocel:eid", "ocel:type", "ocel:timestamp"}, true);
      !st.ok()) {
    return st.error();
  }
  const auto& ev_header = events.value().front();
  for (size_t i = 1; i < events.value().size(); ++i) {
    const auto& row = events.value()[i];
    if (row.size() != ev_header.size()) {
      return Error{ErrorKind::DecodeError,
                   "events.csv: malformed row at line " + std::to_string(i + 1), "events.csv"};
    }
    Identifier id{row[0]};
    if (event_index.count(id)) {
      return Error{ErrorKind::DecodeError, "events.csv: duplicate id \"" + id.value + "\"",
                   id.value};
    }
    auto time = parse_timestamp(row[2]);
    if (!time) {
      return Error{ErrorKind::DecodeError,
                   "events.csv: malformed timestamp at line " + std::to_string(i + 1), row[2]};
    }
    OcelEvent ev{id, row[1], time->value, {}, {}};
    for (size_t col = 3; col < row.size(); ++col) {
      if (row[col].empty()) continue;  // absent attribute
      const std::string key = ev_header[col].substr(10);
      const AttributeValue value = decode_cell(row[col]);
      ev.attributes.push_back({key, value});
      detail::infer_schema(ev_schema, ev.type, key, value);
    }
    ev_schema[ev.type];
    event_index[id] = doc.events.size();
    doc.events.push_back(std::move(ev));
  }

  auto e2o = load("e2o.csv");
  if (!e2o.ok()) return e2o.error();
  if (auto st = check_header(e2o.value(), "e2o.csv", {"ocel:eid", "ocel:oid", "ocel:qualifier"},
                             false);
      !st.ok()) {
    return st.error();
  }
  for (size_t i = 1; i < e2o.value().size(); ++i) {
    const auto& row = e2o.value()[i];
    if (row.size() != 3) {
      return Error{ErrorKind::DecodeError,
                   "e2o.csv: malformed row at line " + std::to_string(i + 1), "e2o.csv"};
    }
    auto it = event_index.find(Identifier{row[0]});
    if (it == event_index.end()) {
      return Error{ErrorKind::DecodeError,
                   "e2o.csv: unknown event \"" + row[0] + "\" at line " + std::to_string(i + 1),
                   row[0]};
    }
    doc.events[it->second].relationships.push_back({Identifier{row[1]}, row[2]});
  }

  auto o2o = load("o2o.csv");
  if (!o2o.ok()) return o2o.error();
  if (auto st = check_header(o2o.value(), "o2o.csv", {"source", "target", "qualifier"}, false);
      !st.ok()) {
    return st.error();
  }
  for (size_t i = 1; i < o2o.value().size(); ++i) {
    const auto& row = o2o.value()[i];
    if (row.size() != 3) {
      return Error{ErrorKind::DecodeError,
                   "o2o.csv: malformed row at line " + std::to_string(i + 1), "o2o.csv"};
    }
    auto it = object_index.find(Identifier{row[0]});
    if (it == object_index.end()) {
      return Error{ErrorKind::DecodeError,
                   "o2o.csv: unknown object \"" + row[0] + "\" at line " + std::to_string(i + 1),
                   row[0]};
    }
    doc.objects[it->second].relationships.push_back({Identifier{row[1]}, row[2]});
  }

  doc.object_types = detail::schemas_from(obj_schema);
  doc.event_types = detail::schemas_from(ev_schema);
  return doc;
}

}  // namespace corelog
