#pragma once

#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "corelog/diagnostics.hpp"
#include "corelog/json_util.hpp"
#include "corelog/model.hpp"

namespace corelog {

/// Spill triggers; at least one of count/age must be set.
struct SpillPolicy {
  std::optional<std::size_t> max_buffered_records;
  std::optional<std::chrono::milliseconds> max_buffer_age;
  std::filesystem::path segment_directory;
};

struct Segment {
  std::uint64_t sequence_number = 0;
  std::uint64_t record_count = 0;
  Timestamp min_timestamp;  // over event records; unset if none
  Timestamp max_timestamp;
  std::filesystem::path path;
};

using StreamRecord =
    std::variant<CoreObject, CoreEvent, EventObjectRel, ObjectObjectRel, EventEventRel>;

struct FinalizeResult {
  CoreLog log;
  std::vector<Diagnostic> diagnostics;
  std::vector<Segment> segments;
};

namespace detail {

inline constexpr char kSegmentMagic[8] = {'C', 'O', 'R', 'E', 'S', 'E', 'G', '1'};

inline void put_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_le64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint64_t get_le(const unsigned char* p, int n) {
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline nlohmann::json record_to_json(const StreamRecord& rec) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, CoreObject>) {
          j["kind"] = "object";
          j["id"] = r.object_id.value;
          j["type"] = r.object_type;
          j["class"] = r.object_class.to_string();
          if (r.object_class.kind() == ObjectClass::Kind::Link) {
            j["link_direction"] =
                r.object_class.direction() == LinkDirection::BottomUp ? "bottom_up" : "top_down";
          }
          nlohmann::json attrs = nlohmann::json::object();
          for (const auto& [name, history] : r.attributes) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& [ts, value] : history) {
              rows.push_back({{"time", ts.epoch_ms}, {"value", value_to_json(value)}});
            }
            attrs[name] = std::move(rows);
          }
          j["attributes"] = std::move(attrs);
        } else if constexpr (std::is_same_v<T, CoreEvent>) {
          j["kind"] = "event";
          j["id"] = r.event_id.value;
          j["class"] = to_string(r.event_class);
          j["type"] = r.event_type;
          if (r.activity) j["activity"] = *r.activity;
          j["time"] = r.timestamp.epoch_ms;
          nlohmann::json attrs = nlohmann::json::object();
          for (const auto& [name, value] : r.attributes) attrs[name] = value_to_json(value);
          j["attributes"] = std::move(attrs);
        } else if constexpr (std::is_same_v<T, EventObjectRel>) {
          j["kind"] = "e2o";
          j["event"] = r.event_id.value;
          j["object"] = r.object_id.value;
          j["qualifier"] = r.qualifier;
        } else if constexpr (std::is_same_v<T, ObjectObjectRel>) {
          j["kind"] = "o2o";
          j["source"] = r.source_id.value;
          j["target"] = r.target_id.value;
          j["qualifier"] = r.qualifier;
        } else {
          j["kind"] = "e2e";
          j["source"] = r.source_event_id.value;
          j["target"] = r.target_event_id.value;
          j["qualifier"] = r.qualifier;
        }
      },
      rec);
  return j;
}

inline Result<StreamRecord> record_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    return Error{ErrorKind::MalformedRecord, "record has no kind"};
  }
  const std::string kind = j["kind"].get<std::string>();
  auto text = [&j](const char* key) -> Result<std::string> {
    if (!j.contains(key) || !j[key].is_string()) {
      return Error{ErrorKind::MalformedRecord, std::string("missing field \"") + key + "\""};
    }
    return j[key].get<std::string>();
  };
  if (kind == "object") {
    CoreObject obj;
    auto id = text("id");
    if (!id.ok()) return id.error();
    obj.object_id = Identifier{id.value()};
    auto type = text("type");
    if (!type.ok()) return type.error();
    obj.object_type = type.value();
    auto cls = text("class");
    if (!cls.ok()) return cls.error();
    std::optional<LinkDirection> direction;
    if (j.contains("link_direction")) {
      if (!j["link_direction"].is_string()) {
        return Error{ErrorKind::MalformedRecord, "bad link direction"};
      }
      const std::string name = j["link_direction"].get<std::string>();
      if (name == "bottom_up") {
        direction = LinkDirection::BottomUp;
      } else if (name == "top_down") {
        direction = LinkDirection::TopDown;
      } else {
        return Error{ErrorKind::MalformedRecord, "bad link direction", name};
      }
    }
    auto parsed_class = ObjectClass::parse(cls.value(), direction);
    if (!parsed_class) {
      return Error{ErrorKind::MalformedRecord, "unknown object class", cls.value()};
    }
    obj.object_class = *parsed_class;
    if (j.contains("attributes")) {
      for (const auto& [name, rows] : j["attributes"].items()) {
        if (!rows.is_array()) return Error{ErrorKind::MalformedRecord, "bad attribute history"};
        for (const auto& row : rows) {
          if (!row.is_object() || !row.contains("time") || !row["time"].is_number_integer()) {
            return Error{ErrorKind::MalformedRecord, "bad attribute row"};
          }
          auto value = json_to_value(row["value"], name);
          if (!value.ok()) return value.error();
          obj.attributes[name].emplace_back(Timestamp{row["time"].get<std::int64_t>()},
                                            value.value());
        }
      }
    }
    return StreamRecord{std::move(obj)};
  }
  if (kind == "event") {
    CoreEvent ev;
    auto id = text("id");
    if (!id.ok()) return id.error();
    ev.event_id = Identifier{id.value()};
    auto cls = text("class");
    if (!cls.ok()) return cls.error();
    auto parsed_class = parse_event_class(cls.value());
    if (!parsed_class) {
      return Error{ErrorKind::MalformedRecord, "unknown event class", cls.value()};
    }
    ev.event_class = *parsed_class;
    auto type = text("type");
    if (!type.ok()) return type.error();
    ev.event_type = type.value();
    if (j.contains("activity")) {
      if (!j["activity"].is_string()) return Error{ErrorKind::MalformedRecord, "bad activity"};
      ev.activity = j["activity"].get<std::string>();
    }
    if (!j.contains("time") || !j["time"].is_number_integer()) {
      return Error{ErrorKind::MalformedRecord, "missing event time"};
    }
    ev.timestamp = Timestamp{j["time"].get<std::int64_t>()};
    if (j.contains("attributes")) {
      for (const auto& [name, value] : j["attributes"].items()) {
        auto converted = json_to_value(value, name);
        if (!converted.ok()) return converted.error();
        ev.attributes[name] = converted.value();
      }
    }
    return StreamRecord{std::move(ev)};
  }
  if (kind == "e2o") {
    auto event = text("event");
    if (!event.ok()) return event.error();
    auto object = text("object");
    if (!object.ok()) return object.error();
    auto q = text("qualifier");
    if (!q.ok()) return q.error();
    return StreamRecord{
        EventObjectRel{Identifier{event.value()}, Identifier{object.value()}, q.value()}};
  }
  if (kind == "o2o" || kind == "e2e") {
    auto source = text("source");
    if (!source.ok()) return source.error();
    auto target = text("target");
    if (!target.ok()) return target.error();
    auto q = text("qualifier");
    if (!q.ok()) return q.error();
    if (kind == "o2o") {
      return StreamRecord{
          ObjectObjectRel{Identifier{source.value()}, Identifier{target.value()}, q.value()}};
    }
    return StreamRecord{
        EventEventRel{Identifier{source.value()}, Identifier{target.value()}, q.value()}};
  }
  return Error{ErrorKind::MalformedRecord, "unknown record kind \"" + kind + "\"", kind};
}

}  // namespace detail

/// Reads one segment file back. A truncated ("torn") final record or a
/// count-trailer mismatch is reported, never silently dropped.
inline Result<std::vector<StreamRecord>> read_segment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error{ErrorKind::IoError, "cannot open segment", path.string()};
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16 ||
      std::memcmp(bytes.data(), detail::kSegmentMagic, sizeof(detail::kSegmentMagic)) != 0) {
    return Error{ErrorKind::MalformedRecord, "bad segment magic", path.string()};
  }
  const std::size_t body_end = bytes.size() - 8;
  const std::uint64_t declared = detail::get_le(p + body_end, 8);

  std::vector<StreamRecord> out;
  std::size_t pos = sizeof(detail::kSegmentMagic);
  while (pos < body_end) {
    if (body_end - pos < 4) {
      return Error{ErrorKind::MalformedRecord, "torn record framing", path.string()};
    }
    const std::uint64_t len = detail::get_le(p + pos, 4);
    pos += 4;
    if (body_end - pos < len) {
      return Error{ErrorKind::MalformedRecord, "torn record payload", path.string()};
    }
    nlohmann::json j = nlohmann::json::parse(bytes.substr(pos, len), nullptr, false);
    if (j.is_discarded()) {
      return Error{ErrorKind::MalformedRecord, "unparseable record", path.string()};
    }
    auto rec = detail::record_from_json(j);
    if (!rec.ok()) return rec.error();
    out.push_back(std::move(rec.value()));
    pos += len;
  }
  if (out.size() != declared) {
    return Error{ErrorKind::MalformedRecord, "record count trailer mismatch", path.string()};
  }
  return out;
}

/// One bounded-memory ingestion session: records buffer in memory, spill to
/// framed segment files when a policy threshold trips, and merge back into a
/// single canonical log at finalize. Single writer; see read_segment for
/// concurrent readers of completed files.
class StreamSession {
 public:
  static Result<StreamSession> open(SpillPolicy policy,
                                    const std::map<std::string, std::string>& source_descriptor) {
    if (!policy.max_buffered_records && !policy.max_buffer_age) {
      return Error{ErrorKind::PreconditionViolated, "spill policy has no trigger set"};
    }
    if (policy.max_buffered_records && *policy.max_buffered_records == 0) {
      return Error{ErrorKind::PreconditionViolated, "max_buffered_records must be positive"};
    }
    std::error_code ec;
    std::filesystem::create_directories(policy.segment_directory, ec);
    {
      // cheapest reliable writability probe: touch and remove a marker
      const auto probe = policy.segment_directory / ".corelog-probe";
      std::ofstream out(probe, std::ios::binary);
      if (!out) {
        return Error{ErrorKind::IoError, "segment directory not writable",
                     policy.segment_directory.string()};
      }
      out.close();
      std::filesystem::remove(probe, ec);
    }

    StreamSession session;
    session.policy_ = std::move(policy);
    // an empty descriptor means the stream carries its own objects and no
    // data source should be synthesized
    if (!source_descriptor.empty()) {
      auto find = [&source_descriptor](const char* key) -> std::string {
        auto it = source_descriptor.find(key);
        return it != source_descriptor.end() ? it->second : std::string();
      };
      const std::string kind = find("kind");
      const std::string name = find("name");
      CoreObject ds;
      ds.object_id = Identifier{"ds:" + (name.empty() ? std::string("stream") : name)};
      ds.object_type = kind.empty() ? "information system" : kind;
      ds.object_class =
          kind == "sensor" ? ObjectClass::sensor() : ObjectClass::information_system();
      for (const auto& [key, value] : source_descriptor) {
        ds.attributes[key] = {{Timestamp{0}, AttributeValue(value)}};
      }
      session.known_ids_.insert(ds.object_id);
      session.data_source_ = std::move(ds);
    }
    return session;
  }

  /// Id of the synthesized data source; empty when none was requested.
  Identifier data_source_id() const {
    return data_source_ ? data_source_->object_id : Identifier{};
  }
  std::size_t buffered() const { return buffer_.size(); }
  const std::vector<Segment>& segments() const { return segments_; }

  Status ingest(StreamRecord record) {
    if (closed_) return fail(ErrorKind::PreconditionViolated, "session is closed");
    if (const Identifier* id = record_id(record)) {
      if (!id->valid()) return fail(ErrorKind::MalformedRecord, "invalid identifier", id->value);
      if (known_ids_.count(*id)) {
        return fail(ErrorKind::DuplicateId, "duplicate record id", id->value);
      }
    }
    if (const CoreEvent* ev = std::get_if<CoreEvent>(&record)) {
      if (auto err = check_event_class_rules(*ev)) {
        return fail(ErrorKind::MalformedRecord, err->message, ev->event_id.value);
      }
    }

    track(record);
    buffer_.push_back(std::move(record));
    if (buffer_.size() == 1) oldest_ = std::chrono::steady_clock::now();

    const bool count_trip =
        policy_.max_buffered_records && buffer_.size() >= *policy_.max_buffered_records;
    const bool age_trip = policy_.max_buffer_age &&
                          std::chrono::steady_clock::now() - oldest_ >= *policy_.max_buffer_age;
    if (count_trip || age_trip) {
      auto spilled = spill();
      if (!spilled.ok()) return spilled.error();
    }
    return ok_status();
  }

  Result<Segment> spill() {
    if (closed_) return Error{ErrorKind::PreconditionViolated, "session is closed"};
    if (buffer_.empty()) return Error{ErrorKind::PreconditionViolated, "buffer is empty"};

    Segment seg;
    seg.sequence_number = segments_.size();
    seg.record_count = buffer_.size();
    seg.path = policy_.segment_directory /
               ("segment-" + std::to_string(seg.sequence_number) + ".coreseg");

    std::string bytes(detail::kSegmentMagic, sizeof(detail::kSegmentMagic));
    for (const StreamRecord& rec : buffer_) {
      if (const CoreEvent* ev = std::get_if<CoreEvent>(&rec)) {
        if (!seg.min_timestamp.is_set() || ev->timestamp < seg.min_timestamp) {
          seg.min_timestamp = ev->timestamp;
        }
        if (!seg.max_timestamp.is_set() || seg.max_timestamp < ev->timestamp) {
          seg.max_timestamp = ev->timestamp;
        }
      }
      const std::string payload = detail::record_to_json(rec).dump();
      detail::put_le32(bytes, static_cast<std::uint32_t>(payload.size()));
      bytes += payload;
    }
    detail::put_le64(bytes, seg.record_count);

    // write to a side file first so a failure leaves the buffer and the
    // directory untouched
    const auto tmp = seg.path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        return Error{ErrorKind::IoError, "segment write failed", seg.path.string()};
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, seg.path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      return Error{ErrorKind::IoError, "segment rename failed", seg.path.string()};
    }

    std::uint64_t offset = 0;
    for (const StreamRecord& rec : buffer_) {
      if (const Identifier* id = record_id(rec)) {
        lookup_[*id] = {seg.sequence_number, offset};
      }
      ++offset;
    }
    buffer_.clear();
    segments_.push_back(seg);
    return seg;
  }

  /// Location of a spilled record: (segment sequence number, record offset).
  std::optional<std::pair<std::uint64_t, std::uint64_t>> locate(const Identifier& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t pending_relationships() const { return pending_.size(); }

  Result<FinalizeResult> finalize() {
    if (closed_) return Error{ErrorKind::PreconditionViolated, "session is closed"};
    if (!buffer_.empty()) {
      auto spilled = spill();
      if (!spilled.ok()) return spilled.error();
    }
    closed_ = true;

    FinalizeResult result;
    result.segments = segments_;
    result.log = new_log();
    if (data_source_) result.log.objects.emplace(data_source_->object_id, *data_source_);

    for (const Segment& seg : segments_) {
      auto records = read_segment(seg.path);
      if (!records.ok()) {
        Error err = records.error();
        err.message += " (segment " + std::to_string(seg.sequence_number) + ")";
        return err;
      }
      for (StreamRecord& rec : records.value()) apply(result.log, std::move(rec));
    }

    // relations whose endpoints never arrived
    std::set<std::string> missing;
    for (const auto& [id, rels] : pending_) missing.insert(id.value);
    for (const EventObjectRel& rel : result.log.e2o) {
      if (!result.log.events.count(rel.event_id)) missing.insert(rel.event_id.value);
      if (!result.log.objects.count(rel.object_id)) missing.insert(rel.object_id.value);
    }
    for (const ObjectObjectRel& rel : result.log.o2o) {
      if (!result.log.objects.count(rel.source_id)) missing.insert(rel.source_id.value);
      if (!result.log.objects.count(rel.target_id)) missing.insert(rel.target_id.value);
    }
    for (const EventEventRel& rel : result.log.e2e) {
      if (!result.log.events.count(rel.source_event_id)) {
        missing.insert(rel.source_event_id.value);
      }
      if (!result.log.events.count(rel.target_event_id)) {
        missing.insert(rel.target_event_id.value);
      }
    }
    for (const std::string& id : missing) {
      result.diagnostics.push_back(
          diag::error(diag::kDanglingRef, id, "stream relationship endpoint never arrived"));
    }
    sort_diagnostics(result.diagnostics);
    result.log = canonicalize(result.log);
    return result;
  }

 private:
  static const Identifier* record_id(const StreamRecord& rec) {
    if (const CoreObject* obj = std::get_if<CoreObject>(&rec)) return &obj->object_id;
    if (const CoreEvent* ev = std::get_if<CoreEvent>(&rec)) return &ev->event_id;
    return nullptr;
  }

  void track(const StreamRecord& rec) {
    if (const Identifier* id = record_id(rec)) {
      known_ids_.insert(*id);
      pending_.erase(*id);
      return;
    }
    auto endpoints = [this](const Identifier& a, const Identifier& b) {
      if (!known_ids_.count(a)) pending_[a];
      if (!known_ids_.count(b)) pending_[b];
    };
    if (const EventObjectRel* rel = std::get_if<EventObjectRel>(&rec)) {
      endpoints(rel->event_id, rel->object_id);
    } else if (const ObjectObjectRel* rel = std::get_if<ObjectObjectRel>(&rec)) {
      endpoints(rel->source_id, rel->target_id);
    } else if (const EventEventRel* rel = std::get_if<EventEventRel>(&rec)) {
      endpoints(rel->source_event_id, rel->target_event_id);
    }
  }

  static void apply(CoreLog& log, StreamRecord rec) {
    std::visit(
        [&log](auto&& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, CoreObject>) {
            log.objects.emplace(r.object_id, std::move(r));
          } else if constexpr (std::is_same_v<T, CoreEvent>) {
            log.events.emplace(r.event_id, std::move(r));
          } else if constexpr (std::is_same_v<T, EventObjectRel>) {
            log.e2o.insert(std::move(r));
          } else if constexpr (std::is_same_v<T, ObjectObjectRel>) {
            log.o2o.insert(std::move(r));
          } else {
            log.e2e.insert(std::move(r));
          }
        },
        std::move(rec));
  }

  SpillPolicy policy_;
  std::optional<CoreObject> data_source_;
  std::vector<StreamRecord> buffer_;
  std::vector<Segment> segments_;
  std::set<Identifier> known_ids_;
  std::map<Identifier, std::pair<std::uint64_t, std::uint64_t>> lookup_;
  std::map<Identifier, int> pending_;  // id still unseen → marker
  std::chrono::steady_clock::time_point oldest_{};
  bool closed_ = false;
};

inline Result<StreamSession> open_session(
    SpillPolicy policy, const std::map<std::string, std::string>& source_descriptor) {
  return StreamSession::open(std::move(policy), source_descriptor);
}

}  // namespace corelog
