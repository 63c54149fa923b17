#pragma once

// Shared test helpers: deterministic random log generation, the worked
// filtering-batch example log, temp directories, and independent oracles.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corelog/corelog.hpp"

namespace testsupport {

using namespace corelog;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "dir") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("corelog-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// ---------------------------------------------------------------------------
// Random strictly-valid logs
// ---------------------------------------------------------------------------

inline AttributeValue random_value(std::mt19937& rng) {
  switch (rng() % 6) {
    case 0: return AttributeValue(nullptr);
    case 1: return AttributeValue(rng() % 2 == 0);
    case 2: return AttributeValue(static_cast<std::int64_t>(static_cast<std::int32_t>(rng())));
    case 3: {
      std::uniform_real_distribution<double> dist(-1e6, 1e6);
      return AttributeValue(dist(rng));
    }
    case 4: {
      // texts that collide with other lexical forms keep the codecs honest
      static const char* tricky[] = {"true",  "false", "null", "123",          "-7.5",
                                     "",      "'lead", "a,b",  "line\nbreak",  "\"q\"",
                                     "  pad", "1e3",   "zäh",  "ends space ",  "0"};
      return AttributeValue(std::string(tricky[rng() % (sizeof(tricky) / sizeof(*tricky))]));
    }
    default: {
      std::string s;
      const int len = 1 + rng() % 12;
      for (int i = 0; i < len; ++i) s += static_cast<char>('a' + rng() % 26);
      return AttributeValue(s);
    }
  }
}

/// Generates a strictly valid random CoreLog: every event has exactly one
/// data-source neighbor and at least one business neighbor, and the e2e
/// edges follow the event index order, so they cannot form a cycle.
inline CoreLog random_log(std::mt19937& rng, int max_events = 200, int max_objects = 50,
                          int max_e2e = 100) {
  CoreLog log = new_log();
  const int n_objects = 3 + rng() % std::max(1, max_objects - 2);
  const int n_events = 1 + rng() % max_events;

  std::vector<Identifier> data_sources, businesses;
  for (int i = 0; i < n_objects; ++i) {
    CoreObject obj;
    obj.object_id = Identifier{"obj" + std::to_string(i)};
    if (i == 0 || (i != 1 && rng() % 4 == 0)) {
      switch (rng() % 3) {
        case 0: obj.object_class = ObjectClass::sensor(); obj.object_type = "sensor"; break;
        case 1:
          obj.object_class = ObjectClass::information_system();
          obj.object_type = "system";
          break;
        default:
          obj.object_class = ObjectClass::link(rng() % 2 == 0 ? LinkDirection::BottomUp
                                                              : LinkDirection::TopDown);
          obj.object_type = "link";
      }
      data_sources.push_back(obj.object_id);
    } else if (i == 1 || rng() % 3 != 0) {
      obj.object_class = rng() % 2 == 0 ? ObjectClass::case_object() : ObjectClass::context_object();
      obj.object_type = rng() % 2 == 0 ? "order" : "room";
      businesses.push_back(obj.object_id);
    } else {
      switch (rng() % 4) {
        case 0: obj.object_class = ObjectClass::resource(); break;
        case 1: obj.object_class = ObjectClass::machine(); break;
        case 2: obj.object_class = ObjectClass::activity(); break;
        default: obj.object_class = ObjectClass::other("misc" + std::to_string(rng() % 3));
      }
      obj.object_type = "general";
    }
    const int n_attrs = rng() % 4;
    for (int a = 0; a < n_attrs; ++a) {
      AttributeHistory& history = obj.attributes["attr" + std::to_string(rng() % 5)];
      const int n_rows = 1 + rng() % 3;
      for (int r = 0; r < n_rows; ++r) {
        history.emplace_back(Timestamp{static_cast<std::int64_t>(rng() % 1000000) * 250},
                             random_value(rng));
      }
    }
    log.objects.emplace(obj.object_id, std::move(obj));
  }

  std::vector<Identifier> event_ids;
  for (int i = 0; i < n_events; ++i) {
    CoreEvent ev;
    ev.event_id = Identifier{"ev" + std::to_string(i)};
    ev.timestamp = Timestamp{1600000000000LL + static_cast<std::int64_t>(rng() % 86400000)};
    switch (rng() % 3) {
      case 0:
        ev.event_class = EventClass::Observation;
        ev.event_type = kObservedType;
        break;
      case 1:
        ev.event_class = EventClass::IotEvent;
        ev.event_type = "signal" + std::to_string(rng() % 4);
        break;
      default:
        ev.event_class = EventClass::ProcessEvent;
        ev.activity = "act" + std::to_string(rng() % 5);
        ev.event_type = *ev.activity;
    }
    const int n_attrs = rng() % 4;
    for (int a = 0; a < n_attrs; ++a) {
      ev.attributes["field" + std::to_string(rng() % 6)] = random_value(rng);
    }
    log.e2o.insert(
        EventObjectRel{ev.event_id, data_sources[rng() % data_sources.size()], "recorded-by"});
    const int n_business = 1 + rng() % 2;
    for (int b = 0; b < n_business; ++b) {
      // an empty qualifier now and then exercises the event_type fallback
      log.e2o.insert(EventObjectRel{ev.event_id, businesses[rng() % businesses.size()],
                                    rng() % 8 == 0 ? "" : "involves"});
    }
    event_ids.push_back(ev.event_id);
    log.events.emplace(ev.event_id, std::move(ev));
  }

  const int n_o2o = rng() % 10;
  for (int i = 0; i < n_o2o; ++i) {
    auto pick = [&rng, n_objects] { return Identifier{"obj" + std::to_string(rng() % n_objects)}; };
    Identifier a = pick(), b = pick();
    log.o2o.insert(ObjectObjectRel{a, b, a == b ? "self" : "related-to"});
  }

  if (event_ids.size() > 1) {
    const int n_e2e = rng() % (max_e2e + 1);
    for (int i = 0; i < n_e2e; ++i) {
      const std::size_t a = rng() % (event_ids.size() - 1);
      const std::size_t b = a + 1 + rng() % (event_ids.size() - a - 1);
      log.e2e.insert(EventEventRel{event_ids[a], event_ids[b],
                                   rng() % 5 == 0 ? "abstracts" : kDerivedFromQualifier});
    }
  }

  const int n_meta = rng() % 4;
  for (int i = 0; i < n_meta; ++i) {
    log.metadata["meta" + std::to_string(rng() % 4)] = random_value(rng);
  }
  return log;
}

// ---------------------------------------------------------------------------
// The worked filtering-batch example
// ---------------------------------------------------------------------------

struct RunningExample {
  CoreLog log;
  std::vector<Identifier> observations;  // e7423..e7555, e7558, e7559
  std::vector<Identifier> peaks;         // three "Peak detected" iot events
  Identifier take_sample;                // e7557
};

/// A production batch: a filtering step, 135 flow-sensor observations, three
/// peaks detected over them, and a "Take sample" activity triggered by the
/// peaks. Exercises all object classes, both link levels, and lineage.
inline RunningExample running_example() {
  RunningExample ex;
  CoreLog& log = ex.log;
  log.metadata["plant"] = AttributeValue(std::string("line-4"));

  auto must = [](Status st) {
    if (!st.ok()) throw std::runtime_error(st.error().message);
  };

  must(add_object(log, {Identifier{"is1"}, "MES", ObjectClass::information_system(), {}}));
  must(add_object(log, {Identifier{"o1"}, "Batch", ObjectClass::case_object(), {}}));
  must(add_object(log, {Identifier{"o4"}, "Flow sensor", ObjectClass::sensor(), {}}));
  must(add_object(log, {Identifier{"o5"}, "Tank", ObjectClass::context_object(), {}}));

  const auto ts = [](int h, int m, int s) {
    // 2023-06-01 UTC
    return Timestamp{(1685577600LL + h * 3600 + m * 60 + s) * 1000};
  };

  CoreEvent filtering;
  filtering.event_id = Identifier{"e1"};
  filtering.timestamp = ts(12, 30, 0);
  filtering.event_class = EventClass::ProcessEvent;
  filtering.activity = "Filtering";
  filtering.event_type = "Filtering";
  must(add_event(log, filtering,
                 {{Identifier{"is1"}, "recorded-by"},
                  {Identifier{"o1"}, "belongs-to"},
                  {Identifier{"o5"}, "performed-in"}}));

  // 133 one-second observations e7423..e7555 ending 12:56:15, then two more
  // after the sampling decision
  auto add_observation = [&](int number, Timestamp when, double value) {
    CoreEvent obs;
    obs.event_id = Identifier{"e" + std::to_string(number)};
    obs.timestamp = when;
    obs.event_class = EventClass::Observation;
    obs.event_type = kObservedType;
    obs.attributes["value"] = AttributeValue(value);
    must(add_event(log, obs,
                   {{Identifier{"o4"}, "recorded-by"}, {Identifier{"o5"}, "observed-at"}}));
    ex.observations.push_back(obs.event_id);
  };
  for (int i = 0; i < 133; ++i) {
    add_observation(7423 + i, ts(12, 54, 3 + i), i == 0 ? 206.0 : 180.0 + i % 40);
  }
  add_observation(7558, ts(12, 56, 18), 175.0);
  add_observation(7559, ts(12, 56, 19), 174.0);

  auto derive_peak = [&](const std::string& id, int first, int last, Timestamp when) {
    std::vector<Identifier> sources;
    for (int n = first; n <= last; ++n) sources.push_back(Identifier{"e" + std::to_string(n)});
    CoreEvent peak;
    peak.event_id = Identifier{id};
    peak.timestamp = when;
    peak.event_class = EventClass::IotEvent;
    peak.event_type = "Peak detected";
    auto derived = derive_event(log,
                               {Identifier{"o2"}, "Analytics",
                                ObjectClass::link(LinkDirection::BottomUp), {}},
                               sources, peak, {{Identifier{"o5"}, "observed-at"}});
    if (!derived.ok()) throw std::runtime_error(derived.error().message);
    ex.peaks.push_back(derived.value());
  };
  derive_peak("e7480b", 7423, 7460, Timestamp::unset());  // defaults to latest source time
  derive_peak("e7500b", 7461, 7499, Timestamp::unset());
  derive_peak("e7556", 7500, 7555, ts(12, 56, 16));

  CoreEvent take_sample;
  take_sample.event_id = Identifier{"e7557"};
  take_sample.timestamp = ts(12, 56, 17);
  take_sample.event_class = EventClass::ProcessEvent;
  take_sample.activity = "Take sample";
  take_sample.event_type = "Take sample";
  auto derived = derive_event(log,
                             {Identifier{"o3"}, "Analytics",
                              ObjectClass::link(LinkDirection::BottomUp), {}},
                             ex.peaks, take_sample, {{Identifier{"o1"}, "belongs-to"}});
  if (!derived.ok()) throw std::runtime_error(derived.error().message);
  ex.take_sample = derived.value();
  return ex;
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Kahn's algorithm over the e2e edges; the validator's cycle detection is
/// checked against this instead of against itself.
inline bool e2e_is_acyclic(const CoreLog& log) {
  std::map<Identifier, int> indegree;
  std::map<Identifier, std::vector<Identifier>> out;
  for (const auto& [id, ev] : log.events) indegree[id];
  for (const EventEventRel& rel : log.e2e) {
    ++indegree[rel.target_event_id];
    out[rel.source_event_id].push_back(rel.target_event_id);
  }
  std::vector<Identifier> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push_back(id);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    Identifier cur = ready.back();
    ready.pop_back();
    ++visited;
    for (const Identifier& next : out[cur]) {
      if (--indegree[next] == 0) ready.push_back(next);
    }
  }
  return visited == indegree.size();
}

}  // namespace testsupport
