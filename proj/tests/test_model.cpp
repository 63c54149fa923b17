#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace corelog;
using testsupport::running_example;

namespace {

CoreLog small_log() {
  CoreLog log = new_log();
  REQUIRE(add_object(log, {Identifier{"ds"}, "sensor", ObjectClass::sensor(), {}}).ok());
  REQUIRE(add_object(log, {Identifier{"case"}, "order", ObjectClass::case_object(), {}}).ok());
  return log;
}

CoreEvent observation(const std::string& id, std::int64_t ms) {
  CoreEvent ev;
  ev.event_id = Identifier{id};
  ev.timestamp = Timestamp{ms};
  ev.event_class = EventClass::Observation;
  ev.event_type = kObservedType;
  return ev;
}

}  // namespace

TEST_CASE("add_object enforces unique valid ids") {
  CoreLog log = small_log();
  auto dup = add_object(log, {Identifier{"ds"}, "sensor", ObjectClass::sensor(), {}});
  REQUIRE_FALSE(dup.ok());
  CHECK(dup.error().kind == ErrorKind::DuplicateId);
  CHECK_FALSE(add_object(log, {Identifier{""}, "x", ObjectClass::sensor(), {}}).ok());
  CHECK_FALSE(add_object(log, {Identifier{"a\tb"}, "x", ObjectClass::sensor(), {}}).ok());
  CHECK(log.objects.size() == 2);
}

TEST_CASE("event class typing rules") {
  CoreEvent obs = observation("e1", 1000);
  CHECK_FALSE(check_event_class_rules(obs).has_value());

  obs.event_type = "reading";
  CHECK(check_event_class_rules(obs).has_value());

  CoreEvent proc;
  proc.event_id = Identifier{"e2"};
  proc.event_class = EventClass::ProcessEvent;
  proc.event_type = "Ship";
  CHECK(check_event_class_rules(proc).has_value());  // no activity
  proc.activity = "Pack";
  CHECK(check_event_class_rules(proc).has_value());  // type != activity
  proc.activity = "Ship";
  CHECK_FALSE(check_event_class_rules(proc).has_value());

  CoreEvent iot;
  iot.event_id = Identifier{"e3"};
  iot.event_class = EventClass::IotEvent;
  iot.event_type = "";
  CHECK(check_event_class_rules(iot).has_value());
  iot.event_type = "spike";
  CHECK_FALSE(check_event_class_rules(iot).has_value());
}

TEST_CASE("add_event wires e2o links and rejects dangling objects") {
  CoreLog log = small_log();
  auto bad = add_event(log, observation("e1", 0), {{Identifier{"ghost"}, "recorded-by"}});
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.error().kind == ErrorKind::DanglingObjectRef);
  CHECK(log.events.empty());
  CHECK(log.e2o.empty());

  REQUIRE(add_event(log, observation("e1", 0),
                    {{Identifier{"ds"}, "recorded-by"}, {Identifier{"case"}, "involves"}})
              .ok());
  CHECK(log.e2o.size() == 2);
  auto dup = add_event(log, observation("e1", 5));
  REQUIRE_FALSE(dup.ok());
  CHECK(dup.error().kind == ErrorKind::DuplicateId);
}

TEST_CASE("o2o self relations require the self qualifier") {
  CoreLog log = small_log();
  CHECK_FALSE(add_o2o(log, {Identifier{"ds"}, Identifier{"ds"}, "near"}).ok());
  CHECK(add_o2o(log, {Identifier{"ds"}, Identifier{"ds"}, "self"}).ok());
  CHECK(add_o2o(log, {Identifier{"ds"}, Identifier{"case"}, "monitors"}).ok());
  CHECK_FALSE(add_o2o(log, {Identifier{"ds"}, Identifier{"ghost"}, "x"}).ok());
}

TEST_CASE("add_e2e rejects cycles and self edges") {
  CoreLog log = small_log();
  for (int i = 0; i < 4; ++i) {
    REQUIRE(add_event(log, observation("e" + std::to_string(i), i * 1000),
                      {{Identifier{"ds"}, "recorded-by"}})
                .ok());
  }
  REQUIRE(add_e2e(log, {Identifier{"e0"}, Identifier{"e1"}, "derived-from"}).ok());
  REQUIRE(add_e2e(log, {Identifier{"e1"}, Identifier{"e2"}, "derived-from"}).ok());
  REQUIRE(add_e2e(log, {Identifier{"e2"}, Identifier{"e3"}, "derived-from"}).ok());

  auto back = add_e2e(log, {Identifier{"e3"}, Identifier{"e0"}, "derived-from"});
  REQUIRE_FALSE(back.ok());
  CHECK(back.error().kind == ErrorKind::CycleDetected);
  auto self = add_e2e(log, {Identifier{"e1"}, Identifier{"e1"}, "derived-from"});
  REQUIRE_FALSE(self.ok());
  CHECK(self.error().kind == ErrorKind::CycleDetected);
  CHECK_FALSE(add_e2e(log, {Identifier{"e0"}, Identifier{"ghost"}, "x"}).ok());

  // a diamond is still acyclic
  CHECK(add_e2e(log, {Identifier{"e0"}, Identifier{"e2"}, "derived-from"}).ok());
  CHECK(testsupport::e2e_is_acyclic(log));
}

TEST_CASE("derive_event builds lineage and defaults the timestamp") {
  CoreLog log = small_log();
  REQUIRE(add_event(log, observation("low1", 1000), {{Identifier{"ds"}, "recorded-by"}}).ok());
  REQUIRE(add_event(log, observation("low2", 9000), {{Identifier{"ds"}, "recorded-by"}}).ok());

  CoreEvent peak;
  peak.event_id = Identifier{"high"};
  peak.event_class = EventClass::IotEvent;
  peak.event_type = "Peak detected";
  auto derived = derive_event(
      log, {Identifier{"lnk"}, "Analytics", ObjectClass::link(LinkDirection::BottomUp), {}},
      {Identifier{"low1"}, Identifier{"low2"}}, peak, {{Identifier{"case"}, "belongs-to"}});
  REQUIRE(derived.ok());

  const CoreEvent& high = log.events.at(Identifier{"high"});
  CHECK(high.timestamp.epoch_ms == 9000);  // latest source
  CHECK(log.e2o.count({Identifier{"high"}, Identifier{"lnk"}, "derived-by"}) == 1);
  CHECK(log.e2o.count({Identifier{"high"}, Identifier{"case"}, "belongs-to"}) == 1);
  CHECK(log.e2e.count({Identifier{"low1"}, Identifier{"high"}, kDerivedFromQualifier}) == 1);
  CHECK(log.e2e.count({Identifier{"low2"}, Identifier{"high"}, kDerivedFromQualifier}) == 1);
  CHECK(log.objects.at(Identifier{"lnk"}).object_class.kind() == ObjectClass::Kind::Link);
}

TEST_CASE("derive_event enforces bottom-up class rules") {
  CoreLog log = small_log();
  CoreEvent proc;
  proc.event_id = Identifier{"p"};
  proc.timestamp = Timestamp{500};
  proc.event_class = EventClass::ProcessEvent;
  proc.activity = "Ship";
  proc.event_type = "Ship";
  REQUIRE(add_event(log, proc, {{Identifier{"ds"}, "recorded-by"}}).ok());

  CoreEvent target;
  target.event_id = Identifier{"t"};
  target.event_class = EventClass::IotEvent;
  target.event_type = "spike";

  // process events cannot be bottom-up sources
  auto bad_source = derive_event(
      log, {Identifier{"lnk"}, "Analytics", ObjectClass::link(LinkDirection::BottomUp), {}},
      {Identifier{"p"}}, target, {});
  REQUIRE_FALSE(bad_source.ok());
  CHECK(bad_source.error().kind == ErrorKind::ClassRuleViolation);

  // observations cannot be bottom-up targets
  REQUIRE(add_event(log, observation("low", 100), {{Identifier{"ds"}, "recorded-by"}}).ok());
  auto bad_target = derive_event(
      log, {Identifier{"lnk"}, "Analytics", ObjectClass::link(LinkDirection::BottomUp), {}},
      {Identifier{"low"}}, observation("obs2", 200), {});
  REQUIRE_FALSE(bad_target.ok());

  // a non-link data source is rejected outright
  auto bad_link = derive_event(log, {Identifier{"s2"}, "sensor", ObjectClass::sensor(), {}},
                               {Identifier{"low"}}, target, {});
  REQUIRE_FALSE(bad_link.ok());

  // top-down links may fetch from process events
  auto top_down = derive_event(
      log, {Identifier{"lnk2"}, "Fetcher", ObjectClass::link(LinkDirection::TopDown), {}},
      {Identifier{"p"}}, target, {});
  CHECK(top_down.ok());
}

TEST_CASE("lineage_sources walks transitively") {
  auto ex = running_example();
  const auto sources = lineage_sources(ex.log, ex.take_sample);
  for (const Identifier& peak : ex.peaks) CHECK(sources.count(peak) == 1);
  // all 133 derived-over observations, but not the two trailing ones
  CHECK(sources.count(Identifier{"e7423"}) == 1);
  CHECK(sources.count(Identifier{"e7555"}) == 1);
  CHECK(sources.count(Identifier{"e7558"}) == 0);
  CHECK(sources.size() == 3 + 133);
  CHECK(lineage_sources(ex.log, Identifier{"e7423"}).empty());
}

TEST_CASE("canonicalize sorts histories and applies the qualifier fallback") {
  CoreLog log = small_log();
  auto& ds = log.objects.at(Identifier{"ds"});
  ds.attributes["unit"] = {{Timestamp{300}, AttributeValue("C")},
                           {Timestamp{100}, AttributeValue("F")},
                           {Timestamp{100}, AttributeValue("F")}};
  REQUIRE(add_event(log, observation("e1", 0), {{Identifier{"ds"}, ""}}).ok());

  const CoreLog canon = canonicalize(log);
  const auto& history = canon.objects.at(Identifier{"ds"}).attributes.at("unit");
  REQUIRE(history.size() == 2);
  CHECK(history[0].first.epoch_ms == 100);
  CHECK(history[1].first.epoch_ms == 300);
  CHECK(canon.e2o.count({Identifier{"e1"}, Identifier{"ds"}, kObservedType}) == 1);
  CHECK(canonicalize(canon) == canon);  // idempotent
}

TEST_CASE("canonical form is insertion-order independent") {
  // the same records inserted in two different orders must compare equal
  std::mt19937 rng(7);
  CoreLog log = testsupport::random_log(rng, 40, 20, 20);

  CoreLog shuffled = new_log(log.metadata);
  std::vector<std::pair<Identifier, CoreObject>> objects(log.objects.rbegin(),
                                                         log.objects.rend());
  for (auto& [id, obj] : objects) shuffled.objects.emplace(id, obj);
  std::vector<std::pair<Identifier, CoreEvent>> events(log.events.rbegin(), log.events.rend());
  for (auto& [id, ev] : events) shuffled.events.emplace(id, ev);
  for (auto it = log.e2o.rbegin(); it != log.e2o.rend(); ++it) shuffled.e2o.insert(*it);
  for (auto it = log.o2o.rbegin(); it != log.o2o.rend(); ++it) shuffled.o2o.insert(*it);
  for (auto it = log.e2e.rbegin(); it != log.e2e.rend(); ++it) shuffled.e2e.insert(*it);

  CHECK(canonicalize(log) == canonicalize(shuffled));
}
