#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace corelog;
using testsupport::random_log;
using testsupport::running_example;

TEST_CASE("every e2e edge becomes one link object and two tagged rows") {
  auto ex = running_example();
  auto doc = to_ocel(ex.log);
  REQUIRE(doc.ok());

  std::size_t link_objects = 0;
  for (const OcelObject& obj : doc.value().objects) {
    if (obj.type == reserved::kE2eLinkType) ++link_objects;
  }
  std::size_t source_rows = 0, target_rows = 0;
  for (const OcelEvent& ev : doc.value().events) {
    for (const OcelRelationship& rel : ev.relationships) {
      if (rel.qualifier == reserved::kE2eSource) ++source_rows;
      if (rel.qualifier == reserved::kE2eTarget) ++target_rows;
    }
  }
  CHECK(link_objects == ex.log.e2e.size());
  CHECK(source_rows == ex.log.e2e.size());
  CHECK(target_rows == ex.log.e2e.size());
}

TEST_CASE("parallel e2e edges get numbered link ids") {
  CoreLog log = new_log();
  REQUIRE(add_object(log, {Identifier{"s"}, "sensor", ObjectClass::sensor(), {}}).ok());
  REQUIRE(add_object(log, {Identifier{"c"}, "order", ObjectClass::case_object(), {}}).ok());
  for (const char* id : {"a", "b"}) {
    CoreEvent ev;
    ev.event_id = Identifier{id};
    ev.timestamp = Timestamp{1000};
    REQUIRE(add_event(log, ev, {{Identifier{"s"}, "recorded-by"}, {Identifier{"c"}, "involves"}})
                .ok());
  }
  log.e2e.insert(EventEventRel{Identifier{"a"}, Identifier{"b"}, "first"});
  log.e2e.insert(EventEventRel{Identifier{"a"}, Identifier{"b"}, "second"});

  auto doc = to_ocel(log);
  REQUIRE(doc.ok());
  std::set<std::string> link_ids;
  for (const OcelObject& obj : doc.value().objects) {
    if (obj.type == reserved::kE2eLinkType) link_ids.insert(obj.id.value);
  }
  CHECK(link_ids == std::set<std::string>{"e2e:a:b", "e2e:a:b:1"});

  auto decoded = from_ocel(doc.value());
  REQUIRE(decoded.ok());
  CHECK(decoded.value().log.e2e == log.e2e);
}

TEST_CASE("metadata rides in the reserved singleton object") {
  auto ex = running_example();
  auto doc = to_ocel(ex.log);
  REQUIRE(doc.ok());
  const OcelObject* meta = nullptr;
  for (const OcelObject& obj : doc.value().objects) {
    if (obj.id.value == reserved::kMetadataObject) meta = &obj;
  }
  REQUIRE(meta != nullptr);
  REQUIRE(meta->attributes.size() == 1);
  CHECK(meta->attributes[0].name == "plant");
  CHECK(meta->attributes[0].value == AttributeValue(std::string("line-4")));

  auto decoded = from_ocel(doc.value());
  REQUIRE(decoded.ok());
  CHECK(decoded.value().log.metadata == ex.log.metadata);
}

TEST_CASE("reserved keys are rejected at encode time") {
  CoreLog log = new_log();
  log.metadata["core:version"] = AttributeValue(std::int64_t{1});
  auto bad_meta = to_ocel(log);
  REQUIRE_FALSE(bad_meta.ok());
  CHECK(bad_meta.error().kind == ErrorKind::ReservedKeyCollision);

  CoreLog log2 = new_log();
  REQUIRE(add_object(log2, {Identifier{"core:x"}, "t", ObjectClass::sensor(), {}}).ok());
  auto bad_id = to_ocel(log2, {.enforce_valid = false});
  REQUIRE_FALSE(bad_id.ok());
  CHECK(bad_id.error().kind == ErrorKind::ReservedKeyCollision);

  CoreLog log3 = new_log();
  CoreObject obj{Identifier{"o"}, "t", ObjectClass::sensor(), {}};
  obj.attributes["core:event_class"] = {{Timestamp{0}, AttributeValue(true)}};
  REQUIRE(add_object(log3, obj).ok());
  auto bad_attr = to_ocel(log3, {.enforce_valid = false});
  REQUIRE_FALSE(bad_attr.ok());
  CHECK(bad_attr.error().kind == ErrorKind::ReservedKeyCollision);
}

TEST_CASE("to_ocel refuses invalid logs unless asked not to") {
  CoreLog log = new_log();
  CoreEvent orphan;
  orphan.event_id = Identifier{"e"};
  orphan.timestamp = Timestamp{0};
  log.events.emplace(orphan.event_id, orphan);  // no data source, no business object

  auto strict = to_ocel(log);
  REQUIRE_FALSE(strict.ok());
  CHECK(strict.error().kind == ErrorKind::InvalidLog);
  CHECK(to_ocel(log, {.enforce_valid = false}).ok());
}

TEST_CASE("plain OCEL documents import with defaulted classes and warnings") {
  OcelDocument doc;
  doc.objects.push_back({Identifier{"order1"}, "order", {}, {}});
  OcelEvent ev{Identifier{"pick1"}, "pick item", Timestamp{5000}, {}, {}};
  ev.relationships.push_back({Identifier{"order1"}, "involves"});
  doc.events.push_back(ev);

  auto decoded = from_ocel(doc);
  REQUIRE(decoded.ok());
  const CoreLog& log = decoded.value().log;
  CHECK(log.objects.at(Identifier{"order1"}).object_class == ObjectClass::case_object());
  const CoreEvent& core_ev = log.events.at(Identifier{"pick1"});
  CHECK(core_ev.event_class == EventClass::ProcessEvent);
  CHECK(core_ev.activity == "pick item");
  CHECK(core_ev.event_type == "pick item");

  int defaulted = 0;
  for (const Diagnostic& d : decoded.value().diagnostics) {
    CHECK(d.code == diag::kDefaultedClass);
    ++defaulted;
  }
  CHECK(defaulted == 2);

  // importing the import again is stable: classes are now explicit
  auto doc2 = to_ocel(decoded.value().log, {.enforce_valid = false});
  REQUIRE(doc2.ok());
  auto decoded2 = from_ocel(doc2.value());
  REQUIRE(decoded2.ok());
  CHECK(decoded2.value().diagnostics.empty());
  CHECK(decoded2.value().log == canonicalize(decoded.value().log));
}

TEST_CASE("an e2e link object needs exactly one source and one target row") {
  auto ex = running_example();
  auto doc = to_ocel(ex.log);
  REQUIRE(doc.ok());

  // drop one core:e2e:target row from the first event that has one
  OcelDocument corrupted = doc.value();
  bool removed = false;
  for (OcelEvent& ev : corrupted.events) {
    for (auto it = ev.relationships.begin(); it != ev.relationships.end(); ++it) {
      if (it->qualifier == reserved::kE2eTarget) {
        ev.relationships.erase(it);
        removed = true;
        break;
      }
    }
    if (removed) break;
  }
  REQUIRE(removed);
  auto decoded = from_ocel(corrupted);
  REQUIRE_FALSE(decoded.ok());
  CHECK(decoded.error().kind == ErrorKind::DecodeError);
}

TEST_CASE("from_ocel rejects duplicate ids and dangling references") {
  OcelDocument doc;
  doc.objects.push_back({Identifier{"o"}, "t", {}, {}});
  doc.objects.push_back({Identifier{"o"}, "t", {}, {}});
  CHECK_FALSE(from_ocel(doc).ok());

  OcelDocument doc2;
  OcelEvent ev{Identifier{"e"}, "x", Timestamp{0}, {}, {}};
  ev.relationships.push_back({Identifier{"ghost"}, "involves"});
  doc2.events.push_back(ev);
  auto decoded = from_ocel(doc2);
  REQUIRE_FALSE(decoded.ok());
  CHECK(decoded.error().kind == ErrorKind::DecodeError);
}

TEST_CASE("JSON writing is byte-deterministic") {
  auto ex = running_example();
  auto doc = to_ocel(ex.log);
  REQUIRE(doc.ok());
  const std::string once = write_json_string(doc.value());
  const std::string twice = write_json_string(doc.value());
  CHECK(once == twice);

  auto reread = read_json(once);
  REQUIRE(reread.ok());
  CHECK(write_json_string(reread.value().doc) == once);
}

TEST_CASE("read_json flags unknown members and rejects malformed input") {
  auto with_extra = read_json(
      R"({"objectTypes":[],"eventTypes":[],"objects":[],"events":[],"vendor":42})");
  REQUIRE(with_extra.ok());
  REQUIRE(with_extra.value().warnings.size() == 1);
  CHECK(with_extra.value().warnings[0].code == diag::kUnknownMember);

  CHECK_FALSE(read_json("{not json").ok());
  CHECK_FALSE(read_json(R"({"objects":"nope"})").ok());
  CHECK_FALSE(read_json(R"([1,2,3])").ok());
}

TEST_CASE("JSON round trip restores the canonical log exactly") {
  std::mt19937 rng(20240817);
  for (int round = 0; round < 100; ++round) {
    CAPTURE(round);
    const CoreLog log = random_log(rng);
    auto doc = to_ocel(log);
    REQUIRE(doc.ok());
    auto reread = read_json(write_json_string(doc.value()));
    REQUIRE(reread.ok());
    REQUIRE(reread.value().warnings.empty());
    auto decoded = from_ocel(reread.value().doc);
    REQUIRE(decoded.ok());
    REQUIRE(decoded.value().diagnostics.empty());
    CHECK(decoded.value().log == canonicalize(log));
  }
}

TEST_CASE("relational round trip restores the canonical log exactly") {
  testsupport::TempDir dir("csv-roundtrip");
  std::mt19937 rng(424242);
  for (int round = 0; round < 40; ++round) {
    CAPTURE(round);
    const CoreLog log = random_log(rng, 80, 30, 40);
    auto doc = to_ocel(log);
    REQUIRE(doc.ok());
    const auto bundle = dir.path() / ("log" + std::to_string(round));
    REQUIRE(write_relational(doc.value(), bundle).ok());
    auto reread = read_relational(bundle);
    REQUIRE(reread.ok());
    auto decoded = from_ocel(reread.value());
    REQUIRE(decoded.ok());
    CHECK(decoded.value().log == canonicalize(log));
  }
}

TEST_CASE("relational reader reports the offending file") {
  testsupport::TempDir dir("csv-bad");
  auto ex = running_example();
  auto doc = to_ocel(ex.log);
  REQUIRE(doc.ok());
  REQUIRE(write_relational(doc.value(), dir.path()).ok());

  testsupport::spit(dir.path() / "e2o.csv", "wrong,header\n1,2\n");
  auto bad = read_relational(dir.path());
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.error().message.find("e2o.csv") != std::string::npos);

  std::filesystem::remove(dir.path() / "events.csv");
  CHECK_FALSE(read_relational(dir.path()).ok());
}
