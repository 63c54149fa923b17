#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace corelog;

TEST_CASE("iso8601 formatting is UTC with millisecond precision") {
  CHECK(Timestamp{0}.to_iso8601() == "1970-01-01T00:00:00.000Z");
  CHECK(Timestamp{1685626575000LL}.to_iso8601() == "2023-06-01T13:36:15.000Z");
  CHECK(Timestamp{-1000}.to_iso8601() == "1969-12-31T23:59:59.000Z");
  CHECK(Timestamp{1609459199999LL}.to_iso8601() == "2020-12-31T23:59:59.999Z");
}

TEST_CASE("timestamp parsing accepts the common ISO shapes") {
  auto p = parse_timestamp("2023-06-01T13:36:15.250Z");
  REQUIRE(p.has_value());
  CHECK(p->value.epoch_ms == 1685626575250LL);
  CHECK(p->had_offset);

  // date only: midnight UTC, no offset seen
  p = parse_timestamp("2023-06-01");
  REQUIRE(p.has_value());
  CHECK(p->value.epoch_ms == 1685577600000LL);
  CHECK_FALSE(p->had_offset);

  // space separator and no seconds
  p = parse_timestamp("2023-06-01 13:36");
  REQUIRE(p.has_value());
  CHECK(p->value.epoch_ms == 1685626560000LL);
  CHECK_FALSE(p->had_offset);
}

TEST_CASE("offsets shift to UTC instead of being stored") {
  // 15:36:15+02:00 and 13:36:15Z are the same instant
  auto plus = parse_timestamp("2023-06-01T15:36:15+02:00");
  auto zulu = parse_timestamp("2023-06-01T13:36:15Z");
  REQUIRE(plus.has_value());
  REQUIRE(zulu.has_value());
  CHECK(plus->value == zulu->value);
  CHECK(plus->had_offset);

  auto compact = parse_timestamp("2023-06-01T15:36:15+0200");
  REQUIRE(compact.has_value());
  CHECK(compact->value == zulu->value);

  auto minus = parse_timestamp("2023-06-01T08:36:15-05:00");
  REQUIRE(minus.has_value());
  CHECK(minus->value == zulu->value);
}

TEST_CASE("timestamp garbage is rejected") {
  CHECK_FALSE(parse_timestamp("").has_value());
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
  CHECK_FALSE(parse_timestamp("2023-13-01").has_value());
  CHECK_FALSE(parse_timestamp("2023-06-32").has_value());
  CHECK_FALSE(parse_timestamp("2023-06-01T25:00").has_value());
  CHECK_FALSE(parse_timestamp("2023-06-01T13:36:15.").has_value());
  CHECK_FALSE(parse_timestamp("2023-06-01T13:36:15Zjunk").has_value());
}

TEST_CASE("format and parse are mutually inverse on random instants") {
  std::mt19937 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t ms =
        static_cast<std::int64_t>(rng()) % 4000000000000LL;  // ±across decades
    const Timestamp t{ms};
    auto parsed = parse_timestamp(t.to_iso8601());
    REQUIRE(parsed.has_value());
    CHECK(parsed->value == t);
    CHECK(parsed->had_offset);
  }
}

TEST_CASE("real formatting keeps reals lexically distinct from integers") {
  CHECK(AttributeValue::format_real(2.0) == "2.0");
  CHECK(AttributeValue::format_real(-13.0) == "-13.0");
  CHECK(AttributeValue::format_real(0.5) == "0.5");
  double parsed = 0;
  REQUIRE(corelog::detail::lex_as_real(AttributeValue::format_real(0.1), parsed));
  CHECK(parsed == 0.1);
}

TEST_CASE("cell encoding round-trips every value kind") {
  const AttributeValue cases[] = {
      AttributeValue(nullptr),
      AttributeValue(true),
      AttributeValue(false),
      AttributeValue(std::int64_t{0}),
      AttributeValue(std::int64_t{-123456789}),
      AttributeValue(3.25),
      AttributeValue(-0.001),
      AttributeValue(std::string("plain")),
      AttributeValue(std::string("")),          // text empty ≠ absent
      AttributeValue(std::string("null")),      // text that spells a null
      AttributeValue(std::string("true")),
      AttributeValue(std::string("42")),        // text that spells an integer
      AttributeValue(std::string("-2.5")),      // text that spells a real
      AttributeValue(std::string("1e3")),
      AttributeValue(std::string("'already")),  // leading apostrophe
      AttributeValue(std::string("a,b\nc")),
  };
  for (const AttributeValue& v : cases) {
    const std::string cell = encode_cell(v);
    CHECK(decode_cell(cell) == v);
  }
}

TEST_CASE("cell decoding tags bare lexical forms") {
  CHECK(decode_cell("null") == AttributeValue(nullptr));
  CHECK(decode_cell("true") == AttributeValue(true));
  CHECK(decode_cell("17") == AttributeValue(std::int64_t{17}));
  CHECK(decode_cell("17.5") == AttributeValue(17.5));
  CHECK(decode_cell("'17") == AttributeValue(std::string("17")));
  CHECK(decode_cell("word") == AttributeValue(std::string("word")));
}

TEST_CASE("cell encoding round-trips under fuzzing") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const AttributeValue v = testsupport::random_value(rng);
    CHECK(decode_cell(encode_cell(v)) == v);
  }
}

TEST_CASE("attribute values order deterministically") {
  CHECK(AttributeValue(nullptr) < AttributeValue(false));
  CHECK(AttributeValue(false) < AttributeValue(true));
  CHECK(AttributeValue(std::int64_t{1}) < AttributeValue(std::int64_t{2}));
  CHECK(AttributeValue(1.5) < AttributeValue(2.5));
  CHECK(AttributeValue(std::string("a")) < AttributeValue(std::string("b")));
  // kinds are ordered before values, so an integer never equals a real
  CHECK(AttributeValue(std::int64_t{2}) != AttributeValue(2.0));
}
