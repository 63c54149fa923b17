#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <variant>

namespace corelog {

/// Tagged attribute payload. The tag (null / boolean / integer / real /
/// text) survives every serialization round trip, so 206 and "206" stay
/// distinct values.
class AttributeValue {
 public:
  enum class Kind { Null, Boolean, Integer, Real, Text };

  AttributeValue() : repr_(nullptr) {}
  AttributeValue(std::nullptr_t) : repr_(nullptr) {}
  AttributeValue(bool b) : repr_(b) {}
  AttributeValue(std::int64_t i) : repr_(i) {}
  AttributeValue(int i) : repr_(static_cast<std::int64_t>(i)) {}
  AttributeValue(double d) : repr_(d) {}
  AttributeValue(std::string s) : repr_(std::move(s)) {}
  AttributeValue(const char* s) : repr_(std::string(s)) {}

  Kind kind() const { return static_cast<Kind>(repr_.index()); }
  bool is_null() const { return kind() == Kind::Null; }

  bool as_boolean() const { return std::get<bool>(repr_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(repr_); }
  double as_real() const { return std::get<double>(repr_); }
  const std::string& as_text() const { return std::get<std::string>(repr_); }

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;
  friend std::strong_ordering operator<=>(const AttributeValue& a, const AttributeValue& b) {
    if (auto c = a.repr_.index() <=> b.repr_.index(); c != 0) return c;
    switch (a.kind()) {
      case Kind::Null: return std::strong_ordering::equal;
      case Kind::Boolean: return a.as_boolean() <=> b.as_boolean();
      case Kind::Integer: return a.as_integer() <=> b.as_integer();
      case Kind::Real: {
        // totally ordered via the bit-faithful text form (no NaN payloads here)
        const double x = a.as_real(), y = b.as_real();
        if (x < y) return std::strong_ordering::less;
        if (x > y) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
      }
      case Kind::Text: return a.as_text() <=> b.as_text();
    }
    return std::strong_ordering::equal;
  }

  /// Shortest text form that parses back to the same double.
  static std::string format_real(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    std::string s(buf, end);
    // keep reals lexically distinct from integers
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
      s += ".0";
    }
    return s;
  }

  /// Plain text rendering, mainly for reports; not reversible.
  std::string to_display() const {
    switch (kind()) {
      case Kind::Null: return "null";
      case Kind::Boolean: return as_boolean() ? "true" : "false";
      case Kind::Integer: return std::to_string(as_integer());
      case Kind::Real: return format_real(as_real());
      case Kind::Text: return as_text();
    }
    return {};
  }

  const char* kind_name() const {
    switch (kind()) {
      case Kind::Null: return "null";
      case Kind::Boolean: return "boolean";
      case Kind::Integer: return "integer";
      case Kind::Real: return "float";
      case Kind::Text: return "string";
    }
    return "string";
  }

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string> repr_;
};

namespace detail {

inline bool lex_as_integer(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

inline bool lex_as_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  // strtod accepts leading whitespace and hex; reject those up front
  if (s.front() == ' ' || s.front() == '\t') return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace detail

/// Reversible single-cell encoding used by the relational (CSV) backend.
/// Empty cell means "absent"; the literal null/true/false and numeric
/// lexical forms are claimed by the non-text tags, so text values that
/// would collide get a leading apostrophe.
inline std::string encode_cell(const AttributeValue& v) {
  switch (v.kind()) {
    case AttributeValue::Kind::Null: return "null";
    case AttributeValue::Kind::Boolean: return v.as_boolean() ? "true" : "false";
    case AttributeValue::Kind::Integer: return std::to_string(v.as_integer());
    case AttributeValue::Kind::Real: return AttributeValue::format_real(v.as_real());
    case AttributeValue::Kind::Text: {
      const std::string& s = v.as_text();
      std::int64_t i;
      double d;
      const bool collides = s.empty() || s == "null" || s == "true" || s == "false" ||
                            s.front() == '\'' || detail::lex_as_integer(s, i) ||
                            detail::lex_as_real(s, d);
      return collides ? "'" + s : s;
    }
  }
  return {};
}

inline AttributeValue decode_cell(std::string_view s) {
  if (s == "null") return AttributeValue(nullptr);
  if (s == "true") return AttributeValue(true);
  if (s == "false") return AttributeValue(false);
  std::int64_t i;
  if (detail::lex_as_integer(s, i)) return AttributeValue(i);
  double d;
  if (detail::lex_as_real(s, d)) return AttributeValue(d);
  if (!s.empty() && s.front() == '\'') return AttributeValue(std::string(s.substr(1)));
  return AttributeValue(std::string(s));
}

}  // namespace corelog
