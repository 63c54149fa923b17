#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "corelog/result.hpp"

namespace corelog::xml {

/// Element tree of a parsed document. Namespace prefixes are kept literal
/// ("stream:point"); the dialects handled here pin their prefixes.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data

  const std::string* attr(std::string_view name) const {
    for (const auto& [k, v] : attributes) {
      if (k == name) return &v;
    }
    return nullptr;
  }

  std::string attr_or(std::string_view name, std::string fallback = {}) const {
    const std::string* v = attr(name);
    return v ? *v : std::move(fallback);
  }

  std::vector<const Element*> children_named(std::string_view name) const {
    std::vector<const Element*> out;
    for (const Element& c : children) {
      if (c.name == name) out.push_back(&c);
    }
    return out;
  }

  const Element* first_child(std::string_view name) const {
    for (const Element& c : children) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  Result<Element> parse() {
    skip_prolog();
    auto root = parse_element();
    if (!root.ok()) return root;
    skip_misc();
    if (pos_ != in_.size()) {
      return error("trailing content after document element");
    }
    return root;
  }

 private:
  Error error(const std::string& message) const {
    return Error{ErrorKind::MalformedXml, message + " at byte " + std::to_string(pos_),
                 std::to_string(pos_)};
  }

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n')) ++pos_;
  }

  bool skip_until(std::string_view terminator) {
    const size_t found = in_.find(terminator, pos_);
    if (found == std::string_view::npos) return false;
    pos_ = found + terminator.size();
    return true;
  }

  void skip_prolog() {
    skip_ws();
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;  // UTF-8 BOM
    skip_ws();
    if (starts_with("<?xml")) skip_until("?>");
    skip_misc();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        if (!skip_until("-->")) {
          pos_ = in_.size();
          return;
        }
      } else if (starts_with("<!DOCTYPE")) {
        if (!skip_until(">")) {
          pos_ = in_.size();
          return;
        }
      } else {
        return;
      }
    }
  }

  static bool name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.' || c == ':';
  }

  std::string parse_name() {
    const size_t start = pos_;
    while (!eof() && name_char(peek())) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  Result<std::string> decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      const size_t end = raw.find(';', i);
      if (end == std::string_view::npos) return error("unterminated entity");
      const std::string_view ent = raw.substr(i + 1, end - i - 1);
      if (ent == "amp") {
        out += '&';
      } else if (ent == "lt") {
        out += '<';
      } else if (ent == "gt") {
        out += '>';
      } else if (ent == "quot") {
        out += '"';
      } else if (ent == "apos") {
        out += '\'';
      } else if (ent.size() > 1 && ent[0] == '#') {
        long code = 0;
        try {
          code = ent[1] == 'x' || ent[1] == 'X' ? std::stol(std::string(ent.substr(2)), nullptr, 16)
                                                : std::stol(std::string(ent.substr(1)));
        } catch (...) {
          return error("malformed character reference");
        }
        // encode the code point as UTF-8
        if (code < 0 || code > 0x10FFFF) return error("character reference out of range");
        if (code < 0x80) {
          out += static_cast<char>(code);
        } else if (code < 0x800) {
          out += static_cast<char>(0xC0 | (code >> 6));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else if (code < 0x10000) {
          out += static_cast<char>(0xE0 | (code >> 12));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else {
          out += static_cast<char>(0xF0 | (code >> 18));
          out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        }
      } else {
        return error("unknown entity &" + std::string(ent) + ";");
      }
      i = end;
    }
    return out;
  }

  Result<Element> parse_element() {
    skip_misc();
    if (eof() || peek() != '<') return error("expected element");
    ++pos_;
    Element el;
    el.name = parse_name();
    if (el.name.empty()) return error("expected element name");
    for (;;) {
      skip_ws();
      if (eof()) return error("unterminated start tag");
      if (peek() == '/') {
        ++pos_;
        if (eof() || peek() != '>') return error("malformed empty-element tag");
        ++pos_;
        return el;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      std::string attr_name = parse_name();
      if (attr_name.empty()) return error("expected attribute name");
      skip_ws();
      if (eof() || peek() != '=') return error("expected '=' after attribute name");
      ++pos_;
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) return error("expected quoted value");
      const char q = peek();
      ++pos_;
      const size_t vstart = pos_;
      while (!eof() && peek() != q) ++pos_;
      if (eof()) return error("unterminated attribute value");
      auto value = decode_entities(in_.substr(vstart, pos_ - vstart));
      if (!value.ok()) return value.error();
      ++pos_;
      el.attributes.emplace_back(std::move(attr_name), std::move(value.value()));
    }

    // content
    for (;;) {
      if (eof()) return error("unterminated element <" + el.name + ">");
      if (peek() == '<') {
        if (starts_with("</")) {
          pos_ += 2;
          std::string close = parse_name();
          if (close != el.name) {
            return error("mismatched closing tag </" + close + "> for <" + el.name + ">");
          }
          skip_ws();
          if (eof() || peek() != '>') return error("malformed closing tag");
          ++pos_;
          return el;
        }
        if (starts_with("<!--")) {
          if (!skip_until("-->")) return error("unterminated comment");
          continue;
        }
        if (starts_with("<![CDATA[")) {
          pos_ += 9;
          const size_t end = in_.find("]]>", pos_);
          if (end == std::string_view::npos) return error("unterminated CDATA section");
          el.text.append(in_.substr(pos_, end - pos_));
          pos_ = end + 3;
          continue;
        }
        auto child = parse_element();
        if (!child.ok()) return child;
        el.children.push_back(std::move(child.value()));
        continue;
      }
      const size_t start = pos_;
      while (!eof() && peek() != '<') ++pos_;
      auto text = decode_entities(in_.substr(start, pos_ - start));
      if (!text.ok()) return text.error();
      el.text += text.value();
    }
  }

  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace detail

/// Parses a whole document; inputs must be UTF-8 (a non-UTF-8 encoding
/// declaration is rejected).
inline Result<Element> parse_document(std::string_view input) {
  const size_t decl = input.find("encoding=");
  if (decl != std::string_view::npos && decl < 100) {
    const size_t start = decl + 10;
    const size_t end = input.find_first_of("\"'", start);
    if (end != std::string_view::npos) {
      std::string enc(input.substr(start, end - start));
      for (char& c : enc) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (enc != "utf-8" && enc != "utf8") {
        return Error{ErrorKind::MalformedXml, "unsupported encoding \"" + enc + "\", expected UTF-8",
                     enc};
      }
    }
  }
  return detail::Parser(input).parse();
}

}  // namespace corelog::xml
