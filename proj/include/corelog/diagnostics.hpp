#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corelog/result.hpp"

namespace corelog {

enum class Severity { Error, Warning };

inline const char* to_string(Severity s) {
  return s == Severity::Error ? "error" : "warning";
}

/// One machine-readable finding. Codes come from the closed catalog below
/// and are stable across versions.
struct Diagnostic {
  std::string code;
  Severity severity = Severity::Error;
  std::string subject;  // id of the offending record, empty for log-level
  std::string message;

  auto operator<=>(const Diagnostic&) const = default;
};

namespace diag {

// Errors
inline constexpr const char* kNoDataSource = "E002";       // event has no DataSource e2o neighbor
inline constexpr const char* kMultiDataSource = "E003";    // event has more than one
inline constexpr const char* kNoBusinessObject = "E004";   // event has no Business e2o neighbor
inline constexpr const char* kDanglingRef = "E005";        // reference to a missing record
inline constexpr const char* kObservationType = "E006";    // Observation event_type != "observed"
inline constexpr const char* kProcessEventType = "E007";   // ProcessEvent activity/event_type rule
inline constexpr const char* kEventCycle = "E008";         // e2e cycle
// Warnings
inline constexpr const char* kTimestampOrder = "W001";     // derived event earlier than a source
inline constexpr const char* kAssumedUtc = "W002";         // timezone missing, UTC assumed
inline constexpr const char* kDuplicateSkipped = "W003";   // duplicate skipped in lenient mode
inline constexpr const char* kDefaultedClass = "W004";     // plain-OCEL import defaulted a class
inline constexpr const char* kUnknownMember = "W005";      // unknown document member ignored
inline constexpr const char* kEmptyInput = "W006";         // empty document, trace, or stream
inline constexpr const char* kRecordDropped = "W007";      // source record dropped in translation

inline Diagnostic error(const char* code, std::string subject, std::string message) {
  return Diagnostic{code, Severity::Error, std::move(subject), std::move(message)};
}

inline Diagnostic warning(const char* code, std::string subject, std::string message) {
  return Diagnostic{code, Severity::Warning, std::move(subject), std::move(message)};
}

}  // namespace diag

/// Sort order used by every report: errors first, then by code and subject.
inline void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.severity, a.code, a.subject, a.message) <
           std::tie(b.severity, b.code, b.subject, b.message);
  });
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

/// Line-oriented rendering: "CODE severity [subject] message".
inline void render_text(const std::vector<Diagnostic>& diags, std::ostream& out) {
  for (const Diagnostic& d : diags) {
    out << d.code << ' ' << to_string(d.severity);
    if (!d.subject.empty()) out << " [" << d.subject << ']';
    out << ' ' << d.message << '\n';
  }
}

/// Structured rendering for CI consumption: a JSON array of records.
inline void render_structured(const std::vector<Diagnostic>& diags, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Diagnostic& d : diags) {
    arr.push_back({{"code", d.code},
                   {"severity", to_string(d.severity)},
                   {"subject", d.subject},
                   {"message", d.message}});
  }
  out << arr.dump(2) << '\n';
}

/// Reads a structured report back (the CLI's own output is parseable).
inline Result<std::vector<Diagnostic>> parse_structured(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text, nullptr, false);
  // conversion reports wrap the array together with their counters
  if (arr.is_object() && arr.contains("diagnostics")) arr = arr["diagnostics"];
  if (arr.is_discarded() || !arr.is_array()) {
    return Error{ErrorKind::MalformedInput, "structured report must be a JSON array"};
  }
  std::vector<Diagnostic> out;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("code") || !item.contains("severity")) {
      return Error{ErrorKind::MalformedInput, "malformed report record"};
    }
    Diagnostic d;
    d.code = item.at("code").get<std::string>();
    d.severity = item.at("severity").get<std::string>() == "error" ? Severity::Error
                                                                   : Severity::Warning;
    d.subject = item.value("subject", std::string{});
    d.message = item.value("message", std::string{});
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace corelog
