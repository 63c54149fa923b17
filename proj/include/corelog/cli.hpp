#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corelog/ocel.hpp"
#include "corelog/ocel_csv.hpp"
#include "corelog/ocel_json.hpp"
#include "corelog/parsers.hpp"
#include "corelog/streaming.hpp"
#include "corelog/validate.hpp"

namespace corelog::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitErrors = 2;
inline constexpr int kExitStrictWarnings = 3;

namespace detail {

inline Result<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error{ErrorKind::IoError, "cannot read file", path.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Result<MappingConfig> load_mapping(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (!text.ok()) return text.error();
  nlohmann::json j = nlohmann::json::parse(text.value(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Error{ErrorKind::MappingError, "mapping file must be a JSON object", path.string()};
  }
  MappingConfig cfg;
  if (j.contains("resource_key")) cfg.resource_key = j["resource_key"].get<std::string>();
  if (j.contains("activity_key")) cfg.activity_key = j["activity_key"].get<std::string>();
  if (j.contains("observation_attribute_keys")) {
    for (const auto& k : j["observation_attribute_keys"]) {
      cfg.observation_attribute_keys.push_back(k.get<std::string>());
    }
  }
  if (j.contains("object_class_rules")) {
    for (const auto& rule : j["object_class_rules"]) {
      const std::string name = rule.at("class").get<std::string>();
      auto cls = ObjectClass::parse(name);
      if (!cls) return Error{ErrorKind::MappingError, "unknown object class", name};
      cfg.object_class_rules.push_back({rule.at("pattern").get<std::string>(), *cls});
    }
  }
  if (j.contains("qualifier_defaults")) {
    for (const auto& [k, v] : j["qualifier_defaults"].items()) {
      cfg.qualifier_defaults[k] = v.get<std::string>();
    }
  }
  return cfg;
}

inline bool is_ocel_format(const std::string& format) {
  return format == "ocel-json" || format == "ocel-csv";
}

inline Result<OcelDocument> load_document(const std::filesystem::path& path,
                                          const std::string& format,
                                          std::vector<Diagnostic>& warnings) {
  if (format == "ocel-json") {
    auto text = read_file(path);
    if (!text.ok()) return text.error();
    auto parsed = read_json(text.value());
    if (!parsed.ok()) return parsed.error();
    warnings.insert(warnings.end(), parsed.value().warnings.begin(),
                    parsed.value().warnings.end());
    return std::move(parsed.value().doc);
  }
  return read_relational(path);  // ocel-csv: path is the table directory
}

/// Loads any supported input format into a ParseReport. OCEL inputs go
/// through the decoder; legacy formats go through their parser profile.
inline Result<ParseReport> load_log(const std::filesystem::path& path, const std::string& format,
                                    const std::filesystem::path& mapping_path) {
  if (is_ocel_format(format)) {
    ParseReport report;
    auto doc = load_document(path, format, report.diagnostics);
    if (!doc.ok()) return doc.error();
    auto decoded = from_ocel(doc.value());
    if (!decoded.ok()) return decoded.error();
    report.log = std::move(decoded.value().log);
    report.diagnostics.insert(report.diagnostics.end(), decoded.value().diagnostics.begin(),
                              decoded.value().diagnostics.end());
    report.counts["events_parsed"] = static_cast<std::int64_t>(report.log.events.size());
    report.counts["objects_parsed"] = static_cast<std::int64_t>(report.log.objects.size());
    sort_diagnostics(report.diagnostics);
    return report;
  }

  auto text = read_file(path);
  if (!text.ok()) return text.error();
  const std::string name = path.filename().string();
  if (format == "datastream-trier") {
    return parse_datastream(text.value(), DataStreamProfile::Trier, name);
  }
  if (format == "datastream-tum") {
    return parse_datastream(text.value(), DataStreamProfile::Tum, name);
  }
  if (format == "nice") return parse_nice(text.value(), name);
  if (format == "cairo") return parse_cairo(text.value(), name);
  if (format == "custom") {
    if (mapping_path.empty()) {
      return Error{ErrorKind::MappingError, "custom format requires --mapping"};
    }
    auto mapping = load_mapping(mapping_path);
    if (!mapping.ok()) return mapping.error();
    return parse_custom(text.value(), mapping.value(), name);
  }
  return Error{ErrorKind::MalformedInput, "unknown input format \"" + format + "\"", format};
}

/// Replays a parsed log through a spill session so memory stays bounded by
/// the segment size; the merged result must equal the input by the spill
/// transparency property.
inline Result<CoreLog> route_through_stream(const CoreLog& log,
                                            const std::filesystem::path& segment_dir) {
  SpillPolicy policy;
  policy.max_buffered_records = 10000;
  policy.segment_directory = segment_dir;
  auto session = open_session(policy, {});
  if (!session.ok()) return session.error();
  StreamSession& s = session.value();
  for (const auto& [id, obj] : log.objects) {
    if (auto st = s.ingest(StreamRecord{obj}); !st.ok()) return st.error();
  }
  for (const auto& [id, ev] : log.events) {
    if (auto st = s.ingest(StreamRecord{ev}); !st.ok()) return st.error();
  }
  for (const auto& rel : log.e2o) {
    if (auto st = s.ingest(StreamRecord{rel}); !st.ok()) return st.error();
  }
  for (const auto& rel : log.o2o) {
    if (auto st = s.ingest(StreamRecord{rel}); !st.ok()) return st.error();
  }
  for (const auto& rel : log.e2e) {
    if (auto st = s.ingest(StreamRecord{rel}); !st.ok()) return st.error();
  }
  auto result = s.finalize();
  if (!result.ok()) return result.error();
  CoreLog merged = std::move(result.value().log);
  merged.metadata = log.metadata;  // stream records carry no metadata
  return merged;
}

inline void emit_report(const std::string& report_format,
                        const std::map<std::string, std::int64_t>& counts,
                        const std::vector<Diagnostic>& diagnostics, std::ostream& err) {
  if (report_format == "structured") {
    nlohmann::json j;
    j["counts"] = nlohmann::json::object();
    for (const auto& [k, v] : counts) j["counts"][k] = v;
    std::ostringstream diags;
    render_structured(diagnostics, diags);
    j["diagnostics"] = nlohmann::json::parse(diags.str());
    err << j.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : counts) err << "count " << k << ' ' << v << '\n';
  render_text(diagnostics, err);
}

inline Status write_document(const OcelDocument& doc, const std::filesystem::path& path,
                             const std::string& format) {
  if (format == "ocel-json") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return fail(ErrorKind::IoError, "cannot write file", path.string());
    write_json(doc, out);
    if (!out) return fail(ErrorKind::IoError, "write failed", path.string());
    return ok_status();
  }
  if (format == "ocel-csv") return write_relational(doc, path);
  return fail(ErrorKind::MalformedInput, "unknown output format \"" + format + "\"", format);
}

/// Path of the first record where two logs disagree, for mismatch reports.
inline std::string first_divergence(const CoreLog& a, const CoreLog& b) {
  for (const auto& [id, obj] : a.objects) {
    auto it = b.objects.find(id);
    if (it == b.objects.end() || !(it->second == obj)) return "objects/" + id.value;
  }
  for (const auto& [id, obj] : b.objects) {
    if (!a.objects.count(id)) return "objects/" + id.value;
  }
  for (const auto& [id, ev] : a.events) {
    auto it = b.events.find(id);
    if (it == b.events.end() || !(it->second == ev)) return "events/" + id.value;
  }
  for (const auto& [id, ev] : b.events) {
    if (!a.events.count(id)) return "events/" + id.value;
  }
  if (a.e2o != b.e2o) return "relationships/e2o";
  if (a.o2o != b.o2o) return "relationships/o2o";
  if (a.e2e != b.e2e) return "relationships/e2e";
  if (a.metadata != b.metadata) return "metadata";
  return {};
}

inline const char* segment_dir_override() { return std::getenv("CORELOG_SEGMENT_DIR"); }

}  // namespace detail

struct CliConfig {
  std::string input;
  std::string output;
  std::string from;
  std::string to = "ocel-json";
  std::string mapping;
  std::string report = "text";
  bool strict = false;
  bool strict_warnings = false;
};

inline int cmd_convert(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  // OCEL to OCEL is pure re-serialization: no decode, no model pass
  if (detail::is_ocel_format(cfg.from) && detail::is_ocel_format(cfg.to)) {
    std::vector<Diagnostic> warnings;
    auto doc = detail::load_document(cfg.input, cfg.from, warnings);
    if (!doc.ok()) {
      err << "error: " << doc.error().message << '\n';
      return kExitIo;
    }
    if (auto st = detail::write_document(doc.value(), cfg.output, cfg.to); !st.ok()) {
      err << "error: " << st.error().message << '\n';
      return kExitIo;
    }
    detail::emit_report(cfg.report, {}, warnings, err);
    return kExitOk;
  }

  auto report = detail::load_log(cfg.input, cfg.from, cfg.mapping);
  if (!report.ok()) {
    err << "error: " << report.error().message << '\n';
    return kExitIo;
  }
  CoreLog log = std::move(report.value().log);

  if (const char* dir = detail::segment_dir_override()) {
    auto routed = detail::route_through_stream(log, dir);
    if (!routed.ok()) {
      err << "error: " << routed.error().message << '\n';
      return kExitIo;
    }
    log = std::move(routed.value());
  }

  std::vector<Diagnostic> diagnostics = std::move(report.value().diagnostics);
  const std::vector<Diagnostic> found = validate(log);
  diagnostics.insert(diagnostics.end(), found.begin(), found.end());
  sort_diagnostics(diagnostics);
  detail::emit_report(cfg.report, report.value().counts, diagnostics, err);
  if (cfg.strict && has_errors(diagnostics)) return kExitErrors;

  ToOcelOptions opts;
  opts.enforce_valid = false;
  auto doc = to_ocel(log, opts);
  if (!doc.ok()) {
    err << "error: " << doc.error().message << '\n';
    return kExitIo;
  }
  if (auto st = detail::write_document(doc.value(), cfg.output, cfg.to); !st.ok()) {
    err << "error: " << st.error().message << '\n';
    return kExitIo;
  }
  (void)out;
  return kExitOk;
}

inline int cmd_validate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  auto report = detail::load_log(cfg.input, cfg.from, cfg.mapping);
  if (!report.ok()) {
    err << "error: " << report.error().message << '\n';
    return kExitIo;
  }
  std::vector<Diagnostic> diagnostics = std::move(report.value().diagnostics);
  const std::vector<Diagnostic> found = validate(report.value().log);
  diagnostics.insert(diagnostics.end(), found.begin(), found.end());
  sort_diagnostics(diagnostics);
  if (cfg.report == "structured") {
    render_structured(diagnostics, out);
  } else {
    render_text(diagnostics, out);
  }
  if (has_errors(diagnostics)) return kExitErrors;
  if (cfg.strict_warnings && !diagnostics.empty()) return kExitStrictWarnings;
  return kExitOk;
}

inline int cmd_stats(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  auto report = detail::load_log(cfg.input, cfg.from, cfg.mapping);
  if (!report.ok()) {
    err << "error: " << report.error().message << '\n';
    return kExitIo;
  }
  const CoreLog& log = report.value().log;

  std::map<std::string, std::int64_t> event_classes;
  std::map<std::string, std::int64_t> object_classes;
  std::map<std::string, std::int64_t> event_types;
  Timestamp min_ts, max_ts;
  for (const auto& [id, ev] : log.events) {
    ++event_classes[to_string(ev.event_class)];
    ++event_types[ev.event_type];
    if (ev.timestamp.is_set()) {
      if (!min_ts.is_set() || ev.timestamp < min_ts) min_ts = ev.timestamp;
      if (!max_ts.is_set() || max_ts < ev.timestamp) max_ts = ev.timestamp;
    }
  }
  for (const auto& [id, obj] : log.objects) ++object_classes[obj.object_class.to_string()];

  // top five event types by count, ties broken alphabetically
  std::vector<std::pair<std::string, std::int64_t>> top(event_types.begin(), event_types.end());
  std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (top.size() > 5) top.resize(5);

  if (cfg.report == "structured") {
    nlohmann::json j;
    j["events"] = log.events.size();
    j["objects"] = log.objects.size();
    j["event_classes"] = event_classes;
    j["object_classes"] = object_classes;
    j["relationships"] = {{"e2o", log.e2o.size()}, {"o2o", log.o2o.size()},
                          {"e2e", log.e2e.size()}};
    j["span"] = {{"min", min_ts.is_set() ? min_ts.to_iso8601() : ""},
                 {"max", max_ts.is_set() ? max_ts.to_iso8601() : ""}};
    nlohmann::json types = nlohmann::json::array();
    for (const auto& [type, count] : top) types.push_back({{"type", type}, {"count", count}});
    j["top_event_types"] = std::move(types);
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  out << "events " << log.events.size() << '\n';
  out << "objects " << log.objects.size() << '\n';
  for (const auto& [name, count] : event_classes) {
    out << "event_class " << name << ' ' << count << '\n';
  }
  for (const auto& [name, count] : object_classes) {
    out << "object_class " << name << ' ' << count << '\n';
  }
  out << "e2o " << log.e2o.size() << '\n';
  out << "o2o " << log.o2o.size() << '\n';
  out << "e2e " << log.e2e.size() << '\n';
  out << "span " << (min_ts.is_set() ? min_ts.to_iso8601() : "-") << ' '
      << (max_ts.is_set() ? max_ts.to_iso8601() : "-") << '\n';
  for (const auto& [type, count] : top) out << "event_type " << type << ' ' << count << '\n';
  return kExitOk;
}

inline int cmd_roundtrip_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  auto report = detail::load_log(cfg.input, cfg.from, cfg.mapping);
  if (!report.ok()) {
    err << "error: " << report.error().message << '\n';
    return kExitIo;
  }
  detail::emit_report(cfg.report, {}, report.value().diagnostics, err);

  CoreLog original = canonicalize(report.value().log);

  ToOcelOptions opts;
  opts.enforce_valid = false;
  auto doc = to_ocel(original, opts);
  if (!doc.ok()) {
    err << "error: " << doc.error().message << '\n';
    return kExitIo;
  }
  const std::string serialized = write_json_string(doc.value());
  auto reread = read_json(serialized);
  if (!reread.ok()) {
    err << "error: " << reread.error().message << '\n';
    return kExitIo;
  }
  auto decoded = from_ocel(reread.value().doc);
  if (!decoded.ok()) {
    err << "error: " << decoded.error().message << '\n';
    return kExitIo;
  }
  const CoreLog returned = canonicalize(decoded.value().log);

  const std::string divergence = detail::first_divergence(original, returned);
  if (divergence.empty()) {
    out << "round trip ok\n";
    return kExitOk;
  }
  out << "round trip mismatch at " << divergence << '\n';
  return kExitErrors;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"CORE event log toolkit: convert, validate, inspect, round-trip"};
  app.require_subcommand(1);

  CliConfig cfg;
  const std::vector<std::string> log_formats = {
      "datastream-trier", "datastream-tum", "nice", "cairo", "ocel-json", "ocel-csv", "custom"};
  const std::vector<std::string> ocel_formats = {"ocel-json", "ocel-csv"};

  auto add_common = [&cfg, &log_formats](CLI::App* cmd, bool need_output) {
    cmd->add_option("--input", cfg.input, "input file (or table directory)")->required();
    cmd->add_option("--from", cfg.from, "input format")
        ->required()
        ->check(CLI::IsMember(log_formats));
    cmd->add_option("--mapping", cfg.mapping, "mapping file for --from custom");
    cmd->add_option("--report", cfg.report, "report format")
        ->check(CLI::IsMember({"text", "structured"}));
    if (need_output) {
      cmd->add_option("--output", cfg.output, "output file (or table directory)")->required();
    }
  };

  CLI::App* convert = app.add_subcommand("convert", "translate between log formats");
  add_common(convert, true);
  convert->add_option("--to", cfg.to, "output format")->check(CLI::IsMember(ocel_formats));
  convert->add_flag("--strict", cfg.strict, "fail on validation errors");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check structural rules");
  add_common(validate_cmd, false);
  validate_cmd->add_flag("--strict-warnings", cfg.strict_warnings,
                         "exit nonzero when warnings remain");

  CLI::App* stats = app.add_subcommand("stats", "print log statistics");
  add_common(stats, false);

  CLI::App* roundtrip = app.add_subcommand("roundtrip-check", "verify lossless encoding");
  add_common(roundtrip, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    const int code = app.exit(e, msg, msg);
    err << msg.str();
    return code == 0 ? kExitOk : kExitIo;
  }

  if (convert->parsed()) return cmd_convert(cfg, out, err);
  if (validate_cmd->parsed()) return cmd_validate(cfg, out, err);
  if (stats->parsed()) return cmd_stats(cfg, out, err);
  return cmd_roundtrip_check(cfg, out, err);
}

}  // namespace corelog::cli
