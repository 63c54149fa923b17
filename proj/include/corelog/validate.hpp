#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "corelog/diagnostics.hpp"
#include "corelog/model.hpp"

namespace corelog {

/// Structural validation against the metamodel rules. Total and
/// side-effect-free: diagnostics are the output, nothing is repaired.
inline std::vector<Diagnostic> validate(const CoreLog& log) {
  std::vector<Diagnostic> diags;

  // referential integrity
  for (const EventObjectRel& rel : log.e2o) {
    if (!log.events.count(rel.event_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.event_id.value,
                                  "e2o references missing event"));
    }
    if (!log.objects.count(rel.object_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.object_id.value,
                                  "e2o references missing object"));
    }
  }
  for (const ObjectObjectRel& rel : log.o2o) {
    if (!log.objects.count(rel.source_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.source_id.value,
                                  "o2o references missing object"));
    }
    if (!log.objects.count(rel.target_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.target_id.value,
                                  "o2o references missing object"));
    }
  }
  for (const EventEventRel& rel : log.e2e) {
    if (!log.events.count(rel.source_event_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.source_event_id.value,
                                  "e2e references missing event"));
    }
    if (!log.events.count(rel.target_event_id)) {
      diags.push_back(diag::error(diag::kDanglingRef, rel.target_event_id.value,
                                  "e2e references missing event"));
    }
  }

  // per-event cardinality: exactly one data source, at least one business object
  std::map<Identifier, int> data_sources;
  std::map<Identifier, int> business;
  for (const EventObjectRel& rel : log.e2o) {
    auto obj = log.objects.find(rel.object_id);
    if (obj == log.objects.end()) continue;
    if (obj->second.object_class.is_data_source()) ++data_sources[rel.event_id];
    if (obj->second.object_class.is_business()) ++business[rel.event_id];
  }
  for (const auto& [id, ev] : log.events) {
    const int ds = data_sources.count(id) ? data_sources[id] : 0;
    if (ds == 0) {
      diags.push_back(diag::error(diag::kNoDataSource, id.value,
                                  "event has no data-source object"));
    } else if (ds > 1) {
      diags.push_back(diag::error(diag::kMultiDataSource, id.value,
                                  "event has more than one data-source object"));
    }
    if (!business.count(id)) {
      diags.push_back(diag::error(diag::kNoBusinessObject, id.value,
                                  "event has no business object"));
    }
    if (auto err = check_event_class_rules(ev)) {
      const char* code = ev.event_class == EventClass::Observation ? diag::kObservationType
                                                                   : diag::kProcessEventType;
      diags.push_back(diag::error(code, id.value, err->message));
    }
  }

  // e2e acyclicity via iterative DFS with colors
  {
    std::map<Identifier, std::vector<Identifier>> adj;
    for (const EventEventRel& rel : log.e2e) {
      adj[rel.source_event_id].push_back(rel.target_event_id);
    }
    std::map<Identifier, int> color;  // 0 white, 1 gray, 2 black
    std::set<Identifier> cycle_nodes;
    for (const auto& [start, _] : adj) {
      if (color[start]) continue;
      std::vector<std::pair<Identifier, size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        auto& next = adj[node];
        if (idx < next.size()) {
          Identifier child = next[idx++];
          if (color[child] == 1) {
            cycle_nodes.insert(child);
          } else if (color[child] == 0) {
            color[child] = 1;
            stack.emplace_back(child, 0);
          }
        } else {
          color[node] = 2;
          stack.pop_back();
        }
      }
    }
    for (const Identifier& id : cycle_nodes) {
      diags.push_back(diag::error(diag::kEventCycle, id.value, "event participates in an e2e cycle"));
    }
  }

  // W001: derived event dated before one of its sources
  for (const EventEventRel& rel : log.e2e) {
    auto src = log.events.find(rel.source_event_id);
    auto tgt = log.events.find(rel.target_event_id);
    if (src == log.events.end() || tgt == log.events.end()) continue;
    if (tgt->second.timestamp < src->second.timestamp) {
      diags.push_back(diag::warning(diag::kTimestampOrder, tgt->second.event_id.value,
                                    "derived event predates source \"" +
                                        rel.source_event_id.value + "\""));
    }
  }

  sort_diagnostics(diags);
  diags.erase(std::unique(diags.begin(), diags.end()), diags.end());
  return diags;
}

inline bool is_strictly_valid(const CoreLog& log) { return !has_errors(validate(log)); }

}  // namespace corelog
