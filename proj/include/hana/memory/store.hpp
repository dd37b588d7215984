#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hana/sim/clock.hpp"

namespace hana {

using ojson = nlohmann::ordered_json;

/// A remedy or diagnostic step template. Parameter slots are written
/// "$name" and filled from recommended_params plus live context.
struct ToolStepTemplate {
  std::string tool;
  std::map<std::string, std::string> args;  // arg name -> literal or "$slot"
};

struct FaultCase {
  std::string id;
  std::set<std::string> symptom_features;
  std::string root_cause;  // may contain "$param" / "$current" slots
  std::vector<ToolStepTemplate> confirm_steps;  // diagnostics run before planning
  std::vector<ToolStepTemplate> remedy_template;
  std::map<std::string, std::int64_t> recommended_params;
};

enum class SlaMetric { UplinkThroughput };

struct SlaRequirement {
  std::string terminal_id;
  SlaMetric metric = SlaMetric::UplinkThroughput;
  double lower_bound = 0.0;  // Mbps, > 0
  int priority = 0;
};

struct MetaGoal {
  std::string id;
  std::string terminal_id;  // intent: terminal throughput >= SLA lower bound
};

enum class Outcome { Resolved, Failed, Preempted };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Resolved: return "Resolved";
    case Outcome::Failed: return "Failed";
    case Outcome::Preempted: return "Preempted";
  }
  return "?";
}

struct ExperienceRecord {
  Millis t = 0;
  std::string agent_id;
  std::string goal_or_event_id;
  std::string plan_id;
  Outcome outcome = Outcome::Resolved;
  Millis duration_ms = 0;
};

struct MemorySnapshot {
  std::uint64_t version = 0;
  Millis timestamp = 0;
  std::string contents;  // canonical serialized image
};

/// Two concurrent writes to one key, each carrying the base version read.
struct WriteOp {
  std::string key;
  std::string value;
  std::uint64_t base_version = 0;
  Millis t = 0;
  std::string writer_id;
};

/// Deterministic total-order conflict rule: higher base version wins,
/// then higher timestamp, then lexicographically greater writer id.
inline const WriteOp& resolve_conflict(const WriteOp& a, const WriteOp& b) {
  if (a.base_version != b.base_version)
    return a.base_version > b.base_version ? a : b;
  if (a.t != b.t) return a.t > b.t ? a : b;
  return a.writer_id >= b.writer_id ? a : b;
}

namespace detail {

inline ojson fault_case_to_json(const FaultCase& c) {
  ojson j;
  j["id"] = c.id;
  j["symptom_features"] = std::vector<std::string>(c.symptom_features.begin(),
                                                   c.symptom_features.end());
  j["root_cause"] = c.root_cause;
  auto steps = [](const std::vector<ToolStepTemplate>& ss) {
    ojson arr = ojson::array();
    for (const auto& s : ss) {
      ojson sj;
      sj["tool"] = s.tool;
      sj["args"] = s.args;
      arr.push_back(sj);
    }
    return arr;
  };
  j["confirm_steps"] = steps(c.confirm_steps);
  j["remedy_template"] = steps(c.remedy_template);
  j["recommended_params"] = c.recommended_params;
  return j;
}

inline FaultCase fault_case_from_json(const ojson& j) {
  FaultCase c;
  c.id = j.at("id").get<std::string>();
  for (const auto& f : j.at("symptom_features"))
    c.symptom_features.insert(f.get<std::string>());
  c.root_cause = j.at("root_cause").get<std::string>();
  auto steps = [](const ojson& arr) {
    std::vector<ToolStepTemplate> ss;
    for (const auto& sj : arr) {
      ToolStepTemplate s;
      s.tool = sj.at("tool").get<std::string>();
      for (auto it = sj.at("args").begin(); it != sj.at("args").end(); ++it)
        s.args[it.key()] = it.value().get<std::string>();
      ss.push_back(std::move(s));
    }
    return ss;
  };
  if (j.contains("confirm_steps")) c.confirm_steps = steps(j.at("confirm_steps"));
  c.remedy_template = steps(j.at("remedy_template"));
  if (j.contains("recommended_params"))
    for (auto it = j.at("recommended_params").begin();
         it != j.at("recommended_params").end(); ++it)
      c.recommended_params[it.key()] = it.value().get<std::int64_t>();
  return c;
}

}  // namespace detail

/// Public Memory: the shared fault-case library plus a key-value area,
/// with snapshot versioning. One logical store; multi-writer semantics
/// are modeled by resolve_conflict alone.
class PublicMemory {
 public:
  std::vector<FaultCase> fault_cases;
  std::map<std::string, std::string> kv;

  /// Token-overlap retrieval: score = |features ∩ symptoms| / |symptoms|,
  /// sorted by (score desc, id asc), zero-score cases dropped.
  std::vector<std::pair<const FaultCase*, double>> query_fault_cases(
      const std::set<std::string>& features) const {
    if (features.empty())
      throw std::invalid_argument("query_fault_cases: empty feature set");
    std::vector<std::pair<const FaultCase*, double>> out;
    for (const auto& c : fault_cases) {
      std::size_t hits = 0;
      for (const auto& f : c.symptom_features) hits += features.count(f);
      if (hits == 0) continue;
      out.emplace_back(&c, static_cast<double>(hits) /
                               static_cast<double>(c.symptom_features.size()));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first->id < b.first->id;
    });
    return out;
  }

  const FaultCase* find_case(const std::string& id) const {
    for (const auto& c : fault_cases)
      if (c.id == id) return &c;
    return nullptr;
  }

  MemorySnapshot snapshot(Millis t) {
    MemorySnapshot s;
    s.version = ++last_version_;
    s.timestamp = t;
    s.contents = image();
    snapshots_[s.version] = s;
    return s;
  }

  void rollback(std::uint64_t version) {
    auto it = snapshots_.find(version);
    if (it == snapshots_.end())
      throw std::out_of_range("unknown snapshot version " +
                              std::to_string(version));
    restore(it->second.contents);
  }

  std::string image() const {
    ojson j;
    ojson cases = ojson::array();
    for (const auto& c : fault_cases) cases.push_back(detail::fault_case_to_json(c));
    j["fault_cases"] = cases;
    j["kv"] = kv;
    return j.dump();
  }

  void restore(const std::string& img) {
    ojson j = ojson::parse(img);
    fault_cases.clear();
    for (const auto& cj : j.at("fault_cases"))
      fault_cases.push_back(detail::fault_case_from_json(cj));
    kv.clear();
    for (auto it = j.at("kv").begin(); it != j.at("kv").end(); ++it)
      kv[it.key()] = it.value().get<std::string>();
  }

 private:
  std::uint64_t last_version_ = 0;
  std::map<std::uint64_t, MemorySnapshot> snapshots_;
};

/// Per-agent Private Memory: SLA table, meta-goals, append-only
/// experience log.
class PrivateMemory {
 public:
  std::vector<MetaGoal> meta_goals;

  void put_sla(const SlaRequirement& r) {
    if (r.lower_bound <= 0.0)
      throw std::invalid_argument("SLA lower_bound must be > 0");
    slas_[r.terminal_id] = r;
  }

  const SlaRequirement& get_sla(const std::string& terminal_id) const {
    auto it = slas_.find(terminal_id);
    if (it == slas_.end())
      throw std::out_of_range("no SLA for terminal " + terminal_id);
    return it->second;
  }

  bool has_sla(const std::string& terminal_id) const {
    return slas_.count(terminal_id) > 0;
  }

  void record_experience(ExperienceRecord r) { experience_.push_back(std::move(r)); }

  const std::vector<ExperienceRecord>& experience() const { return experience_; }

 private:
  std::map<std::string, SlaRequirement> slas_;
  std::vector<ExperienceRecord> experience_;
};

}  // namespace hana
