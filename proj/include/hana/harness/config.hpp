#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hana/agents/executive.hpp"
#include "hana/agents/orchestrator.hpp"
#include "hana/agents/rule_based.hpp"
#include "hana/memory/store.hpp"
#include "hana/sim/types.hpp"
#include "hana/toolbox/toolbox.hpp"

namespace hana {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Unprotected, RuleBased, Hana, NoAgent };

inline const char* mode_token(RunMode m) {
  switch (m) {
    case RunMode::Unprotected: return "unprotected";
    case RunMode::RuleBased: return "rulebased";
    case RunMode::Hana: return "hana";
    case RunMode::NoAgent: return "noagent";
  }
  return "?";
}

inline RunMode mode_from_token(const std::string& s) {
  if (s == "unprotected") return RunMode::Unprotected;
  if (s == "rulebased") return RunMode::RuleBased;
  if (s == "hana" || s == "withagent") return RunMode::Hana;
  if (s == "noagent") return RunMode::NoAgent;
  throw ConfigError("unknown mode: " + s);
}

struct BackgroundConfig {
  std::string cell;
  int count = 0;
  std::string prefix = "bg";
  // Piecewise-constant aggregate offered load, expanded from steps and
  // ramps at load time.
  std::vector<std::pair<Millis, double>> profile;
};

struct ManualStages {
  int analysis_min = 0;
  int resolution_min = 0;
};

struct ScenarioConfig {
  std::string name;
  Millis horizon_ms = 0;
  Millis sample_interval_ms = 1000;
  std::uint64_t seed = 1;
  std::vector<Cell> cells;
  std::vector<QosFlow> flows;
  std::vector<NfNode> nodes;
  std::optional<BackgroundConfig> background;
  std::map<AlertCode, FaultInjection> fault_scenarios;  // case-b, keyed by failure
  std::map<AlertCode, ManualStages> manual_stages;
  Millis dispatch_latency_ms = 60'000;
  std::string protected_terminal;
  OrchestratorConfig orchestrator;
  ExecutiveConfig executive;
  RuleBasedConfig rule_based;
  ToolLatencies tool_latencies;
  Millis rule_qos_step_ms = 5'000;  // per script action in the Case A remedy
};

struct Knowledge {
  PublicMemory public_memory;
  std::vector<SlaRequirement> slas;
  std::vector<MetaGoal> meta_goals;
};

namespace cfg_detail {

inline ojson parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ojson::parse(ss.str());
  } catch (const ojson::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename T>
T get(const ojson& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + ": field '" + key + "' has wrong type");
  }
}

template <typename T>
T get_or(const ojson& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace cfg_detail

inline ScenarioConfig load_scenario(const std::string& path) {
  using namespace cfg_detail;
  const ojson j = parse_file(path);
  ScenarioConfig c;
  c.name = get<std::string>(j, "name", path);
  c.horizon_ms = get<Millis>(j, "horizon_ms", path);
  c.sample_interval_ms = get_or<Millis>(j, "sample_interval_ms", 1000);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (c.horizon_ms <= 0) throw ConfigError(path + ": horizon_ms must be > 0");
  if (c.sample_interval_ms <= 0)
    throw ConfigError(path + ": sample_interval_ms must be > 0");

  for (const auto& cj : get_or<ojson>(j, "cells", ojson::array())) {
    Cell cell;
    cell.id = get<std::string>(cj, "id", path + ":cells");
    cell.capacity_mbps = get<double>(cj, "capacity_mbps", path + ":cells");
    if (cell.capacity_mbps <= 0.0)
      throw ConfigError(path + ": cell " + cell.id + " capacity must be > 0");
    c.cells.push_back(std::move(cell));
  }
  for (const auto& fj : get_or<ojson>(j, "flows", ojson::array())) {
    QosFlow f;
    f.id = get<std::string>(fj, "id", path + ":flows");
    f.terminal_id = get<std::string>(fj, "terminal", path + ":flows");
    f.cell_id = get<std::string>(fj, "cell", path + ":flows");
    f.ng_qi = ngqi_from_string(get_or<std::string>(fj, "ng_qi", "BestEffort"));
    f.gbr_mbps = get_or<double>(fj, "gbr_mbps", 0.0);
    f.demand_mbps = get_or<double>(fj, "demand_mbps", 0.0);
    if (f.ng_qi != NgQi::GuaranteedBitrate && f.gbr_mbps != 0.0)
      throw ConfigError(path + ": flow " + f.id + " has gbr without GBR class");
    c.flows.push_back(std::move(f));
  }
  for (const auto& nj : get_or<ojson>(j, "nodes", ojson::array())) {
    NfNode n;
    n.id = get<std::string>(nj, "id", path + ":nodes");
    n.kind = node_kind_from_string(get<std::string>(nj, "kind", path + ":nodes"));
    n.address = get<std::string>(nj, "address", path + ":nodes");
    if (nj.contains("params"))
      for (const auto& [k, v] : nj.at("params").items())
        n.params[k] = v.get<std::int64_t>();
    if (nj.contains("usage"))
      for (const auto& [k, v] : nj.at("usage").items())
        n.usage[k] = v.get<std::int64_t>();
    c.nodes.push_back(std::move(n));
  }

  if (j.contains("background")) {
    const ojson& bj = j.at("background");
    BackgroundConfig bg;
    bg.cell = get<std::string>(bj, "cell", path + ":background");
    bg.count = get<int>(bj, "count", path + ":background");
    bg.prefix = get_or<std::string>(bj, "prefix", std::string("bg"));
    if (bg.count <= 0) throw ConfigError(path + ": background count must be > 0");
    for (const auto& pj : get<ojson>(bj, "profile", path + ":background")) {
      if (pj.contains("ramp")) {
        const ojson& r = pj.at("ramp");
        const Millis t0 = get<Millis>(r, "t_start_ms", path + ":ramp");
        const Millis t1 = get<Millis>(r, "t_end_ms", path + ":ramp");
        const double from = get<double>(r, "from_mbps", path + ":ramp");
        const double to = get<double>(r, "to_mbps", path + ":ramp");
        const Millis step = get_or<Millis>(r, "step_ms", 1000);
        if (t1 <= t0 || step <= 0)
          throw ConfigError(path + ": malformed ramp in background profile");
        for (Millis t = t0; t < t1; t += step) {
          const double frac = static_cast<double>(t - t0) / static_cast<double>(t1 - t0);
          bg.profile.emplace_back(t, from + (to - from) * frac);
        }
      } else {
        bg.profile.emplace_back(get<Millis>(pj, "t_ms", path + ":profile"),
                                get<double>(pj, "aggregate_mbps", path + ":profile"));
      }
    }
    c.background = std::move(bg);
  }

  if (j.contains("fault_scenarios")) {
    for (const auto& [key, fj] : j.at("fault_scenarios").items()) {
      const AlertCode code = alert_code_from_string(key);
      FaultInjection f;
      f.code = code;
      f.t_inject = get<Millis>(fj, "t_inject_ms", path + ":fault_scenarios");
      f.target_node = get<std::string>(fj, "target", path + ":fault_scenarios");
      f.set_unreachable = get_or<bool>(fj, "set_unreachable", false);
      if (f.t_inject < 0 || f.t_inject > c.horizon_ms)
        throw ConfigError(path + ": fault t_inject outside scenario horizon");
      if (fj.contains("params"))
        for (const auto& [k, v] : fj.at("params").items())
          f.param_overrides[k] = v.get<std::int64_t>();
      if (fj.contains("usage"))
        for (const auto& [k, v] : fj.at("usage").items())
          f.usage_overrides[k] = v.get<std::int64_t>();
      c.fault_scenarios[code] = std::move(f);
    }
  }
  if (j.contains("manual_stages")) {
    for (const auto& [key, mj] : j.at("manual_stages").items()) {
      ManualStages m;
      m.analysis_min = get<int>(mj, "analysis_min", path + ":manual_stages");
      m.resolution_min = get<int>(mj, "resolution_min", path + ":manual_stages");
      c.manual_stages[alert_code_from_string(key)] = m;
    }
  }

  c.dispatch_latency_ms = get_or<Millis>(j, "dispatch_latency_ms", 60'000);
  c.protected_terminal = get_or<std::string>(j, "protected_terminal", std::string{});

  if (j.contains("orchestrator")) {
    const ojson& oj = j.at("orchestrator");
    c.orchestrator.window = get_or<std::size_t>(oj, "window", 10);
    c.orchestrator.choice.confidence_threshold =
        get_or<double>(oj, "confidence_threshold", 0.8);
    c.orchestrator.choice.lead_time_ms = get_or<Millis>(oj, "lead_time_ms", 30'000);
    c.orchestrator.hysteresis_ms = get_or<Millis>(oj, "hysteresis_ms", 60'000);
    c.orchestrator.prediction_horizon_ms =
        get_or<Millis>(oj, "prediction_horizon_ms", 120'000);
  }
  if (j.contains("executive")) {
    const ojson& ej = j.at("executive");
    c.executive.verify_consecutive = get_or<int>(ej, "verify_consecutive", 3);
    c.executive.verify_timeout_ms = get_or<Millis>(ej, "verify_timeout_ms", 120'000);
  }
  if (j.contains("rule_based")) {
    const ojson& rj = j.at("rule_based");
    c.rule_based.debounce_ms = get_or<Millis>(rj, "debounce_ms", 20'000);
    c.rule_based.check_cycle_ms = get_or<Millis>(rj, "check_cycle_ms", 300'000);
    c.rule_qos_step_ms = get_or<Millis>(rj, "qos_step_ms", 5'000);
  }
  if (j.contains("tool_latencies")) {
    const ojson& tj = j.at("tool_latencies");
    ToolLatencies& t = c.tool_latencies;
    t.diagnostic = get_or<Millis>(tj, "diagnostic_ms", t.diagnostic);
    t.ping_timeout = get_or<Millis>(tj, "ping_timeout_ms", t.ping_timeout);
    t.qos_write = get_or<Millis>(tj, "qos_write_ms", t.qos_write);
    t.config_write = get_or<Millis>(tj, "config_write_ms", t.config_write);
    t.reload = get_or<Millis>(tj, "reload_ms", t.reload);
    t.restart = get_or<Millis>(tj, "restart_ms", t.restart);
    t.scale = get_or<Millis>(tj, "scale_ms", t.scale);
  }

  // Cross references must resolve before any simulation starts.
  auto cell_exists = [&](const std::string& id) {
    for (const auto& cell : c.cells)
      if (cell.id == id) return true;
    return false;
  };
  for (const auto& f : c.flows)
    if (!cell_exists(f.cell_id))
      throw ConfigError(path + ": flow " + f.id + " references unknown cell " +
                        f.cell_id);
  if (c.background && !cell_exists(c.background->cell))
    throw ConfigError(path + ": background references unknown cell " +
                      c.background->cell);
  for (const auto& [code, f] : c.fault_scenarios) {
    bool found = false;
    for (const auto& n : c.nodes) found = found || n.id == f.target_node;
    if (!found)
      throw ConfigError(path + ": fault targets unknown node " + f.target_node);
  }
  return c;
}

inline Knowledge load_knowledge(const std::string& path) {
  using namespace cfg_detail;
  const ojson j = parse_file(path);
  Knowledge k;
  for (const auto& cj : get_or<ojson>(j, "fault_cases", ojson::array())) {
    try {
      k.public_memory.fault_cases.push_back(detail::fault_case_from_json(cj));
    } catch (const std::exception& e) {
      throw ConfigError(path + ": bad fault case: " + e.what());
    }
  }
  for (const auto& c : k.public_memory.fault_cases)
    if (c.symptom_features.empty())
      throw ConfigError(path + ": fault case " + c.id + " has no symptom features");
  for (const auto& sj : get_or<ojson>(j, "slas", ojson::array())) {
    SlaRequirement r;
    r.terminal_id = get<std::string>(sj, "terminal", path + ":slas");
    r.lower_bound = get<double>(sj, "lower_bound_mbps", path + ":slas");
    r.priority = get_or<int>(sj, "priority", 0);
    if (r.lower_bound <= 0.0)
      throw ConfigError(path + ": SLA for " + r.terminal_id + " must be > 0");
    k.slas.push_back(std::move(r));
  }
  for (const auto& mj : get_or<ojson>(j, "meta_goals", ojson::array())) {
    MetaGoal m;
    m.id = get<std::string>(mj, "id", path + ":meta_goals");
    m.terminal_id = get<std::string>(mj, "terminal", path + ":meta_goals");
    k.meta_goals.push_back(std::move(m));
  }
  return k;
}

}  // namespace hana
