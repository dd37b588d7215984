#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hana/agents/executive.hpp"

namespace hana {

struct RuleBasedConfig {
  std::string id = "rule_script";
  // Case A: breach debounce, then sequential script execution.
  Millis debounce_ms = 20'000;
  std::string protected_terminal;
  std::string protected_flow;
  std::string protected_cell;
  double sla_bound_mbps = 2.0;
  // Case B: fixed decision tree, one conservative check cycle per step.
  Millis check_cycle_ms = 300'000;
};

/// The non-HANA baseline: a reactive script with monitoring debounce
/// (Case A) and a rigid ping -> pod -> link decision tree (Case B). No
/// memory, no prediction; remedies come from a built-in rule table.
class RuleBasedAgent {
 public:
  RuleBasedAgent(RuleBasedConfig cfg, AgentServices svc)
      : cfg_(std::move(cfg)), svc_(std::move(svc)) {}

  // --- Case A: threshold script --------------------------------------

  void on_sample(const TelemetrySample& s) {
    if (cfg_.protected_flow.empty() || acted_) return;
    auto it = s.flows.find(cfg_.protected_flow);
    if (it == s.flows.end()) return;
    const bool breached = it->second.granted_mbps < cfg_.sla_bound_mbps - 1e-9;
    if (!breached) {
      breach_start_.reset();
      return;
    }
    if (!breach_start_) breach_start_ = s.t;
    // Debounce: act only once the breach has persisted a full window.
    if (s.t - *breach_start_ < cfg_.debounce_ms) return;
    acted_ = true;
    log_simple("rule_decision", "qos_script");
    ToolCall qos;
    qos.tool_name = "set_qos_profile";
    qos.args = {{"flow", cfg_.protected_flow}, {"ng_qi", "GuaranteedBitrate"}};
    qos.issuer = cfg_.id;
    qos.cause_id = "rule-case-a";
    svc_.invoke(std::move(qos), [this](const ToolResult&) {
      ToolCall res;
      res.tool_name = "reserve_bandwidth";
      res.args = {{"cell", cfg_.protected_cell},
                  {"flow", cfg_.protected_flow},
                  {"rate_mbps", cfg_.sla_bound_mbps}};
      res.issuer = cfg_.id;
      res.cause_id = "rule-case-a";
      svc_.invoke(std::move(res), [](const ToolResult&) {});
    });
  }

  // --- Case B: sequential decision tree ------------------------------

  void on_alert(const Alert& alert) {
    ojson j;
    j["record"] = "assignment";
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = std::string(to_string(alert.code));
    j["kind"] = "rule_tree";
    svc_.log(std::move(j));
    alert_ = alert;
    run_check(0);
  }

  void on_alarm_cleared(const std::string& node, AlertCode code) {
    if (awaiting_clear_ && alert_ && alert_->source_node == node &&
        alert_->code == code) {
      awaiting_clear_ = false;
      ojson j;
      j["record"] = "verified";
      j["t"] = svc_.now();
      j["agent"] = cfg_.id;
      j["id"] = std::string(to_string(code));
      j["outcome"] = "Resolved";
      svc_.log(std::move(j));
    }
  }

 private:
  void run_check(std::size_t idx) {
    // First rung is always a ping; an unreachable target drags the
    // script through pod and link checks before it concludes.
    static const char* kTree[] = {"ping_check", "pod_status_check", "link_check"};
    const std::size_t total = ping_failed_ ? 3 : 1;
    if (idx >= total) {
      conclude();
      return;
    }
    ToolCall c;
    c.tool_name = kTree[idx];
    c.args = {{"node", alert_->source_node}};
    c.issuer = cfg_.id;
    c.cause_id = "rule-" + std::string(to_string(alert_->code));
    svc_.invoke(std::move(c), [this, idx](const ToolResult& r) {
      if (idx == 0) {
        auto it = r.outputs.find("reachable");
        ping_failed_ = it != r.outputs.end() && !it->second.get<bool>();
      }
      log_simple("rule_check", r.success ? "ok" : r.reason);
    });
    // The script soaks a full conservative cycle per check regardless of
    // how fast the probe itself returns.
    svc_.schedule_at(svc_.now() + cfg_.check_cycle_ms,
                     [this, idx] { run_check(idx + 1); });
  }

  void conclude() {
    std::vector<ToolCall> steps = remedy_for(alert_->code);
    ojson j;
    j["record"] = "plan";
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = std::string(to_string(alert_->code));
    j["plan_id"] = cfg_.id + "-tree";
    ojson names = ojson::array();
    for (const auto& s : steps) names.push_back(s.tool_name);
    j["steps"] = names;
    svc_.log(std::move(j));
    if (steps.empty()) {
      // No rule covers this alarm: suspend for human intervention.
      log_simple("suspended", "human_handoff");
      return;
    }
    awaiting_clear_ = true;
    run_remedy(std::make_shared<std::vector<ToolCall>>(std::move(steps)), 0);
  }

  void run_remedy(std::shared_ptr<std::vector<ToolCall>> steps, std::size_t i) {
    if (i >= steps->size()) return;
    svc_.invoke((*steps)[i], [this, steps, i](const ToolResult& r) {
      if (!r.success) {
        log_simple("suspended", r.reason);
        awaiting_clear_ = false;
        return;
      }
      run_remedy(steps, i + 1);
    });
  }

  std::vector<ToolCall> remedy_for(AlertCode code) {
    auto call = [this](const char* tool, std::map<std::string, ojson> args) {
      ToolCall c;
      c.tool_name = tool;
      c.args = std::move(args);
      c.issuer = cfg_.id;
      c.cause_id = "rule-" + std::string(to_string(code_));
      return c;
    };
    code_ = code;
    const std::string node = alert_->source_node;
    switch (code) {
      case AlertCode::HttpConnExhaustion:
        return {call("update_node_config", {{"node", node},
                                            {"param", "max_http_connections"},
                                            {"value", std::int64_t{1000}}}),
                call("graceful_reload", {{"node", node}})};
      case AlertCode::AmfUnreachable:
        return {call("restart_node", {{"node", node}})};
      case AlertCode::SessionCapacityL1:
        return {call("scale_session_capacity",
                     {{"node", node}, {"delta", std::int64_t{1000}}})};
    }
    return {};
  }

  void log_simple(const char* record, const std::string& detail) {
    ojson j;
    j["record"] = record;
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["detail"] = detail;
    svc_.log(std::move(j));
  }

  RuleBasedConfig cfg_;
  AgentServices svc_;
  std::optional<Millis> breach_start_;
  bool acted_ = false;
  std::optional<Alert> alert_;
  AlertCode code_ = AlertCode::HttpConnExhaustion;
  bool ping_failed_ = false;
  bool awaiting_clear_ = false;
};

}  // namespace hana
