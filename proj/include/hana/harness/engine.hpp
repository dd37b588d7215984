#pragma once

#include <algorithm>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hana/agents/executive.hpp"
#include "hana/agents/orchestrator.hpp"
#include "hana/agents/rule_based.hpp"
#include "hana/harness/config.hpp"
#include "hana/protocol/bus.hpp"
#include "hana/sim/network.hpp"
#include "hana/toolbox/toolbox.hpp"

namespace hana {

inline constexpr const char* kLogFormat = "hana-log/1";

/// One scenario run: owns the clock, the simulated core, the bus, the
/// toolbox and whichever agents the mode calls for, and produces the
/// canonical event log. Deterministic by construction: a single logical
/// writer, timestamp order, FIFO tie-break.
class Engine {
 public:
  Engine(ScenarioConfig cfg, RunMode mode, const Knowledge& knowledge,
         std::uint64_t seed, std::optional<AlertCode> failure = std::nullopt)
      : cfg_(std::move(cfg)), mode_(mode), failure_(failure), seed_(seed) {
    // Rule-based Case A scripts pace their QoS writes themselves.
    ToolLatencies lat = cfg_.tool_latencies;
    if (mode_ == RunMode::RuleBased && !cfg_.protected_terminal.empty())
      lat.qos_write = cfg_.rule_qos_step_ms;
    tools_ = register_defaults(lat);

    for (const auto& c : cfg_.cells) net_.cells[c.id] = c;
    for (const auto& f : cfg_.flows) {
      net_.flows[f.id] = f;
      net_.cells.at(f.cell_id).flow_ids.push_back(f.id);
    }
    for (const auto& n : cfg_.nodes) net_.nodes[n.id] = n;
    if (cfg_.background) {
      for (int i = 1; i <= cfg_.background->count; ++i) {
        QosFlow f;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d", i);
        f.id = cfg_.background->prefix + buf;
        f.terminal_id = f.id + "_term";
        f.cell_id = cfg_.background->cell;
        net_.flows[f.id] = f;
        net_.cells.at(f.cell_id).flow_ids.push_back(f.id);
      }
    }
    for (auto& [_, cell] : net_.cells)
      std::sort(cell.flow_ids.begin(), cell.flow_ids.end());

    public_memory_ = knowledge.public_memory;
    for (const auto& sla : knowledge.slas) private_memory_.put_sla(sla);
    private_memory_.meta_goals = knowledge.meta_goals;

    if (mode_ == RunMode::Hana) setup_hana_agents();
    if (mode_ == RunMode::RuleBased) setup_rule_agent();

    log_header();
  }

  void run() {
    // Background demand steps land before the telemetry tick at equal t.
    if (cfg_.background)
      for (const auto& [t, aggregate] : cfg_.background->profile)
        clock_.schedule(t, [this, aggregate] { apply_background(aggregate); });
    if (failure_) {
      const FaultInjection& f = cfg_.fault_scenarios.at(*failure_);
      clock_.schedule(f.t_inject, [this, f] { inject(f); });
    }
    clock_.schedule(0, [this] { telemetry_tick(); });
    clock_.run_until(cfg_.horizon_ms);
  }

  // --- inspection ---------------------------------------------------

  const std::vector<std::string>& log() const { return log_; }
  const std::vector<TelemetrySample>& samples() const { return samples_; }
  const ToolRegistry& tools() const { return tools_; }
  const Simnet& net() const { return net_; }
  const PrivateMemory& private_memory() const { return private_memory_; }
  const Orchestrator* orchestrator() const { return orchestrator_.get(); }
  const std::vector<std::unique_ptr<Executive>>& executives() const {
    return executives_;
  }

  std::vector<std::pair<Millis, double>> trace(const std::string& flow_id) const {
    std::vector<std::pair<Millis, double>> out;
    for (const auto& s : samples_) {
      auto it = s.flows.find(flow_id);
      if (it != s.flows.end()) out.emplace_back(s.t, it->second.granted_mbps);
    }
    return out;
  }

 private:
  // --- setup --------------------------------------------------------

  void setup_hana_agents() {
    bus_.register_recipient("orchestrator");
    bus_.register_recipient("assurance");
    bus_.register_recipient("self_healing");

    OrchestratorConfig ocfg = cfg_.orchestrator;
    for (const auto& f : cfg_.flows)
      ocfg.terminal_flows[f.terminal_id] = {f.id, f.cell_id};
    orchestrator_ = std::make_unique<Orchestrator>(ocfg, &public_memory_,
                                                   &private_memory_);

    auto add_exec = [this](const std::string& id) {
      ExecutiveConfig ecfg = cfg_.executive;
      ecfg.id = id;
      executives_.push_back(
          std::make_unique<Executive>(ecfg, services(id), &arbiter_));
    };
    add_exec("assurance");
    add_exec("self_healing");
  }

  void setup_rule_agent() {
    RuleBasedConfig rcfg = cfg_.rule_based;
    rcfg.id = "rule_script";
    if (!cfg_.protected_terminal.empty()) {
      for (const auto& f : cfg_.flows) {
        if (f.terminal_id != cfg_.protected_terminal) continue;
        rcfg.protected_terminal = f.terminal_id;
        rcfg.protected_flow = f.id;
        rcfg.protected_cell = f.cell_id;
      }
      // The script's threshold is provisioned, not retrieved from memory.
      for (const auto& mg : private_memory_.meta_goals)
        if (mg.terminal_id == cfg_.protected_terminal &&
            private_memory_.has_sla(mg.terminal_id))
          rcfg.sla_bound_mbps = private_memory_.get_sla(mg.terminal_id).lower_bound;
    }
    rule_agent_ = std::make_unique<RuleBasedAgent>(rcfg, services("rule_script"));
  }

  AgentServices services(const std::string& agent_id) {
    AgentServices s;
    s.now = [this] { return clock_.now(); };
    s.invoke = [this](ToolCall call, std::function<void(const ToolResult&)> cb) {
      invoke_tool(std::move(call), std::move(cb));
    };
    s.has_tool = [this](const std::string& name) { return tools_.contains(name); };
    s.log = [this](ojson j) { log_.push_back(j.dump()); };
    s.net = [this]() -> const Simnet& { return net_; };
    s.schedule_at = [this](Millis t, std::function<void()> fn) {
      clock_.schedule(t, std::move(fn));
    };
    s.report_status = [this, agent_id](const std::string& ref,
                                       const std::string& status,
                                       const std::string& detail) {
      if (!bus_.known("orchestrator")) return;
      A2AMessage msg;
      msg.t_sent = clock_.now();
      msg.sender = agent_id;
      msg.recipient = "orchestrator";
      msg.priority = kPriorityGoal;
      msg.body = GoalStatus{ref, status, detail};
      send_a2a(std::move(msg));
    };
    s.priv = &private_memory_;
    s.pub = &public_memory_;
    return s;
  }

  // --- event-loop stages --------------------------------------------

  void telemetry_tick() {
    TelemetrySample s = net_.sample(clock_.now());
    samples_.push_back(s);
    log_telemetry(s);
    process_alarm_transitions(net_.evaluate_alarms(clock_.now()));
    for (auto& e : executives_) e->on_sample(s);
    if (orchestrator_) {
      auto msgs = orchestrator_->on_sample(s);
      log_decisions();
      for (auto& msg : msgs) send_a2a(std::move(msg));
    }
    if (rule_agent_) rule_agent_->on_sample(s);
    const Millis next = clock_.now() + cfg_.sample_interval_ms;
    if (next <= cfg_.horizon_ms)
      clock_.schedule(next, [this] { telemetry_tick(); });
  }

  void inject(const FaultInjection& f) {
    net_.apply_fault(f);
    ojson j;
    j["record"] = "fault";
    j["t"] = clock_.now();
    j["node"] = f.target_node;
    j["code"] = to_string(f.code);
    log_.push_back(j.dump());
    process_alarm_transitions(net_.evaluate_alarms(clock_.now()));
  }

  void process_alarm_transitions(const std::vector<AlarmTransition>& transitions) {
    for (const auto& tr : transitions) {
      ojson j;
      j["record"] = tr.raised ? "alert" : "alert_cleared";
      j["t"] = tr.alert.t;
      j["node"] = tr.alert.source_node;
      j["code"] = to_string(tr.alert.code);
      j["severity"] = to_string(tr.alert.severity);
      j["address"] = tr.alert.details.count("address")
                         ? tr.alert.details.at("address")
                         : "";
      log_.push_back(j.dump());
      if (tr.raised) {
        route_alert(tr.alert);
      } else {
        for (auto& e : executives_)
          e->on_alarm_cleared(tr.alert.source_node, tr.alert.code);
        if (rule_agent_)
          rule_agent_->on_alarm_cleared(tr.alert.source_node, tr.alert.code);
      }
    }
  }

  /// The monitoring plane routes alarms to whoever operates the network
  /// after a fixed dispatch delay; cognition past that point is logical
  /// zero for HANA's fast path.
  void route_alert(const Alert& alert) {
    const Millis t_route = clock_.now() + cfg_.dispatch_latency_ms;
    switch (mode_) {
      case RunMode::Hana:
        clock_.schedule(t_route, [this, alert] {
          A2AMessage msg = orchestrator_->on_alert(alert, net_, clock_.now());
          send_a2a(std::move(msg));
        });
        break;
      case RunMode::RuleBased:
        if (rule_agent_)
          clock_.schedule(t_route, [this, alert] { rule_agent_->on_alert(alert); });
        break;
      case RunMode::NoAgent:
        schedule_manual_repair(alert, t_route);
        break;
      case RunMode::Unprotected:
        break;
    }
  }

  /// Manual O&M modeled as fixed stage durations; the operator applies
  /// the same remedy the agents would, just much later.
  void schedule_manual_repair(const Alert& alert, Millis t_ack) {
    auto stages = cfg_.manual_stages.find(alert.code);
    if (stages == cfg_.manual_stages.end()) return;
    const Millis t_plan = t_ack + Millis(stages->second.analysis_min) * 60'000;
    const Millis t_fix = t_plan + Millis(stages->second.resolution_min) * 60'000;
    clock_.schedule(t_ack, [this, alert] {
      ojson j;
      j["record"] = "assignment";
      j["t"] = clock_.now();
      j["agent"] = "manual";
      j["id"] = std::string(to_string(alert.code));
      j["kind"] = "ticket";
      log_.push_back(j.dump());
    });
    clock_.schedule(t_plan, [this, alert] {
      ojson j;
      j["record"] = "plan";
      j["t"] = clock_.now();
      j["agent"] = "manual";
      j["id"] = std::string(to_string(alert.code));
      j["plan_id"] = "manual-runbook";
      j["steps"] = ojson::array();
      log_.push_back(j.dump());
    });
    clock_.schedule(t_fix, [this, alert] {
      apply_manual_remedy(alert);
      process_alarm_transitions(net_.evaluate_alarms(clock_.now()));
      ojson j;
      j["record"] = "verified";
      j["t"] = clock_.now();
      j["agent"] = "manual";
      j["id"] = std::string(to_string(alert.code));
      j["outcome"] = "Resolved";
      log_.push_back(j.dump());
    });
  }

  void apply_manual_remedy(const Alert& alert) {
    switch (alert.code) {
      case AlertCode::HttpConnExhaustion:
        net_.update_node_param(alert.source_node, "max_http_connections", 1000);
        break;
      case AlertCode::AmfUnreachable:
        net_.restart_node(alert.source_node);
        break;
      case AlertCode::SessionCapacityL1:
        net_.scale_session_capacity(alert.source_node, 1000);
        break;
    }
  }

  void apply_background(double aggregate_mbps) {
    if (!cfg_.background) return;
    const double each = aggregate_mbps / cfg_.background->count;
    for (auto& [id, f] : net_.flows)
      if (id.rfind(cfg_.background->prefix, 0) == 0 &&
          f.cell_id == cfg_.background->cell)
        f.demand_mbps = each;
  }

  // --- plumbing ------------------------------------------------------

  void send_a2a(A2AMessage msg) {
    auto err = bus_.send(msg);
    if (err) {
      ojson j;
      j["record"] = "routing_error";
      j["t"] = clock_.now();
      j["detail"] = *err;
      log_.push_back(j.dump());
      return;
    }
    // The bus assigned the id; log the canonical encoding of what queued.
    msg.msg_id = bus_.next_msg_id() - 1;
    log_.push_back(encode(msg));
    clock_.schedule(clock_.now(), [this] { pump(); });
  }

  void pump() {
    for (auto& e : executives_)
      for (const auto& msg : bus_.poll(e->id())) e->receive(msg);
    bus_.poll("orchestrator");  // statuses are logged at send time
  }

  void invoke_tool(ToolCall call, std::function<void(const ToolResult&)> cb) {
    call.call_id = ++call_seq_;
    {
      ojson j;
      j["record"] = "tool_call";
      j["t"] = clock_.now();
      j["call_id"] = call.call_id;
      j["tool"] = call.tool_name;
      j["args"] = call.args;
      j["issuer"] = call.issuer;
      j["cause"] = call.cause_id;
      log_.push_back(j.dump());
    }
    auto on_result = [this, cb = std::move(cb)](const ToolResult& r) {
      ojson j;
      j["record"] = "tool_result";
      j["t"] = clock_.now();
      j["call_id"] = r.call_id;
      j["success"] = r.success;
      j["reason"] = r.reason;
      log_.push_back(j.dump());
      process_alarm_transitions(net_.evaluate_alarms(clock_.now()));
      cb(r);
    };
    try {
      tools_.invoke(call, net_, clock_, on_result);
    } catch (const InvocationError& e) {
      // Malformed calls fail fast and atomically; no effect was scheduled.
      ToolResult r;
      r.call_id = call.call_id;
      r.t_completed = clock_.now();
      r.success = false;
      r.reason = e.what();
      on_result(r);
    }
  }

  void log_header() {
    ojson j;
    j["record"] = "header";
    j["format"] = kLogFormat;
    j["scenario"] = cfg_.name;
    j["mode"] = mode_token(mode_);
    j["failure"] = failure_ ? std::string(to_string(*failure_)) : std::string{};
    j["seed"] = seed_;
    log_.push_back(j.dump());
  }

  void log_telemetry(const TelemetrySample& s) {
    ojson j;
    j["record"] = "telemetry";
    j["t"] = s.t;
    j["cell"] = s.cell_id;
    j["offered"] = s.cell_offered_load;
    ojson granted = ojson::object();
    for (const auto& [fid, f] : s.flows) granted[fid] = f.granted_mbps;
    j["granted"] = granted;
    j["nodes"] = s.node_usages;
    log_.push_back(j.dump());
  }

  void log_decisions() {
    if (!orchestrator_) return;
    for (std::size_t i = decisions_logged_; i < orchestrator_->decisions().size();
         ++i) {
      ojson j;
      j["record"] = "decision";
      j["agent"] = "orchestrator";
      for (const auto& [k, v] : orchestrator_->decisions()[i].items()) j[k] = v;
      log_.push_back(j.dump());
    }
    decisions_logged_ = orchestrator_->decisions().size();
  }

  ScenarioConfig cfg_;
  RunMode mode_;
  std::optional<AlertCode> failure_;
  std::uint64_t seed_;

  SimClock clock_;
  Simnet net_;
  Bus bus_;
  ToolRegistry tools_;
  PublicMemory public_memory_;
  PrivateMemory private_memory_;
  Arbiter arbiter_;
  std::unique_ptr<Orchestrator> orchestrator_;
  std::vector<std::unique_ptr<Executive>> executives_;
  std::unique_ptr<RuleBasedAgent> rule_agent_;

  std::vector<std::string> log_;
  std::vector<TelemetrySample> samples_;
  std::uint64_t call_seq_ = 0;
  std::size_t decisions_logged_ = 0;
};

}  // namespace hana
