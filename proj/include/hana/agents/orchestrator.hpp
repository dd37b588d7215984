#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hana/core/linefit.hpp"
#include "hana/memory/store.hpp"
#include "hana/protocol/messages.hpp"
#include "hana/sim/network.hpp"

namespace hana {

// ---------------------------------------------------------------------
// Slow path: perceive -> self-awareness -> predict -> choice making.
// Fast path: alert -> context -> preliminary diagnosis -> reactive event.
// ---------------------------------------------------------------------

struct SituationAssessment {
  Millis t = 0;
  double load_slope_mbps_per_s = 0.0;  // least-squares trend of offered load
  bool vip_present = false;
  std::vector<std::pair<std::string, AlertCode>> active_alerts;
};

struct Deviation {
  std::string meta_goal_id;
  double margin_slope_per_s = 0.0;  // negative: margin shrinking
  double current_margin = 0.0;
};

struct Prediction {
  Millis t_made = 0;
  std::optional<Millis> t_violation;
  double confidence = 0.0;  // R^2 of the margin fit, clipped to [0,1]
  std::size_t window = 0;
};

/// Cell load trend plus VIP-session correlation over the sliding window.
inline SituationAssessment perceive(std::span<const TelemetrySample> samples,
                                    const PrivateMemory& priv) {
  if (samples.empty())
    throw std::invalid_argument("perceive: need at least one sample");
  SituationAssessment a;
  const TelemetrySample& last = samples.back();
  a.t = last.t;
  a.active_alerts = last.active_alerts;
  for (const auto& mg : priv.meta_goals)
    if (priv.has_sla(mg.terminal_id)) a.vip_present = true;
  if (samples.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
      xs.push_back(static_cast<double>(s.t) / 1000.0);
      ys.push_back(s.cell_offered_load);
    }
    a.load_slope_mbps_per_s = fit_line(xs, ys).slope;
  }
  return a;
}

/// Margin of the meta-goal's intent predicate against one sample.
/// Protected (GBR at or above the bound) flows report their granted
/// headroom; unprotected flows report the headroom the cell could still
/// give them: capacity - load offered by everyone else - bound.
inline std::optional<double> intent_margin(const TelemetrySample& s,
                                           const std::string& flow_id,
                                           double sla_bound) {
  auto it = s.flows.find(flow_id);
  if (it == s.flows.end()) return std::nullopt;
  const FlowSample& f = it->second;
  if (f.ng_qi == NgQi::GuaranteedBitrate && f.gbr_mbps >= sla_bound)
    return f.granted_mbps - sla_bound;
  return s.cell_capacity_mbps - (s.cell_offered_load - f.demand_mbps) - sla_bound;
}

/// Emits a Deviation when the margin trend is worsening, even while the
/// intent is still satisfied.
inline std::optional<Deviation> self_awareness_check(
    const std::string& meta_goal_id,
    std::span<const std::pair<Millis, double>> margin_window) {
  if (margin_window.size() < 2) return std::nullopt;
  std::vector<double> xs, ys;
  for (const auto& [t, m] : margin_window) {
    xs.push_back(static_cast<double>(t) / 1000.0);
    ys.push_back(m);
  }
  const LineFit f = fit_line(xs, ys);
  if (f.slope >= -1e-9) return std::nullopt;
  Deviation d;
  d.meta_goal_id = meta_goal_id;
  d.margin_slope_per_s = f.slope;
  d.current_margin = margin_window.back().second;
  return d;
}

/// Linear extrapolation of the margin; the forecast violation is the
/// fitted line's zero crossing, confidence is the fit's R^2.
inline Prediction predict(std::span<const std::pair<Millis, double>> margin_window,
                          Millis horizon_ms = 120'000) {
  if (margin_window.size() < 3)
    throw std::invalid_argument("predict: window must hold >= 3 samples");
  std::vector<double> xs, ys;
  for (const auto& [t, m] : margin_window) {
    xs.push_back(static_cast<double>(t) / 1000.0);
    ys.push_back(m);
  }
  const LineFit f = fit_line(xs, ys);  // throws on all-equal timestamps
  Prediction p;
  p.t_made = margin_window.back().first;
  p.window = margin_window.size();
  p.confidence = f.r2;
  if (f.slope < 0.0) {
    const double t_cross_s = -f.intercept / f.slope;
    const Millis t_violation = static_cast<Millis>(t_cross_s * 1000.0);
    if (t_violation > p.t_made && t_violation <= p.t_made + horizon_ms)
      p.t_violation = t_violation;
  }
  return p;
}

struct ChoiceConfig {
  double confidence_threshold = 0.8;
  Millis lead_time_ms = 30'000;
};

/// Threshold-rule cost-benefit: act only on confident forecasts whose
/// violation falls inside the lead-time horizon. The goal's guardrail is
/// capped at the SLA bound.
inline std::optional<InternalGoal> choice_making(
    const Deviation& deviation, const Prediction& prediction,
    const SlaRequirement& sla, const std::string& flow_id,
    const std::string& cell_id, const ChoiceConfig& cfg, int goal_seq) {
  if (!prediction.t_violation) return std::nullopt;
  if (prediction.confidence < cfg.confidence_threshold) return std::nullopt;
  if (*prediction.t_violation - prediction.t_made > cfg.lead_time_ms)
    return std::nullopt;
  InternalGoal g;
  g.goal_id = "goal-" + std::to_string(goal_seq);
  g.objective = "PreemptiveServiceAssurance";
  g.target_terminal = sla.terminal_id;
  g.target_flow = flow_id;
  g.target_cell = cell_id;
  g.constraints.max_reserve_mbps = sla.lower_bound;
  g.constraints.deadline = *prediction.t_violation;
  g.originating_meta_goal_id = deviation.meta_goal_id;
  return g;
}

// ---------------------------------------------------------------------
// Fast path
// ---------------------------------------------------------------------

/// Feature tokens for fault-case retrieval: alert code, node kind, and a
/// fixed keyword expansion per code.
inline std::set<std::string> alert_features(const Alert& a) {
  std::set<std::string> f{to_string(a.code)};
  auto kind = a.details.find("node_kind");
  if (kind != a.details.end()) f.insert(kind->second);
  switch (a.code) {
    case AlertCode::HttpConnExhaustion:
      f.insert({"http", "connection", "exhaustion"});
      break;
    case AlertCode::AmfUnreachable:
      f.insert({"unreachable", "connectivity"});
      break;
    case AlertCode::SessionCapacityL1:
      f.insert({"session", "capacity"});
      break;
  }
  return f;
}

namespace detail {

/// Fills "$slot" placeholders from recommended params and live node
/// state; numeric-looking literals become numbers so tool schemas match.
inline ojson resolve_template_value(
    const std::string& tmpl, const Alert& alert, const FaultCase& c,
    const std::map<std::string, std::int64_t>& live_params) {
  if (!tmpl.empty() && tmpl.front() == '$') {
    const std::string slot = tmpl.substr(1);
    if (slot == "node") return alert.source_node;
    if (slot == "address") {
      auto it = alert.details.find("address");
      return it == alert.details.end() ? std::string{} : it->second;
    }
    auto rec = c.recommended_params.find(slot);
    if (rec != c.recommended_params.end()) return rec->second;
    auto live = live_params.find(slot);
    if (live != live_params.end()) return live->second;
    return tmpl;  // unresolved slot stays literal
  }
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tmpl, &pos);
    if (pos == tmpl.size()) return static_cast<std::int64_t>(v);
  } catch (...) {
  }
  return tmpl;
}

inline std::string fill_text(std::string text, const FaultCase& c,
                             const std::map<std::string, std::int64_t>& live) {
  auto replace_all = [&text](const std::string& slot, const std::string& value) {
    std::size_t pos;
    while ((pos = text.find(slot)) != std::string::npos)
      text.replace(pos, slot.size(), value);
  };
  for (const auto& [k, v] : live) replace_all("$current_" + k, std::to_string(v));
  for (const auto& [k, v] : c.recommended_params)
    replace_all("$" + k, std::to_string(v));
  return text;
}

}  // namespace detail

/// Preliminary diagnosis via token-overlap retrieval from Public Memory.
/// Unmatched alerts still produce a (confidence 0) diagnosis.
inline Diagnosis diagnose(const Alert& alert, const PublicMemory& pub,
                          const std::map<std::string, std::int64_t>& live_params) {
  Diagnosis d;
  auto ranked = pub.query_fault_cases(alert_features(alert));
  if (ranked.empty()) {
    d.root_cause = "no matching fault case for " + std::string(to_string(alert.code));
    d.confidence = 0.0;
    return d;
  }
  const FaultCase& c = *ranked.front().first;
  d.matched_case_id = c.id;
  d.confidence = ranked.front().second;
  d.root_cause = detail::fill_text(c.root_cause, c, live_params);
  auto instantiate = [&](const std::vector<ToolStepTemplate>& tmpl) {
    std::vector<std::pair<std::string, std::map<std::string, ojson>>> out;
    for (const auto& s : tmpl) {
      std::map<std::string, ojson> args;
      for (const auto& [k, v] : s.args)
        args[k] = detail::resolve_template_value(v, alert, c, live_params);
      out.emplace_back(s.tool, std::move(args));
    }
    return out;
  };
  d.confirm_steps = instantiate(c.confirm_steps);
  d.remedy_steps = instantiate(c.remedy_template);
  return d;
}

/// The entire fast path: context snapshot + diagnosis, no prediction, no
/// choice making. Returns the event ready for A2A dispatch.
inline ReactiveStateEvent handle_alert(
    const Alert& alert, const PublicMemory& pub,
    const std::map<std::string, std::map<std::string, std::int64_t>>& node_usages,
    const std::map<std::string, std::int64_t>& live_params, int event_seq) {
  ReactiveStateEvent e;
  e.event_id = "event-" + std::to_string(event_seq);
  e.alert = alert;
  e.system_context = node_usages;
  e.diagnosis = diagnose(alert, pub, live_params);
  return e;
}

// ---------------------------------------------------------------------
// The orchestrator proper: holds sliding windows and hysteresis, never
// executes tools itself.
// ---------------------------------------------------------------------

struct OrchestratorConfig {
  std::size_t window = 10;
  ChoiceConfig choice;
  Millis hysteresis_ms = 60'000;
  Millis prediction_horizon_ms = 120'000;
  std::string assurance_agent = "assurance";
  std::string healing_agent = "self_healing";
  // terminal -> (flow, cell), from scenario wiring
  std::map<std::string, std::pair<std::string, std::string>> terminal_flows;
};

class Orchestrator {
 public:
  Orchestrator(OrchestratorConfig cfg, const PublicMemory* pub, PrivateMemory* priv)
      : cfg_(std::move(cfg)), pub_(pub), priv_(priv) {}

  /// Slow path; returns goal messages to dispatch this tick.
  std::vector<A2AMessage> on_sample(const TelemetrySample& sample) {
    std::vector<A2AMessage> out;
    samples_.push_back(sample);
    while (samples_.size() > cfg_.window) samples_.pop_front();

    for (const auto& mg : priv_->meta_goals) {
      if (!priv_->has_sla(mg.terminal_id)) continue;
      auto wiring = cfg_.terminal_flows.find(mg.terminal_id);
      if (wiring == cfg_.terminal_flows.end()) continue;
      const auto& [flow_id, cell_id] = wiring->second;
      const SlaRequirement& sla = priv_->get_sla(mg.terminal_id);

      auto& window = margins_[mg.id];
      if (auto m = intent_margin(sample, flow_id, sla.lower_bound)) {
        window.emplace_back(sample.t, *m);
        while (window.size() > cfg_.window) window.pop_front();
      }

      auto hys = hysteresis_until_.find(mg.id);
      if (hys != hysteresis_until_.end() && sample.t < hys->second) continue;

      std::vector<std::pair<Millis, double>> w(window.begin(), window.end());
      auto deviation = self_awareness_check(mg.id, w);
      if (!deviation || w.size() < 3) continue;
      Prediction p = predict(w, cfg_.prediction_horizon_ms);
      auto goal = choice_making(*deviation, p, sla, flow_id, cell_id, cfg_.choice,
                                ++goal_seq_);
      log_decision(sample.t, *deviation, p, goal);
      if (!goal) continue;
      hysteresis_until_[mg.id] = sample.t + cfg_.hysteresis_ms;
      A2AMessage msg;
      msg.t_sent = sample.t;
      msg.sender = "orchestrator";
      msg.recipient = cfg_.assurance_agent;
      msg.priority = kPriorityGoal;
      msg.body = *goal;
      out.push_back(std::move(msg));
    }
    return out;
  }

  /// Fast path; no prediction, no choice making.
  A2AMessage on_alert(const Alert& alert, const Simnet& net, Millis now) {
    std::map<std::string, std::map<std::string, std::int64_t>> context;
    for (const auto& [id, n] : net.nodes) context[id] = n.usage;
    std::map<std::string, std::int64_t> live;
    if (const NfNode* n = net.find_node(alert.source_node)) live = n->params;
    ReactiveStateEvent e =
        handle_alert(alert, *pub_, context, live, ++event_seq_);
    A2AMessage msg;
    msg.t_sent = now;
    msg.sender = "orchestrator";
    msg.recipient = cfg_.healing_agent;
    msg.priority = kPriorityEvent;
    msg.body = std::move(e);
    return msg;
  }

  const std::vector<ojson>& decisions() const { return decisions_; }

 private:
  void log_decision(Millis t, const Deviation& d, const Prediction& p,
                    const std::optional<InternalGoal>& goal) {
    ojson j;
    j["t"] = t;
    j["meta_goal"] = d.meta_goal_id;
    j["margin"] = d.current_margin;
    j["margin_slope"] = d.margin_slope_per_s;
    j["confidence"] = p.confidence;
    j["t_violation"] = p.t_violation ? ojson(*p.t_violation) : ojson();
    j["goal"] = goal ? ojson(goal->goal_id) : ojson();
    decisions_.push_back(std::move(j));
  }

  OrchestratorConfig cfg_;
  const PublicMemory* pub_;
  PrivateMemory* priv_;
  std::deque<TelemetrySample> samples_;
  std::map<std::string, std::deque<std::pair<Millis, double>>> margins_;
  std::map<std::string, Millis> hysteresis_until_;
  int goal_seq_ = 0;
  int event_seq_ = 0;
  std::vector<ojson> decisions_;
};

}  // namespace hana
