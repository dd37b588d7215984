#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hana/memory/store.hpp"
#include "hana/protocol/bus.hpp"
#include "hana/protocol/messages.hpp"
#include "hana/sim/network.hpp"

namespace hana {

/// Engine-provided services an agent runs against. Everything is logical
/// time; invoke resolves through the toolbox and the shared event loop.
struct AgentServices {
  std::function<Millis()> now;
  std::function<void(ToolCall, std::function<void(const ToolResult&)>)> invoke;
  std::function<bool(const std::string&)> has_tool;
  std::function<void(ojson)> log;
  std::function<const Simnet&()> net;
  std::function<void(Millis, std::function<void()>)> schedule_at;
  std::function<void(const std::string&, const std::string&, const std::string&)>
      report_status;
  PrivateMemory* priv = nullptr;
  const PublicMemory* pub = nullptr;
};

/// Global priority-preemption coordinator. A reactive event activates
/// only once no internal-goal tool call is in flight; while any event is
/// active, every executive holds its internal goals paused.
class Arbiter {
 public:
  void register_member(std::function<void()> on_pause,
                       std::function<void()> on_resume) {
    members_.push_back({std::move(on_pause), std::move(on_resume)});
  }

  void begin_goal_call() { ++inflight_; }

  void end_goal_call() {
    --inflight_;
    maybe_activate();
  }

  int goal_calls_in_flight() const { return inflight_; }
  bool goals_suspended() const { return suspended_; }
  bool event_active() const { return event_active_; }

  /// cb activates the event entry; it fires as soon as in-flight goal
  /// work drains and no other event is active.
  void request_event_activation(std::function<void()> cb) {
    suspended_ = true;
    for (auto& m : members_) m.on_pause();
    pending_.push_back(std::move(cb));
    maybe_activate();
  }

  void event_finished() {
    event_active_ = false;
    if (pending_.empty()) {
      suspended_ = false;
      for (auto& m : members_) m.on_resume();
    } else {
      maybe_activate();
    }
  }

 private:
  void maybe_activate() {
    if (event_active_ || inflight_ > 0 || pending_.empty()) return;
    auto cb = std::move(pending_.front());
    pending_.pop_front();
    event_active_ = true;
    cb();
  }

  struct Member {
    std::function<void()> on_pause;
    std::function<void()> on_resume;
  };
  std::vector<Member> members_;
  std::deque<std::function<void()>> pending_;
  int inflight_ = 0;
  bool suspended_ = false;
  bool event_active_ = false;
};

// ---------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------

struct Plan {
  std::string plan_id;
  std::string source_id;
  std::vector<ToolCall> steps;
  bool already_satisfied = false;
  bool escalation = false;
  bool partial = false;          // guardrail capped the reservation
  double verify_target_mbps = 0.0;  // assurance verification threshold
};

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assurance plan: elevate the flow to GBR and reserve the SLA rate,
/// never exceeding the goal's guardrail. Already-protected flows yield
/// an empty-effect plan marked satisfied.
inline Plan plan_assurance(const InternalGoal& goal, const Simnet& net,
                           const SlaRequirement& sla, const std::string& agent_id,
                           int plan_seq) {
  if (goal.objective != "PreemptiveServiceAssurance")
    throw PlanError("unsupported objective: " + goal.objective);
  const QosFlow* flow = net.find_flow(goal.target_flow);
  if (!flow) throw PlanError("unknown flow: " + goal.target_flow);
  Plan p;
  p.plan_id = agent_id + "-plan-" + std::to_string(plan_seq);
  p.source_id = goal.goal_id;
  const double reserve =
      std::min(sla.lower_bound, goal.constraints.max_reserve_mbps);
  p.partial = reserve < sla.lower_bound;
  p.verify_target_mbps = reserve;
  if (flow->ng_qi == NgQi::GuaranteedBitrate && flow->gbr_mbps >= reserve) {
    p.already_satisfied = true;
    return p;
  }
  ToolCall qos;
  qos.tool_name = "set_qos_profile";
  qos.args = {{"flow", goal.target_flow}, {"ng_qi", "GuaranteedBitrate"}};
  qos.issuer = agent_id;
  qos.cause_id = goal.goal_id;
  qos.counts_as_goal_work = true;
  ToolCall res;
  res.tool_name = "reserve_bandwidth";
  res.args = {{"cell", goal.target_cell},
              {"flow", goal.target_flow},
              {"rate_mbps", reserve}};
  res.issuer = agent_id;
  res.cause_id = goal.goal_id;
  res.counts_as_goal_work = true;
  p.steps = {std::move(qos), std::move(res)};
  return p;
}

/// Healing plan instantiated from the event's diagnosis. Confidence 0
/// escalates (report only, no mutating calls).
inline Plan plan_healing(const ReactiveStateEvent& event,
                         const std::function<bool(const std::string&)>& has_tool,
                         const std::string& agent_id, int plan_seq) {
  Plan p;
  p.plan_id = agent_id + "-plan-" + std::to_string(plan_seq);
  p.source_id = event.event_id;
  if (event.diagnosis.confidence == 0.0) {
    p.escalation = true;
    return p;
  }
  for (const auto& [tool, args] : event.diagnosis.remedy_steps) {
    if (has_tool && !has_tool(tool))
      throw PlanError("remedy references unknown tool: " + tool);
    ToolCall c;
    c.tool_name = tool;
    c.args = args;
    c.issuer = agent_id;
    c.cause_id = event.event_id;
    c.counts_as_goal_work = false;
    p.steps.push_back(std::move(c));
  }
  return p;
}

// ---------------------------------------------------------------------
// The executive agent state machine: intake, context synthesis,
// priority-preemptive goal management, planning, execution,
// verification, experience recording.
// ---------------------------------------------------------------------

struct ExecutiveConfig {
  std::string id = "executive";
  int verify_consecutive = 3;       // compliant samples (assurance)
  Millis verify_timeout_ms = 120'000;
};

class Executive {
 public:
  struct Entry {
    enum class State { Pending, Active, Paused, Done, Failed };
    std::string id;
    bool is_event = false;
    InternalGoal goal;
    ReactiveStateEvent event;
    State state = State::Pending;
    int priority = kPriorityGoal;
    Millis received_t = 0;
    Millis activated_t = 0;
    bool resumed_once = false;
    // runtime
    std::optional<Plan> plan;
    std::size_t step = 0;
    int verify_count = 0;
    bool verifying = false;
    bool waiting_alarm_clear = false;
    std::uint64_t generation = 0;
  };

  Executive(ExecutiveConfig cfg, AgentServices svc, Arbiter* arbiter)
      : cfg_(std::move(cfg)), svc_(std::move(svc)), arbiter_(arbiter) {
    arbiter_->register_member([this] { on_pause_request(); },
                              [this] { on_resume(); });
  }

  const std::string& id() const { return cfg_.id; }

  /// Step i-iii: intake + context snapshot + queue update.
  void receive(const A2AMessage& msg) {
    if (std::holds_alternative<GoalStatus>(msg.body)) {
      svc_.report_status("", "Rejected", cfg_.id + " does not accept GoalStatus");
      return;
    }
    auto e = std::make_unique<Entry>();
    e->priority = msg.priority;
    e->received_t = svc_.now();
    if (const auto* g = std::get_if<InternalGoal>(&msg.body)) {
      e->id = g->goal_id;
      e->goal = *g;
    } else {
      const auto& ev = std::get<ReactiveStateEvent>(msg.body);
      e->id = ev.event_id;
      e->is_event = true;
      e->event = ev;
    }
    log_queue(*e, "received");
    Entry* raw = e.get();
    entries_.push_back(std::move(e));
    if (raw->is_event) {
      arbiter_->request_event_activation([this, raw] { activate_event(raw); });
    } else {
      try_activate();
    }
  }

  /// Verification polling for assurance goals (3 compliant samples).
  void on_sample(const TelemetrySample& s) {
    for (auto& e : entries_) {
      if (e->state != Entry::State::Active || e->is_event || !e->verifying)
        continue;
      auto it = s.flows.find(e->goal.target_flow);
      const double granted = it == s.flows.end() ? 0.0 : it->second.granted_mbps;
      if (granted >= e->plan->verify_target_mbps - 1e-9) {
        if (++e->verify_count >= cfg_.verify_consecutive) complete(e.get(), Outcome::Resolved);
      } else {
        e->verify_count = 0;
      }
    }
  }

  /// Alarm-clear observation drives healing verification.
  void on_alarm_cleared(const std::string& node, AlertCode code) {
    for (auto& e : entries_) {
      if (e->state == Entry::State::Active && e->is_event &&
          e->waiting_alarm_clear && e->event.alert.source_node == node &&
          e->event.alert.code == code)
        complete(e.get(), Outcome::Resolved);
    }
  }

  const std::vector<std::unique_ptr<Entry>>& entries() const { return entries_; }

  bool all_terminal() const {
    for (const auto& e : entries_)
      if (e->state != Entry::State::Done && e->state != Entry::State::Failed)
        return false;
    return true;
  }

 private:
  // --- queue management ---------------------------------------------

  Entry* active_entry() {
    for (auto& e : entries_)
      if (e->state == Entry::State::Active) return e.get();
    return nullptr;
  }

  void try_activate() {
    if (active_entry()) return;
    if (arbiter_->goals_suspended()) return;  // goals wait out the event
    Entry* best = nullptr;
    for (auto& e : entries_) {
      if (e->is_event) continue;
      if (e->state != Entry::State::Pending && e->state != Entry::State::Paused)
        continue;
      if (!best || e->priority > best->priority) best = e.get();
    }
    if (best) activate_goal(best);
  }

  void on_pause_request() {
    Entry* a = active_entry();
    if (!a || a->is_event) return;
    // The entry formally pauses once any in-flight step resolves; with
    // nothing in flight it pauses here and now.
    if (arbiter_->goal_calls_in_flight() == 0) pause_entry(a);
  }

  void on_resume() {
    for (auto& e : entries_)
      if (e->state == Entry::State::Paused) e->resumed_once = true;
    try_activate();
  }

  void pause_entry(Entry* e) {
    e->generation++;
    e->state = Entry::State::Paused;
    e->verifying = false;
    e->verify_count = 0;
    log_queue(*e, "paused");
  }

  // --- internal goals (steps iv-vii) --------------------------------

  void activate_goal(Entry* e) {
    e->generation++;
    e->state = Entry::State::Active;
    e->activated_t = svc_.now();
    log_queue(*e, e->resumed_once ? "resumed" : "assignment");
    Plan plan;
    try {
      const SlaRequirement& sla = svc_.priv->get_sla(e->goal.target_terminal);
      // Paused goals re-plan from current state; the world may have moved.
      plan = plan_assurance(e->goal, svc_.net(), sla, cfg_.id, ++plan_seq_);
    } catch (const std::exception& ex) {
      log_plan_failure(*e, ex.what());
      complete(e, Outcome::Failed);
      return;
    }
    e->plan = plan;
    log_plan(*e);
    if (plan.already_satisfied) {
      complete(e, Outcome::Resolved);
      return;
    }
    e->step = 0;
    run_goal_step(e);
  }

  void run_goal_step(Entry* e) {
    if (arbiter_->goals_suspended()) {
      pause_entry(e);
      return;
    }
    if (e->step >= e->plan->steps.size()) {
      begin_verification(e);
      return;
    }
    ToolCall call = e->plan->steps[e->step];
    const auto gen = e->generation;
    arbiter_->begin_goal_call();
    svc_.invoke(std::move(call), [this, e, gen](const ToolResult& r) {
      arbiter_->end_goal_call();
      if (e->generation != gen) return;  // paused or completed meanwhile
      if (!r.success) {
        log_plan_failure(*e, r.reason);
        complete(e, Outcome::Failed);
        return;
      }
      e->step++;
      run_goal_step(e);
    });
  }

  void begin_verification(Entry* e) {
    e->verifying = true;
    e->verify_count = 0;
    const auto gen = e->generation;
    svc_.schedule_at(svc_.now() + cfg_.verify_timeout_ms, [this, e, gen] {
      if (e->generation == gen && e->state == Entry::State::Active)
        complete(e, Outcome::Failed);
    });
  }

  // --- reactive events ----------------------------------------------

  void activate_event(Entry* e) {
    e->generation++;
    e->state = Entry::State::Active;
    e->activated_t = svc_.now();
    log_queue(*e, "assignment");
    run_confirm_step(e, 0);
  }

  /// Context synthesis: the diagnosis's confirmation diagnostics run
  /// before the plan exists; their outcomes are informative, not gating.
  void run_confirm_step(Entry* e, std::size_t i) {
    if (i >= e->event.diagnosis.confirm_steps.size()) {
      make_healing_plan(e);
      return;
    }
    const auto& [tool, args] = e->event.diagnosis.confirm_steps[i];
    ToolCall c;
    c.tool_name = tool;
    c.args = args;
    c.issuer = cfg_.id;
    c.cause_id = e->id;
    const auto gen = e->generation;
    svc_.invoke(std::move(c), [this, e, i, gen](const ToolResult&) {
      if (e->generation != gen) return;
      run_confirm_step(e, i + 1);
    });
  }

  void make_healing_plan(Entry* e) {
    Plan plan;
    try {
      plan = plan_healing(e->event, svc_.has_tool, cfg_.id, ++plan_seq_);
    } catch (const std::exception& ex) {
      log_plan_failure(*e, ex.what());
      complete(e, Outcome::Failed);
      return;
    }
    e->plan = plan;
    log_plan(*e);
    if (plan.escalation) {
      // Report-only: no safe remedy known, hand off.
      ojson j;
      j["record"] = "escalated";
      j["t"] = svc_.now();
      j["agent"] = cfg_.id;
      j["id"] = e->id;
      svc_.log(std::move(j));
      complete(e, Outcome::Failed);
      return;
    }
    e->step = 0;
    run_event_step(e);
  }

  void run_event_step(Entry* e) {
    if (e->step >= e->plan->steps.size()) {
      // Verification: observe the alarm clear.
      if (!svc_.net().alert_active(e->event.alert.source_node, e->event.alert.code)) {
        complete(e, Outcome::Resolved);
        return;
      }
      e->waiting_alarm_clear = true;
      const auto gen = e->generation;
      svc_.schedule_at(svc_.now() + cfg_.verify_timeout_ms, [this, e, gen] {
        if (e->generation == gen && e->state == Entry::State::Active)
          complete(e, Outcome::Failed);
      });
      return;
    }
    ToolCall call = e->plan->steps[e->step];
    const auto gen = e->generation;
    svc_.invoke(std::move(call), [this, e, gen](const ToolResult& r) {
      if (e->generation != gen) return;
      if (!r.success) {
        // Abort-on-failure: remaining steps never run.
        log_plan_failure(*e, r.reason);
        complete(e, Outcome::Failed);
        return;
      }
      e->step++;
      run_event_step(e);
    });
  }

  // --- completion (steps vi-vii) -------------------------------------

  void complete(Entry* e, Outcome outcome) {
    e->generation++;
    e->state = outcome == Outcome::Resolved ? Entry::State::Done
                                            : Entry::State::Failed;
    e->verifying = false;
    e->waiting_alarm_clear = false;
    ojson j;
    j["record"] = "verified";
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = e->id;
    j["outcome"] = to_string(outcome);
    svc_.log(std::move(j));
    ExperienceRecord rec;
    rec.t = svc_.now();
    rec.agent_id = cfg_.id;
    rec.goal_or_event_id = e->id;
    rec.plan_id = e->plan ? e->plan->plan_id : "";
    rec.outcome = outcome;
    rec.duration_ms = svc_.now() - e->received_t;
    svc_.priv->record_experience(std::move(rec));
    svc_.report_status(e->id, to_string(outcome), "");
    if (e->is_event) {
      arbiter_->event_finished();
    } else {
      try_activate();
    }
  }

  // --- logging -------------------------------------------------------

  void log_queue(const Entry& e, const char* what) {
    ojson j;
    j["record"] = what;
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = e.id;
    j["kind"] = e.is_event ? "event" : "goal";
    svc_.log(std::move(j));
  }

  void log_plan(const Entry& e) {
    ojson j;
    j["record"] = "plan";
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = e.id;
    j["plan_id"] = e.plan->plan_id;
    ojson steps = ojson::array();
    for (const auto& s : e.plan->steps) steps.push_back(s.tool_name);
    j["steps"] = steps;
    j["already_satisfied"] = e.plan->already_satisfied;
    j["escalation"] = e.plan->escalation;
    j["partial"] = e.plan->partial;
    svc_.log(std::move(j));
  }

  void log_plan_failure(const Entry& e, const std::string& why) {
    ojson j;
    j["record"] = "plan_failure";
    j["t"] = svc_.now();
    j["agent"] = cfg_.id;
    j["id"] = e.id;
    j["reason"] = why;
    svc_.log(std::move(j));
  }

  ExecutiveConfig cfg_;
  AgentServices svc_;
  Arbiter* arbiter_;
  std::vector<std::unique_ptr<Entry>> entries_;
  int plan_seq_ = 0;
};

}  // namespace hana
