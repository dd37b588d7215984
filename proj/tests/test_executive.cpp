#include <memory>

#include <catch2/catch_amalgamated.hpp>

#include "hana/agents/executive.hpp"
#include "hana/toolbox/toolbox.hpp"

using namespace hana;

namespace {

/// Minimal event-loop harness standing in for the engine: owns the
/// clock, network, toolbox and arbiter, and feeds alarm clears back to
/// every registered executive.
struct Harness {
  SimClock clock;
  Simnet net;
  ToolRegistry reg = register_defaults();
  Arbiter arbiter;
  PublicMemory pub;
  PrivateMemory priv;
  std::vector<ojson> log;
  std::vector<Executive*> execs;
  std::uint64_t call_seq = 0;

  Harness() {
    Cell c;
    c.id = "cell1";
    c.capacity_mbps = 10.0;
    c.flow_ids = {"vip"};
    net.cells["cell1"] = c;
    QosFlow f;
    f.id = "vip";
    f.terminal_id = "vip_term";
    f.cell_id = "cell1";
    f.demand_mbps = 2.0;
    net.flows["vip"] = f;
    NfNode n;
    n.id = "amf1";
    n.kind = NodeKind::AMF;
    n.address = "11.12.13.113";
    net.nodes["amf1"] = n;
    SlaRequirement sla;
    sla.terminal_id = "vip_term";
    sla.lower_bound = 2.0;
    priv.put_sla(sla);
  }

  AgentServices services() {
    AgentServices s;
    s.now = [this] { return clock.now(); };
    s.invoke = [this](ToolCall call, std::function<void(const ToolResult&)> cb) {
      call.call_id = ++call_seq;
      reg.invoke(call, net, clock, [this, cb = std::move(cb)](const ToolResult& r) {
        for (const auto& tr : net.evaluate_alarms(clock.now()))
          if (!tr.raised)
            for (auto* e : execs)
              e->on_alarm_cleared(tr.alert.source_node, tr.alert.code);
        cb(r);
      });
    };
    s.has_tool = [this](const std::string& name) { return reg.contains(name); };
    s.log = [this](ojson j) { log.push_back(std::move(j)); };
    s.net = [this]() -> const Simnet& { return net; };
    s.schedule_at = [this](Millis t, std::function<void()> fn) {
      clock.schedule(t, std::move(fn));
    };
    s.report_status = [this](const std::string& ref, const std::string& st,
                             const std::string&) {
      ojson j;
      j["record"] = "status";
      j["ref"] = ref;
      j["status"] = st;
      log.push_back(std::move(j));
    };
    s.priv = &priv;
    s.pub = &pub;
    return s;
  }

  /// Telemetry drumbeat, like the engine's sampling loop.
  void schedule_tick(Millis t, Millis interval, Millis horizon) {
    if (t > horizon) return;
    clock.schedule(t, [this, t, interval, horizon] {
      const TelemetrySample s = net.sample(t);
      for (auto* e : execs) e->on_sample(s);
      schedule_tick(t + interval, interval, horizon);
    });
  }

  std::vector<std::string> records(const std::string& kind) const {
    std::vector<std::string> out;
    for (const auto& j : log)
      if (j.value("record", "") == kind)
        out.push_back(j.dump());
    return out;
  }
};

A2AMessage goal_msg(const std::string& id) {
  InternalGoal g;
  g.goal_id = id;
  g.objective = "PreemptiveServiceAssurance";
  g.target_terminal = "vip_term";
  g.target_flow = "vip";
  g.target_cell = "cell1";
  g.constraints.max_reserve_mbps = 2.0;
  g.originating_meta_goal_id = "mg1";
  A2AMessage m;
  m.priority = kPriorityGoal;
  m.sender = "orchestrator";
  m.recipient = "assurance";
  m.body = g;
  return m;
}

A2AMessage event_msg(const std::string& id, double confidence = 1.0) {
  ReactiveStateEvent e;
  e.event_id = id;
  e.alert.t = 0;
  e.alert.source_node = "amf1";
  e.alert.code = AlertCode::AmfUnreachable;
  e.alert.severity = Severity::Critical;
  e.alert.details = {{"address", "11.12.13.113"}, {"node_kind", "AMF"}};
  if (confidence > 0.0) {
    e.diagnosis.matched_case_id = "fc-amf";
    e.diagnosis.confidence = confidence;
    e.diagnosis.remedy_steps = {{"restart_node", {{"node", "amf1"}}}};
  }
  A2AMessage m;
  m.priority = kPriorityEvent;
  m.sender = "orchestrator";
  m.recipient = "self_healing";
  m.body = std::move(e);
  return m;
}

}  // namespace

TEST_CASE("plan_assurance caps the reservation at the guardrail") {
  Harness hx;
  InternalGoal g = std::get<InternalGoal>(goal_msg("g1").body);
  const SlaRequirement& sla = hx.priv.get_sla("vip_term");

  Plan p = plan_assurance(g, hx.net, sla, "assurance", 1);
  REQUIRE(p.steps.size() == 2);
  CHECK(p.steps[0].tool_name == "set_qos_profile");
  CHECK(p.steps[1].tool_name == "reserve_bandwidth");
  CHECK(p.steps[1].args.at("rate_mbps") == ojson(2.0));
  CHECK_FALSE(p.partial);
  CHECK(p.steps[0].counts_as_goal_work);

  g.constraints.max_reserve_mbps = 1.5;  // guardrail below the SLA
  Plan capped = plan_assurance(g, hx.net, sla, "assurance", 2);
  CHECK(capped.partial);
  CHECK(capped.steps[1].args.at("rate_mbps") == ojson(1.5));

  g.constraints.max_reserve_mbps = 2.0;
  g.target_flow = "ghost";
  CHECK_THROWS_AS(plan_assurance(g, hx.net, sla, "assurance", 3), PlanError);
  g.target_flow = "vip";
  g.objective = "SomethingElse";
  CHECK_THROWS_AS(plan_assurance(g, hx.net, sla, "assurance", 4), PlanError);
}

TEST_CASE("plan_assurance recognizes an already-protected flow") {
  Harness hx;
  hx.net.flows.at("vip").ng_qi = NgQi::GuaranteedBitrate;
  hx.net.flows.at("vip").gbr_mbps = 2.0;
  const Plan p =
      plan_assurance(std::get<InternalGoal>(goal_msg("g1").body), hx.net,
                     hx.priv.get_sla("vip_term"), "assurance", 1);
  CHECK(p.already_satisfied);
  CHECK(p.steps.empty());
}

TEST_CASE("plan_healing escalates on zero confidence and vets tools") {
  auto has_tool = [](const std::string& t) { return t == "restart_node"; };
  const auto blind = std::get<ReactiveStateEvent>(event_msg("e1", 0.0).body);
  Plan p = plan_healing(blind, has_tool, "self_healing", 1);
  CHECK(p.escalation);
  CHECK(p.steps.empty());

  auto ev = std::get<ReactiveStateEvent>(event_msg("e2").body);
  Plan ok = plan_healing(ev, has_tool, "self_healing", 2);
  REQUIRE(ok.steps.size() == 1);
  CHECK(ok.steps[0].tool_name == "restart_node");
  CHECK_FALSE(ok.steps[0].counts_as_goal_work);

  ev.diagnosis.remedy_steps = {{"imaginary_tool", {}}};
  CHECK_THROWS_AS(plan_healing(ev, has_tool, "self_healing", 3), PlanError);
}

TEST_CASE("goal runs to verified completion on compliant telemetry") {
  Harness hx;
  Executive exec({.id = "assurance"}, hx.services(), &hx.arbiter);
  hx.execs = {&exec};
  hx.schedule_tick(0, 1000, 60'000);
  hx.clock.schedule(0, [&] { exec.receive(goal_msg("g1")); });
  hx.clock.run_until(60'000);

  REQUIRE(exec.entries().size() == 1);
  CHECK(exec.entries()[0]->state == Executive::Entry::State::Done);
  CHECK(hx.net.flows.at("vip").gbr_mbps == 2.0);
  // Steps at 2 s latency finish at t=4 s, ahead of that tick's sample;
  // the third compliant sample lands at t=6 s.
  const auto verified = hx.records("verified");
  REQUIRE(verified.size() == 1);
  CHECK(ojson::parse(verified[0]).at("t") == 6000);
  REQUIRE(hx.priv.experience().size() == 1);
  CHECK(hx.priv.experience()[0].outcome == Outcome::Resolved);
}

TEST_CASE("event preempts an active goal and the goal resumes after") {
  Harness hx;
  hx.net.nodes.at("amf1").health = NodeHealth::Unreachable;
  hx.net.evaluate_alarms(0);  // alarm active; remedy will clear it
  Executive assurance({.id = "assurance"}, hx.services(), &hx.arbiter);
  Executive healing({.id = "self_healing"}, hx.services(), &hx.arbiter);
  hx.execs = {&assurance, &healing};
  hx.schedule_tick(0, 1000, 200'000);

  // Invariant probe: no internal-goal call in flight while an event runs.
  for (Millis t = 0; t <= 130'000; t += 50)
    hx.clock.schedule(t, [&] {
      if (hx.arbiter.event_active()) CHECK(hx.arbiter.goal_calls_in_flight() == 0);
    });

  hx.clock.schedule(0, [&] { assurance.receive(goal_msg("g1")); });
  // Lands mid-flight of the goal's first tool call (latency 2 s).
  hx.clock.schedule(500, [&] { healing.receive(event_msg("e1")); });
  hx.clock.run_until(200'000);

  CHECK(assurance.all_terminal());
  CHECK(healing.all_terminal());
  CHECK(healing.entries()[0]->state == Executive::Entry::State::Done);
  CHECK(assurance.entries()[0]->state == Executive::Entry::State::Done);
  CHECK(hx.net.nodes.at("amf1").health == NodeHealth::Up);
  CHECK(hx.net.flows.at("vip").gbr_mbps == 2.0);

  // The goal paused while the event ran, then re-planned on resume.
  CHECK(hx.records("paused").size() == 1);
  CHECK(hx.records("resumed").size() == 1);
  // Ordering: goal assigned, paused; event assigned + verified; goal
  // resumed and verified last.
  std::vector<std::pair<std::string, std::string>> seq;
  for (const auto& j : hx.log) {
    const std::string rec = j.value("record", "");
    if (rec == "assignment" || rec == "paused" || rec == "resumed" ||
        rec == "verified")
      seq.emplace_back(rec, j.value("id", ""));
  }
  REQUIRE(seq.size() == 6);
  CHECK(seq[0] == std::make_pair(std::string("assignment"), std::string("g1")));
  CHECK(seq[1] == std::make_pair(std::string("assignment"), std::string("e1")));
  CHECK(seq[2] == std::make_pair(std::string("paused"), std::string("g1")));
  CHECK(seq[3] == std::make_pair(std::string("verified"), std::string("e1")));
  CHECK(seq[4] == std::make_pair(std::string("resumed"), std::string("g1")));
  CHECK(seq[5] == std::make_pair(std::string("verified"), std::string("g1")));
}

TEST_CASE("zero-confidence events escalate instead of acting") {
  Harness hx;
  Executive healing({.id = "self_healing"}, hx.services(), &hx.arbiter);
  hx.execs = {&healing};
  hx.clock.schedule(0, [&] { healing.receive(event_msg("e1", 0.0)); });
  hx.clock.run_until(10'000);
  CHECK(healing.entries()[0]->state == Executive::Entry::State::Failed);
  CHECK(hx.records("escalated").size() == 1);
  // No mutating call was ever made.
  CHECK(hx.reg.audit().empty());
}

TEST_CASE("goal statuses sent to an executive are rejected") {
  Harness hx;
  Executive exec({.id = "assurance"}, hx.services(), &hx.arbiter);
  hx.execs = {&exec};
  A2AMessage m;
  m.priority = kPriorityGoal;
  m.body = GoalStatus{"x", "Resolved", ""};
  exec.receive(m);
  const auto statuses = hx.records("status");
  REQUIRE(statuses.size() == 1);
  CHECK(ojson::parse(statuses[0]).at("status") == "Rejected");
}

TEST_CASE("one event pauses goals across many executives") {
  Harness hx;
  constexpr int kAgents = 20;
  std::vector<std::unique_ptr<Executive>> agents;
  for (int i = 0; i < kAgents; ++i) {
    ExecutiveConfig cfg;
    cfg.id = "exec" + std::to_string(i);
    agents.push_back(std::make_unique<Executive>(cfg, hx.services(), &hx.arbiter));
  }
  Executive healing({.id = "self_healing"}, hx.services(), &hx.arbiter);
  for (auto& a : agents) hx.execs.push_back(a.get());
  hx.execs.push_back(&healing);
  hx.schedule_tick(0, 1000, 400'000);

  hx.net.nodes.at("amf1").health = NodeHealth::Unreachable;
  hx.net.evaluate_alarms(0);
  for (int i = 0; i < kAgents; ++i) {
    const Millis t = 100 * i;
    Executive* agent = agents[i].get();
    hx.clock.schedule(t, [agent, i] {
      agent->receive(goal_msg("g" + std::to_string(i)));
    });
  }
  hx.clock.schedule(1'500, [&] { healing.receive(event_msg("big-one")); });

  for (Millis t = 0; t <= 300'000; t += 250)
    hx.clock.schedule(t, [&] {
      if (hx.arbiter.event_active()) CHECK(hx.arbiter.goal_calls_in_flight() == 0);
    });
  hx.clock.run_until(400'000);

  CHECK(healing.all_terminal());
  for (auto& a : agents) {
    CHECK(a->all_terminal());
    REQUIRE(a->entries().size() == 1);
    CHECK(a->entries()[0]->state == Executive::Entry::State::Done);
  }
}
