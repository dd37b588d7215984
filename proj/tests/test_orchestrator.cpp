#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "hana/agents/orchestrator.hpp"
#include "oracle.hpp"

using namespace hana;

TEST_CASE("fit_line recovers an exact linear trend") {
  // y = 0.2 x + 1.0 exactly.
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ys{1.0, 1.2, 1.4, 1.6};
  const LineFit f = fit_line(xs, ys);
  CHECK_THAT(f.slope, Catch::Matchers::WithinAbs(0.2, 1e-12));
  CHECK_THAT(f.intercept, Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(f.r2, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("fit_line rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_line(std::vector<double>{1.0}, std::vector<double>{2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_line(std::vector<double>{2.0, 2.0, 2.0},
                           std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("fit_line matches the normal-equation oracle on random windows") {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<int> len(3, 12);
  std::uniform_real_distribution<double> noise(-0.5, 0.5);
  std::uniform_real_distribution<double> slope(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const int n = len(rng);
    const double a = slope(rng), b = noise(rng) * 10;
    std::vector<double> xs, ys;
    for (int k = 0; k < n; ++k) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(a * k + b + noise(rng));
    }
    const LineFit got = fit_line(xs, ys);
    const oracle::Fit want = oracle::least_squares(xs, ys);
    INFO("case " << i);
    CHECK_THAT(got.slope,
               Catch::Matchers::WithinAbs(static_cast<double>(want.slope), 1e-9));
    CHECK_THAT(got.intercept, Catch::Matchers::WithinAbs(
                                  static_cast<double>(want.intercept), 1e-9));
    CHECK_THAT(got.r2,
               Catch::Matchers::WithinAbs(static_cast<double>(want.r2), 1e-9));
  }
}

namespace {

TelemetrySample make_sample(Millis t, double offered, double vip_demand = 2.0,
                            double vip_granted = 2.0, NgQi qi = NgQi::BestEffort,
                            double gbr = 0.0) {
  TelemetrySample s;
  s.t = t;
  s.cell_id = "cell1";
  s.cell_capacity_mbps = 10.0;
  s.cell_offered_load = offered;
  FlowSample f;
  f.demand_mbps = vip_demand;
  f.granted_mbps = vip_granted;
  f.ng_qi = qi;
  f.gbr_mbps = gbr;
  s.flows["vip"] = f;
  return s;
}

}  // namespace

TEST_CASE("intent margin distinguishes protected and unprotected flows") {
  // Unprotected: headroom the cell could still give the flow.
  auto m1 = intent_margin(make_sample(0, 7.0), "vip", 2.0);
  REQUIRE(m1.has_value());
  CHECK_THAT(*m1, Catch::Matchers::WithinAbs(10.0 - (7.0 - 2.0) - 2.0, 1e-12));

  // Protected at/above the bound: granted headroom.
  auto m2 = intent_margin(
      make_sample(0, 41.0, 2.0, 2.0, NgQi::GuaranteedBitrate, 2.0), "vip", 2.0);
  REQUIRE(m2.has_value());
  CHECK_THAT(*m2, Catch::Matchers::WithinAbs(0.0, 1e-12));

  // GBR below the bound does not count as protected.
  auto m3 = intent_margin(
      make_sample(0, 7.0, 2.0, 2.0, NgQi::GuaranteedBitrate, 1.0), "vip", 2.0);
  REQUIRE(m3.has_value());
  CHECK_THAT(*m3, Catch::Matchers::WithinAbs(3.0, 1e-12));

  CHECK_FALSE(intent_margin(make_sample(0, 7.0), "ghost", 2.0).has_value());
}

TEST_CASE("self-awareness flags only worsening margins") {
  std::vector<std::pair<Millis, double>> shrinking{{0, 3.0}, {1000, 2.5}, {2000, 2.0}};
  auto d = self_awareness_check("mg1", shrinking);
  REQUIRE(d.has_value());
  CHECK_THAT(d->margin_slope_per_s, Catch::Matchers::WithinAbs(-0.5, 1e-12));
  CHECK_THAT(d->current_margin, Catch::Matchers::WithinAbs(2.0, 1e-12));

  std::vector<std::pair<Millis, double>> growing{{0, 1.0}, {1000, 2.0}};
  CHECK_FALSE(self_awareness_check("mg1", growing).has_value());
  std::vector<std::pair<Millis, double>> flat{{0, 2.0}, {1000, 2.0}};
  CHECK_FALSE(self_awareness_check("mg1", flat).has_value());
  std::vector<std::pair<Millis, double>> single{{0, 2.0}};
  CHECK_FALSE(self_awareness_check("mg1", single).has_value());
}

TEST_CASE("predict extrapolates the fitted zero crossing") {
  // Margins 0.5, 0.3, 0.1 at t = 0, 10, 20 s: slope -0.02/s, zero at 25 s.
  std::vector<std::pair<Millis, double>> w{{0, 0.5}, {10'000, 0.3}, {20'000, 0.1}};
  const Prediction p = predict(w, 120'000);
  REQUIRE(p.t_violation.has_value());
  CHECK(*p.t_violation == 25'000);
  CHECK_THAT(p.confidence, Catch::Matchers::WithinAbs(1.0, 1e-12));

  // Beyond the horizon: no violation reported.
  const Prediction far = predict(w, 3'000);
  CHECK_FALSE(far.t_violation.has_value());

  std::vector<std::pair<Millis, double>> two{{0, 0.5}, {10'000, 0.3}};
  CHECK_THROWS_AS(predict(two, 120'000), std::invalid_argument);
}

TEST_CASE("choice making applies confidence and lead-time thresholds") {
  Deviation dev;
  dev.meta_goal_id = "mg1";
  dev.margin_slope_per_s = -0.02;
  SlaRequirement sla;
  sla.terminal_id = "vip_term";
  sla.lower_bound = 2.0;
  ChoiceConfig cfg;  // 0.8 / 30 s

  Prediction p;
  p.t_made = 10'000;
  p.t_violation = 30'000;
  p.confidence = 0.95;
  auto goal = choice_making(dev, p, sla, "vip", "cell1", cfg, 1);
  REQUIRE(goal.has_value());
  CHECK(goal->objective == "PreemptiveServiceAssurance");
  CHECK(goal->target_flow == "vip");
  CHECK(goal->constraints.max_reserve_mbps == 2.0);
  CHECK(goal->constraints.deadline == 30'000);

  p.confidence = 0.79;  // just under the threshold
  CHECK_FALSE(choice_making(dev, p, sla, "vip", "cell1", cfg, 2).has_value());

  p.confidence = 0.95;
  p.t_violation = 41'000;  // 31 s lead, one past the limit
  CHECK_FALSE(choice_making(dev, p, sla, "vip", "cell1", cfg, 3).has_value());
  p.t_violation = 40'000;  // exactly at the limit: act
  CHECK(choice_making(dev, p, sla, "vip", "cell1", cfg, 4).has_value());

  p.t_violation.reset();
  CHECK_FALSE(choice_making(dev, p, sla, "vip", "cell1", cfg, 5).has_value());
}

TEST_CASE("alert features expand code-specific keywords") {
  Alert a;
  a.code = AlertCode::AmfUnreachable;
  a.details["node_kind"] = "AMF";
  const auto f = alert_features(a);
  CHECK(f.count("AmfUnreachable"));
  CHECK(f.count("AMF"));
  CHECK(f.count("unreachable"));
  CHECK(f.count("connectivity"));
}

namespace {

PublicMemory small_library() {
  PublicMemory mem;
  FaultCase http;
  http.id = "fc-http";
  http.symptom_features = {"HttpConnExhaustion", "SMF", "http", "connection",
                           "exhaustion"};
  http.root_cause = "pool saturated at $current_max_http_connections; raise to "
                    "$max_http_connections";
  http.confirm_steps = {{"query_metrics", {{"node", "$node"}}}};
  http.remedy_template = {
      {"update_node_config",
       {{"node", "$node"}, {"param", "max_http_connections"},
        {"value", "$max_http_connections"}}},
      {"graceful_reload", {{"node", "$node"}}}};
  http.recommended_params = {{"max_http_connections", 1000}};
  mem.fault_cases.push_back(http);

  FaultCase distractor;
  distractor.id = "fc-dns";
  distractor.symptom_features = {"dns", "connectivity"};
  distractor.root_cause = "stale resolver";
  distractor.remedy_template = {{"restart_node", {{"node", "$node"}}}};
  mem.fault_cases.push_back(distractor);
  return mem;
}

Alert http_alert() {
  Alert a;
  a.t = 60'000;
  a.source_node = "smf1";
  a.code = AlertCode::HttpConnExhaustion;
  a.severity = Severity::Critical;
  a.details = {{"address", "11.12.13.114"}, {"node_kind", "SMF"}};
  return a;
}

}  // namespace

TEST_CASE("diagnosis instantiates the best-matching case template") {
  const PublicMemory mem = small_library();
  const std::map<std::string, std::int64_t> live{{"max_http_connections", 100}};
  const Diagnosis d = diagnose(http_alert(), mem, live);
  REQUIRE(d.matched_case_id.has_value());
  CHECK(*d.matched_case_id == "fc-http");
  CHECK_THAT(d.confidence, Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(d.root_cause == "pool saturated at 100; raise to 1000");
  REQUIRE(d.confirm_steps.size() == 1);
  CHECK(d.confirm_steps[0].second.at("node") == ojson("smf1"));
  REQUIRE(d.remedy_steps.size() == 2);
  CHECK(d.remedy_steps[0].second.at("value") == ojson(std::int64_t{1000}));
  CHECK(d.remedy_steps[1].first == "graceful_reload");
}

TEST_CASE("an unmatched alert yields a zero-confidence diagnosis") {
  PublicMemory empty_lib;
  FaultCase unrelated;
  unrelated.id = "fc-x";
  unrelated.symptom_features = {"nothing", "here"};
  unrelated.remedy_template = {{"restart_node", {{"node", "$node"}}}};
  empty_lib.fault_cases.push_back(unrelated);
  const Diagnosis d = diagnose(http_alert(), empty_lib, {});
  CHECK_FALSE(d.matched_case_id.has_value());
  CHECK(d.confidence == 0.0);
  CHECK(d.remedy_steps.empty());
}

namespace {

Orchestrator make_orch(PublicMemory& pub, PrivateMemory& priv,
                       Millis hysteresis = 10'000, std::size_t window = 3) {
  SlaRequirement sla;
  sla.terminal_id = "vip_term";
  sla.lower_bound = 2.0;
  priv.put_sla(sla);
  priv.meta_goals = {{"mg1", "vip_term"}};
  OrchestratorConfig cfg;
  cfg.window = window;
  cfg.hysteresis_ms = hysteresis;
  cfg.terminal_flows = {{"vip_term", {"vip", "cell1"}}};
  return Orchestrator(cfg, &pub, &priv);
}

}  // namespace

TEST_CASE("slow path emits one goal and then holds through hysteresis") {
  PublicMemory pub;
  PrivateMemory priv;
  Orchestrator orch = make_orch(pub, priv);

  // Sawtooth margin 3,2,1 via offered load 7,8,9: every full window is a
  // confident decline crossing within the lead time.
  std::vector<Millis> goal_times;
  for (Millis t = 0; t <= 20'000; t += 1000) {
    const double offered = 7.0 + static_cast<double>((t / 1000) % 3);
    for (const auto& msg : orch.on_sample(make_sample(t, offered)))
      if (std::holds_alternative<InternalGoal>(msg.body)) goal_times.push_back(t);
  }
  REQUIRE_FALSE(goal_times.empty());
  // Successive goals are separated by at least the hysteresis window.
  for (std::size_t i = 1; i < goal_times.size(); ++i)
    CHECK(goal_times[i] - goal_times[i - 1] >= 10'000);
}

TEST_CASE("fast path wraps alert, context, and diagnosis at event priority") {
  PublicMemory pub = small_library();
  PrivateMemory priv;
  Orchestrator orch = make_orch(pub, priv);

  Simnet net;
  NfNode n;
  n.id = "smf1";
  n.kind = NodeKind::SMF;
  n.address = "11.12.13.114";
  n.params = {{"max_http_connections", 100}};
  n.usage = {{"http_connections_in_use", 100}};
  net.nodes["smf1"] = n;

  const A2AMessage msg = orch.on_alert(http_alert(), net, 120'000);
  CHECK(msg.priority == kPriorityEvent);
  CHECK(msg.priority > kPriorityGoal);
  CHECK(msg.recipient == "self_healing");
  CHECK(msg.t_sent == 120'000);
  const auto& e = std::get<ReactiveStateEvent>(msg.body);
  CHECK(e.alert.source_node == "smf1");
  CHECK(e.system_context.at("smf1").at("http_connections_in_use") == 100);
  REQUIRE(e.diagnosis.matched_case_id.has_value());
  CHECK(*e.diagnosis.matched_case_id == "fc-http");
}
