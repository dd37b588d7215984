#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hana/harness/engine.hpp"

namespace hana {

// ---------------------------------------------------------------------
// Case A: proactive service assurance under a congestion ramp.
// ---------------------------------------------------------------------

struct CaseAResult {
  std::string flow_id;
  double sla_bound = 0.0;
  Millis congestion_start_ms = 0;  // first sample where demand exceeds capacity
  // mode -> (t, granted) for the protected flow
  std::map<RunMode, std::vector<std::pair<Millis, double>>> traces;
  std::map<RunMode, std::vector<std::string>> logs;
};

inline CaseAResult run_case_a(const ScenarioConfig& cfg, const Knowledge& knowledge,
                              std::optional<std::uint64_t> seed = std::nullopt) {
  CaseAResult res;
  for (const auto& f : cfg.flows)
    if (f.terminal_id == cfg.protected_terminal) res.flow_id = f.id;
  if (res.flow_id.empty())
    throw ConfigError("scenario has no flow for protected terminal '" +
                      cfg.protected_terminal + "'");
  for (const auto& sla : knowledge.slas)
    if (sla.terminal_id == cfg.protected_terminal) res.sla_bound = sla.lower_bound;

  for (RunMode mode : {RunMode::Unprotected, RunMode::RuleBased, RunMode::Hana}) {
    Engine eng(cfg, mode, knowledge, seed.value_or(cfg.seed));
    eng.run();
    res.traces[mode] = eng.trace(res.flow_id);
    res.logs[mode] = eng.log();
    if (mode == RunMode::Unprotected && res.congestion_start_ms == 0) {
      for (const auto& s : eng.samples()) {
        if (s.cell_offered_load > s.cell_capacity_mbps + 1e-9) {
          res.congestion_start_ms = s.t;
          break;
        }
      }
    }
  }
  return res;
}

inline void write_trace_csv(const CaseAResult& res, std::ostream& out) {
  out << "t_s,rate_mbps,mode\n";
  for (const auto& [mode, trace] : res.traces) {
    for (const auto& [t, rate] : trace) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f,%.6f,%s\n",
                    static_cast<double>(t) / 1000.0, rate, mode_token(mode));
      out << buf;
    }
  }
}

/// Service-assurance claims checked against the actual traces:
/// the unprotected flow collapses under congestion while the dual-driven
/// run never dips below its bound. Returns human-readable violations.
inline std::vector<std::string> check_case_a(const CaseAResult& res) {
  std::vector<std::string> bad;
  auto min_after = [&](RunMode mode, Millis from) {
    double lo = 1e18;
    for (const auto& [t, r] : res.traces.at(mode))
      if (t >= from) lo = std::min(lo, r);
    return lo;
  };
  const double unprot = min_after(RunMode::Unprotected, res.congestion_start_ms);
  if (unprot >= res.sla_bound)
    bad.push_back("unprotected flow never breached its bound under congestion");
  const double hana = min_after(RunMode::Hana, 0);
  if (hana < res.sla_bound - 1e-9)
    bad.push_back("protected flow dipped to " + std::to_string(hana) +
                  " Mbps despite proactive assurance");
  double rule_min = min_after(RunMode::RuleBased, res.congestion_start_ms);
  if (rule_min >= res.sla_bound)
    bad.push_back("rule-based script showed no outage window to react to");
  return bad;
}

// ---------------------------------------------------------------------
// Case B: MTTR study over three failure types and three operating modes.
// ---------------------------------------------------------------------

struct MttrRecord {
  AlertCode failure;
  RunMode mode;
  long dispatch_min = 0;
  long analysis_min = 0;
  long resolution_min = 0;
  long total_min = 0;
  std::optional<double> improvement_pct;  // vs the manual baseline
};

struct CaseBResult {
  std::vector<MttrRecord> records;
  std::map<std::pair<AlertCode, RunMode>, std::vector<std::string>> logs;
};

namespace runner_detail {

inline long ceil_minutes(Millis ms) { return static_cast<long>((ms + 59'999) / 60'000); }

struct StageTimes {
  std::optional<Millis> alert, assignment, plan, verified;
};

/// Pulls the incident milestones out of one run's event log: first alarm
/// raise, first work assignment, first concrete plan, first successful
/// verification.
inline StageTimes extract_stages(const std::vector<std::string>& log) {
  StageTimes st;
  for (const auto& line : log) {
    ojson j = ojson::parse(line);
    const std::string rec = j.value("record", "");
    const Millis t = j.value("t", Millis{0});
    if (rec == "alert" && !st.alert) st.alert = t;
    if (rec == "assignment" && !st.assignment) st.assignment = t;
    if (rec == "plan" && !st.plan) st.plan = t;
    if (rec == "verified" && !st.verified && j.value("outcome", "") == "Resolved")
      st.verified = t;
  }
  return st;
}

}  // namespace runner_detail

inline CaseBResult run_case_b(const ScenarioConfig& cfg, const Knowledge& knowledge,
                              std::optional<std::uint64_t> seed = std::nullopt) {
  using runner_detail::ceil_minutes;
  CaseBResult res;
  std::map<AlertCode, long> baseline_total;
  for (RunMode mode : {RunMode::NoAgent, RunMode::RuleBased, RunMode::Hana}) {
    for (const auto& [code, _] : cfg.fault_scenarios) {
      Engine eng(cfg, mode, knowledge, seed.value_or(cfg.seed), code);
      eng.run();
      res.logs[{code, mode}] = eng.log();
      const auto st = runner_detail::extract_stages(eng.log());
      if (!st.alert || !st.assignment || !st.plan || !st.verified)
        throw std::runtime_error(std::string("incident never resolved: ") +
                                 to_string(code) + " / " + mode_token(mode));
      MttrRecord r;
      r.failure = code;
      r.mode = mode;
      r.dispatch_min = ceil_minutes(*st.assignment - *st.alert);
      r.analysis_min = ceil_minutes(*st.plan - *st.assignment);
      r.resolution_min = ceil_minutes(*st.verified - *st.plan);
      r.total_min = r.dispatch_min + r.analysis_min + r.resolution_min;
      if (mode == RunMode::NoAgent) {
        baseline_total[code] = r.total_min;
      } else {
        const double base = static_cast<double>(baseline_total.at(code));
        r.improvement_pct = (base - static_cast<double>(r.total_min)) / base * 100.0;
      }
      res.records.push_back(r);
    }
  }
  return res;
}

inline void write_mttr_csv(const CaseBResult& res, std::ostream& out) {
  out << "failure,mode,dispatch_min,analysis_min,resolution_min,total_min,"
         "improvement_pct\n";
  for (const auto& r : res.records) {
    out << to_string(r.failure) << ',' << mode_token(r.mode) << ','
        << r.dispatch_min << ',' << r.analysis_min << ',' << r.resolution_min
        << ',' << r.total_min << ',';
    if (r.improvement_pct) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", *r.improvement_pct);
      out << buf;
    } else {
      out << "--";
    }
    out << '\n';
  }
}

inline std::vector<std::string> check_case_b(const CaseBResult& res) {
  std::vector<std::string> bad;
  std::map<AlertCode, std::map<RunMode, long>> totals;
  for (const auto& r : res.records) totals[r.failure][r.mode] = r.total_min;
  for (const auto& [code, by_mode] : totals) {
    const long manual = by_mode.at(RunMode::NoAgent);
    const long rule = by_mode.at(RunMode::RuleBased);
    const long agent = by_mode.at(RunMode::Hana);
    if (!(agent < rule && rule < manual))
      bad.push_back(std::string(to_string(code)) +
                    ": expected agent < rule-based < manual MTTR, got " +
                    std::to_string(agent) + "/" + std::to_string(rule) + "/" +
                    std::to_string(manual));
  }
  return bad;
}

inline std::string render_mttr_table(const CaseBResult& res) {
  std::ostringstream out;
  out << "Failure               Mode         Dispatch  Analysis  Resolution  "
         "Total  Improvement\n";
  for (const auto& r : res.records) {
    char imp[16];
    if (r.improvement_pct)
      std::snprintf(imp, sizeof imp, "%10.2f%%", *r.improvement_pct);
    else
      std::snprintf(imp, sizeof imp, "%11s", "--");
    char line[160];
    std::snprintf(line, sizeof line, "%-21s %-12s %8ld  %8ld  %10ld  %5ld  %s\n",
                  to_string(r.failure), mode_token(r.mode), r.dispatch_min,
                  r.analysis_min, r.resolution_min, r.total_min, imp);
    out << line;
  }
  return out.str();
}

// ---------------------------------------------------------------------
// Deterministic replay: re-run the scenario named in a log's header and
// demand byte-identical output.
// ---------------------------------------------------------------------

struct ReplayResult {
  bool ok = false;
  std::size_t first_divergence = 0;  // line index when !ok
  std::string expected, actual;
  std::string error;
};

inline ReplayResult replay(const std::vector<std::string>& lines,
                           const ScenarioConfig& cfg, const Knowledge& knowledge) {
  ReplayResult res;
  if (lines.empty()) {
    res.error = "empty log";
    return res;
  }
  ojson header;
  try {
    header = ojson::parse(lines.front());
  } catch (const std::exception& e) {
    res.error = std::string("unparseable header: ") + e.what();
    return res;
  }
  if (header.value("record", "") != "header" ||
      header.value("format", "") != kLogFormat) {
    res.error = "unsupported log format";
    return res;
  }
  if (header.value("scenario", "") != cfg.name) {
    res.error = "log was produced by scenario '" + header.value("scenario", "") +
                "', not '" + cfg.name + "'";
    return res;
  }
  const RunMode mode = mode_from_token(header.value("mode", ""));
  const std::string fail_token = header.value("failure", "");
  std::optional<AlertCode> failure;
  if (!fail_token.empty()) failure = alert_code_from_string(fail_token);
  const std::uint64_t seed = header.value("seed", std::uint64_t{1});

  Engine eng(cfg, mode, knowledge, seed, failure);
  eng.run();
  const auto& fresh = eng.log();
  const std::size_t n = std::min(lines.size(), fresh.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (lines[i] != fresh[i]) {
      res.first_divergence = i;
      res.expected = lines[i];
      res.actual = fresh[i];
      return res;
    }
  }
  if (lines.size() != fresh.size()) {
    res.first_divergence = n;
    res.expected = n < lines.size() ? lines[n] : "<end of log>";
    res.actual = n < fresh.size() ? fresh[n] : "<end of log>";
    return res;
  }
  res.ok = true;
  return res;
}

inline std::vector<std::string> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline void write_lines(const std::vector<std::string>& lines,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace hana
