#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hana/sim/types.hpp"

namespace hana {

using ojson = nlohmann::ordered_json;

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& field, const std::string& why)
      : std::runtime_error("protocol: field '" + field + "': " + why),
        field(field) {}
  std::string field;
};

// Priorities: reactive events always outrank internal goals on the bus.
inline constexpr int kPriorityGoal = 10;
inline constexpr int kPriorityEvent = 100;

/// One atomic tool invocation (MCP-style).
struct ToolCall {
  std::uint64_t call_id = 0;
  std::string tool_name;
  std::map<std::string, ojson> args;
  std::string issuer;      // agent id
  std::string cause_id;    // goal/event id the call serves
  bool counts_as_goal_work = false;  // true for InternalGoal remedy steps

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct ToolResult {
  std::uint64_t call_id = 0;
  bool success = false;
  std::string reason;  // set when success = false
  std::map<std::string, ojson> outputs;
  Millis t_completed = 0;

  friend bool operator==(const ToolResult&, const ToolResult&) = default;
};

struct GoalConstraints {
  double max_reserve_mbps = 0.0;
  Millis deadline = 0;
  friend bool operator==(const GoalConstraints&, const GoalConstraints&) = default;
};

/// Transient tactical task emitted by the slow path.
struct InternalGoal {
  std::string goal_id;
  std::string objective;  // "PreemptiveServiceAssurance", extensible
  std::string target_terminal;
  std::string target_flow;
  std::string target_cell;
  GoalConstraints constraints;
  std::string originating_meta_goal_id;

  friend bool operator==(const InternalGoal&, const InternalGoal&) = default;
};

struct Diagnosis {
  std::optional<std::string> matched_case_id;
  std::string root_cause;
  double confidence = 0.0;  // 0 iff no matched case
  // Instantiated from the matched case's templates (empty when unmatched).
  std::vector<std::pair<std::string, std::map<std::string, ojson>>> confirm_steps;
  std::vector<std::pair<std::string, std::map<std::string, ojson>>> remedy_steps;

  friend bool operator==(const Diagnosis&, const Diagnosis&) = default;
};

/// Fast-path package: alert + context + preliminary diagnosis. Never a
/// raw alert alone.
struct ReactiveStateEvent {
  std::string event_id;
  Alert alert;
  std::map<std::string, std::map<std::string, std::int64_t>> system_context;
  Diagnosis diagnosis;

  friend bool operator==(const ReactiveStateEvent& a, const ReactiveStateEvent& b) {
    return a.event_id == b.event_id && a.alert.t == b.alert.t &&
           a.alert.source_node == b.alert.source_node &&
           a.alert.code == b.alert.code && a.alert.severity == b.alert.severity &&
           a.alert.details == b.alert.details &&
           a.system_context == b.system_context && a.diagnosis == b.diagnosis;
  }
};

struct GoalStatus {
  std::string ref_id;
  std::string status;  // "Resolved" | "Failed" | "Preempted" | "Rejected"
  std::string detail;

  friend bool operator==(const GoalStatus&, const GoalStatus&) = default;
};

using MessageBody = std::variant<InternalGoal, ReactiveStateEvent, GoalStatus>;

struct A2AMessage {
  std::uint64_t msg_id = 0;
  Millis t_sent = 0;
  std::string sender;
  std::string recipient;
  int priority = kPriorityGoal;
  MessageBody body;

  friend bool operator==(const A2AMessage&, const A2AMessage&) = default;
};

// ---------------------------------------------------------------------
// Canonical line-oriented encoding. Field order is fixed so identical
// messages always serialize to identical bytes; event logs double as
// replayable transcripts.
// ---------------------------------------------------------------------

namespace wire {

inline const ojson& req(const ojson& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw ProtocolError(field, "missing");
  return *it;
}

inline ojson steps_to_json(
    const std::vector<std::pair<std::string, std::map<std::string, ojson>>>& ss) {
  ojson arr = ojson::array();
  for (const auto& [tool, args] : ss) {
    ojson sj;
    sj["tool"] = tool;
    sj["args"] = args;
    arr.push_back(sj);
  }
  return arr;
}

inline std::vector<std::pair<std::string, std::map<std::string, ojson>>>
steps_from_json(const ojson& arr, const char* field) {
  if (!arr.is_array()) throw ProtocolError(field, "expected array");
  std::vector<std::pair<std::string, std::map<std::string, ojson>>> ss;
  for (const auto& sj : arr) {
    std::map<std::string, ojson> args;
    for (auto it = req(sj, "args").begin(); it != req(sj, "args").end(); ++it)
      args[it.key()] = it.value();
    ss.emplace_back(req(sj, "tool").get<std::string>(), std::move(args));
  }
  return ss;
}

inline ojson alert_to_json(const Alert& a) {
  ojson j;
  j["t"] = a.t;
  j["source_node"] = a.source_node;
  j["code"] = to_string(a.code);
  j["severity"] = to_string(a.severity);
  j["details"] = a.details;
  return j;
}

inline Alert alert_from_json(const ojson& j) {
  Alert a;
  a.t = req(j, "t").get<Millis>();
  a.source_node = req(j, "source_node").get<std::string>();
  a.code = alert_code_from_string(req(j, "code").get<std::string>());
  a.severity = severity_from_string(req(j, "severity").get<std::string>());
  for (auto it = req(j, "details").begin(); it != req(j, "details").end(); ++it)
    a.details[it.key()] = it.value().get<std::string>();
  return a;
}

inline ojson diagnosis_to_json(const Diagnosis& d) {
  ojson j;
  j["matched_case_id"] = d.matched_case_id ? ojson(*d.matched_case_id) : ojson();
  j["root_cause"] = d.root_cause;
  j["confidence"] = d.confidence;
  j["confirm_steps"] = steps_to_json(d.confirm_steps);
  j["remedy_steps"] = steps_to_json(d.remedy_steps);
  return j;
}

inline Diagnosis diagnosis_from_json(const ojson& j) {
  Diagnosis d;
  const ojson& m = req(j, "matched_case_id");
  if (!m.is_null()) d.matched_case_id = m.get<std::string>();
  d.root_cause = req(j, "root_cause").get<std::string>();
  d.confidence = req(j, "confidence").get<double>();
  if (d.confidence < 0.0 || d.confidence > 1.0)
    throw ProtocolError("confidence", "outside [0,1]");
  if ((d.confidence == 0.0) != !d.matched_case_id)
    throw ProtocolError("confidence", "must be 0 iff matched_case_id absent");
  d.confirm_steps = steps_from_json(req(j, "confirm_steps"), "confirm_steps");
  d.remedy_steps = steps_from_json(req(j, "remedy_steps"), "remedy_steps");
  return d;
}

inline ojson body_to_json(const MessageBody& body) {
  ojson j;
  if (const auto* g = std::get_if<InternalGoal>(&body)) {
    j["type"] = "InternalGoal";
    j["goal_id"] = g->goal_id;
    j["objective"] = g->objective;
    j["target_terminal"] = g->target_terminal;
    j["target_flow"] = g->target_flow;
    j["target_cell"] = g->target_cell;
    j["max_reserve_mbps"] = g->constraints.max_reserve_mbps;
    j["deadline"] = g->constraints.deadline;
    j["originating_meta_goal_id"] = g->originating_meta_goal_id;
  } else if (const auto* e = std::get_if<ReactiveStateEvent>(&body)) {
    j["type"] = "ReactiveStateEvent";
    j["event_id"] = e->event_id;
    j["alert"] = alert_to_json(e->alert);
    j["system_context"] = e->system_context;
    j["diagnosis"] = diagnosis_to_json(e->diagnosis);
  } else {
    const auto& s = std::get<GoalStatus>(body);
    j["type"] = "GoalStatus";
    j["ref_id"] = s.ref_id;
    j["status"] = s.status;
    j["detail"] = s.detail;
  }
  return j;
}

inline MessageBody body_from_json(const ojson& j) {
  const std::string type = req(j, "type").get<std::string>();
  if (type == "InternalGoal") {
    InternalGoal g;
    g.goal_id = req(j, "goal_id").get<std::string>();
    g.objective = req(j, "objective").get<std::string>();
    g.target_terminal = req(j, "target_terminal").get<std::string>();
    g.target_flow = req(j, "target_flow").get<std::string>();
    g.target_cell = req(j, "target_cell").get<std::string>();
    g.constraints.max_reserve_mbps = req(j, "max_reserve_mbps").get<double>();
    g.constraints.deadline = req(j, "deadline").get<Millis>();
    g.originating_meta_goal_id =
        req(j, "originating_meta_goal_id").get<std::string>();
    return g;
  }
  if (type == "ReactiveStateEvent") {
    ReactiveStateEvent e;
    e.event_id = req(j, "event_id").get<std::string>();
    e.alert = alert_from_json(req(j, "alert"));
    for (auto it = req(j, "system_context").begin();
         it != req(j, "system_context").end(); ++it)
      for (auto u = it.value().begin(); u != it.value().end(); ++u)
        e.system_context[it.key()][u.key()] = u.value().get<std::int64_t>();
    e.diagnosis = diagnosis_from_json(req(j, "diagnosis"));
    return e;
  }
  if (type == "GoalStatus") {
    GoalStatus s;
    s.ref_id = req(j, "ref_id").get<std::string>();
    s.status = req(j, "status").get<std::string>();
    s.detail = req(j, "detail").get<std::string>();
    return s;
  }
  throw ProtocolError("type", "unknown body type '" + type + "'");
}

}  // namespace wire

inline std::string encode(const A2AMessage& m) {
  ojson j;
  j["record"] = "a2a";
  j["msg_id"] = m.msg_id;
  j["t_sent"] = m.t_sent;
  j["sender"] = m.sender;
  j["recipient"] = m.recipient;
  j["priority"] = m.priority;
  j["body"] = wire::body_to_json(m.body);
  return j.dump();
}

inline std::string encode(const ToolCall& c) {
  ojson j;
  j["record"] = "tool_call";
  j["call_id"] = c.call_id;
  j["tool_name"] = c.tool_name;
  j["args"] = c.args;
  j["issuer"] = c.issuer;
  j["cause_id"] = c.cause_id;
  j["goal_work"] = c.counts_as_goal_work;
  return j.dump();
}

inline std::string encode(const ToolResult& r) {
  ojson j;
  j["record"] = "tool_result";
  j["call_id"] = r.call_id;
  j["success"] = r.success;
  j["reason"] = r.reason;
  j["outputs"] = r.outputs;
  j["t_completed"] = r.t_completed;
  return j.dump();
}

using WireMessage = std::variant<A2AMessage, ToolCall, ToolResult>;

inline WireMessage decode(const std::string& bytes) {
  ojson j;
  try {
    j = ojson::parse(bytes);
  } catch (const ojson::parse_error& e) {
    throw ProtocolError("(document)", e.what());
  }
  const std::string record = wire::req(j, "record").get<std::string>();
  if (record == "a2a") {
    A2AMessage m;
    m.msg_id = wire::req(j, "msg_id").get<std::uint64_t>();
    m.t_sent = wire::req(j, "t_sent").get<Millis>();
    m.sender = wire::req(j, "sender").get<std::string>();
    m.recipient = wire::req(j, "recipient").get<std::string>();
    m.priority = wire::req(j, "priority").get<int>();
    m.body = wire::body_from_json(wire::req(j, "body"));
    if (std::holds_alternative<ReactiveStateEvent>(m.body) &&
        m.priority <= kPriorityGoal)
      throw ProtocolError("priority",
                          "ReactiveStateEvent must outrank InternalGoal");
    return m;
  }
  if (record == "tool_call") {
    ToolCall c;
    c.call_id = wire::req(j, "call_id").get<std::uint64_t>();
    c.tool_name = wire::req(j, "tool_name").get<std::string>();
    for (auto it = wire::req(j, "args").begin(); it != wire::req(j, "args").end();
         ++it)
      c.args[it.key()] = it.value();
    c.issuer = wire::req(j, "issuer").get<std::string>();
    c.cause_id = wire::req(j, "cause_id").get<std::string>();
    c.counts_as_goal_work = wire::req(j, "goal_work").get<bool>();
    return c;
  }
  if (record == "tool_result") {
    ToolResult r;
    r.call_id = wire::req(j, "call_id").get<std::uint64_t>();
    r.success = wire::req(j, "success").get<bool>();
    r.reason = wire::req(j, "reason").get<std::string>();
    for (auto it = wire::req(j, "outputs").begin();
         it != wire::req(j, "outputs").end(); ++it)
      r.outputs[it.key()] = it.value();
    r.t_completed = wire::req(j, "t_completed").get<Millis>();
    return r;
  }
  throw ProtocolError("record", "unknown record kind '" + record + "'");
}

}  // namespace hana
