#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hana/sim/clock.hpp"

namespace hana {

enum class NgQi { BestEffort, Priority, GuaranteedBitrate };

enum class NodeKind { AMF, SMF };
enum class NodeHealth { Up, Unreachable, Degraded };

enum class AlertCode { HttpConnExhaustion, AmfUnreachable, SessionCapacityL1 };
enum class Severity { Critical, Major };

inline const char* to_string(NgQi q) {
  switch (q) {
    case NgQi::BestEffort: return "BestEffort";
    case NgQi::Priority: return "Priority";
    case NgQi::GuaranteedBitrate: return "GuaranteedBitrate";
  }
  return "?";
}

inline NgQi ngqi_from_string(const std::string& s) {
  if (s == "BestEffort") return NgQi::BestEffort;
  if (s == "Priority") return NgQi::Priority;
  if (s == "GuaranteedBitrate") return NgQi::GuaranteedBitrate;
  throw std::invalid_argument("unknown ng_qi: " + s);
}

inline const char* to_string(NodeKind k) {
  return k == NodeKind::AMF ? "AMF" : "SMF";
}

inline NodeKind node_kind_from_string(const std::string& s) {
  if (s == "AMF") return NodeKind::AMF;
  if (s == "SMF") return NodeKind::SMF;
  throw std::invalid_argument("unknown node kind: " + s);
}

inline const char* to_string(NodeHealth h) {
  switch (h) {
    case NodeHealth::Up: return "Up";
    case NodeHealth::Unreachable: return "Unreachable";
    case NodeHealth::Degraded: return "Degraded";
  }
  return "?";
}

inline NodeHealth node_health_from_string(const std::string& s) {
  if (s == "Up") return NodeHealth::Up;
  if (s == "Unreachable") return NodeHealth::Unreachable;
  if (s == "Degraded") return NodeHealth::Degraded;
  throw std::invalid_argument("unknown node health: " + s);
}

inline const char* to_string(AlertCode c) {
  switch (c) {
    case AlertCode::HttpConnExhaustion: return "HttpConnExhaustion";
    case AlertCode::AmfUnreachable: return "AmfUnreachable";
    case AlertCode::SessionCapacityL1: return "SessionCapacityL1";
  }
  return "?";
}

inline AlertCode alert_code_from_string(const std::string& s) {
  if (s == "HttpConnExhaustion") return AlertCode::HttpConnExhaustion;
  if (s == "AmfUnreachable") return AlertCode::AmfUnreachable;
  if (s == "SessionCapacityL1") return AlertCode::SessionCapacityL1;
  throw std::invalid_argument("unknown alert code: " + s);
}

inline const char* to_string(Severity s) {
  return s == Severity::Critical ? "Critical" : "Major";
}

inline Severity severity_from_string(const std::string& s) {
  if (s == "Critical") return Severity::Critical;
  if (s == "Major") return Severity::Major;
  throw std::invalid_argument("unknown severity: " + s);
}

struct QosFlow {
  std::string id;
  std::string terminal_id;
  std::string cell_id;
  NgQi ng_qi = NgQi::BestEffort;
  double gbr_mbps = 0.0;      // reserved rate, 0 unless GuaranteedBitrate
  double demand_mbps = 0.0;   // offered rate
  double granted_mbps = 0.0;  // allocated rate, set by allocate_capacity
};

struct Cell {
  std::string id;
  double capacity_mbps = 0.0;
  std::vector<std::string> flow_ids;  // kept sorted by id
};

struct NfNode {
  std::string id;
  NodeKind kind = NodeKind::SMF;
  std::string address;  // dotted-quad, e.g. "11.12.13.114"
  std::map<std::string, std::int64_t> params;  // max_http_connections, session_capacity, ...
  std::map<std::string, std::int64_t> usage;   // http_connections_in_use, active_sessions, ...
  NodeHealth health = NodeHealth::Up;
};

struct FlowSample {
  double granted_mbps = 0.0;
  double demand_mbps = 0.0;
  double gbr_mbps = 0.0;
  NgQi ng_qi = NgQi::BestEffort;
};

struct TelemetrySample {
  Millis t = 0;
  std::string cell_id;
  double cell_capacity_mbps = 0.0;
  double cell_offered_load = 0.0;  // sum of flow demands
  std::map<std::string, FlowSample> flows;
  std::map<std::string, std::map<std::string, std::int64_t>> node_usages;
  std::vector<std::pair<std::string, AlertCode>> active_alerts;
};

struct Alert {
  Millis t = 0;
  std::string source_node;
  AlertCode code = AlertCode::HttpConnExhaustion;
  Severity severity = Severity::Critical;
  std::map<std::string, std::string> details;  // includes "address"
};

struct FaultInjection {
  Millis t_inject = 0;
  std::string target_node;
  AlertCode code = AlertCode::HttpConnExhaustion;
  std::map<std::string, std::int64_t> param_overrides;
  std::map<std::string, std::int64_t> usage_overrides;
  bool set_unreachable = false;
};

}  // namespace hana
