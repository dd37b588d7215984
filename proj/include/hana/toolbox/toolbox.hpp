#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hana/protocol/messages.hpp"
#include "hana/sim/network.hpp"

namespace hana {

enum class ArgType { Str, Int, Num };

/// Raised for unregistered tools or schema mismatches; distinct from a
/// safety-check failure, which yields ToolResult{success=false}.
struct InvocationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ToolDescriptor {
  std::string name;
  std::map<std::string, ArgType> arg_schema;
  Millis latency_ms = 0;
  // Safety precondition, evaluated against simnet state when the effect
  // lands. Returns a reason to veto the call.
  std::function<std::optional<std::string>(const Simnet&, const ToolCall&)> safety;
  // State mutation + readouts. Only runs when safety passed.
  std::function<std::map<std::string, ojson>(Simnet&, const ToolCall&)> effect;
  // Optional override of latency per call (ping timeouts on dead nodes).
  std::function<Millis(const Simnet&, const ToolCall&)> latency_for;

  Millis resolve_latency(const Simnet& net, const ToolCall& call) const {
    return latency_for ? latency_for(net, call) : latency_ms;
  }
};

struct AuditEntry {
  ToolCall call;
  Millis t_call = 0;
  Millis t_effect = 0;
  ToolResult result;
};

class ToolRegistry {
 public:
  void add(ToolDescriptor d) {
    if (d.latency_ms < 0) throw std::invalid_argument("negative tool latency");
    if (tools_.count(d.name))
      throw std::invalid_argument("duplicate tool registration: " + d.name);
    tools_.emplace(d.name, std::move(d));
  }

  bool contains(const std::string& name) const { return tools_.count(name) > 0; }

  const ToolDescriptor& get(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw InvocationError("unregistered tool: " + name);
    return it->second;
  }

  std::vector<const ToolDescriptor*> list() const {
    std::vector<const ToolDescriptor*> out;
    for (const auto& [_, d] : tools_) out.push_back(&d);
    return out;
  }

  /// Validates the call and schedules its effect at now + latency.
  /// Safety is evaluated when the effect lands; a veto leaves simnet
  /// untouched and the result carries the reason. on_result fires at the
  /// effect timestamp either way.
  void invoke(const ToolCall& call, Simnet& net, SimClock& clock,
              std::function<void(const ToolResult&)> on_result) {
    const ToolDescriptor& d = get(call.tool_name);
    validate_args(d, call);
    const Millis t_call = clock.now();
    const Millis latency = d.resolve_latency(net, call);
    clock.schedule(t_call + latency, [this, &d, call, &net, t_call, latency,
                                      cb = std::move(on_result)]() {
      ToolResult r;
      r.call_id = call.call_id;
      r.t_completed = t_call + latency;
      auto veto = d.safety ? d.safety(net, call) : std::nullopt;
      if (veto) {
        r.success = false;
        r.reason = *veto;
      } else {
        r.success = true;
        r.outputs = d.effect ? d.effect(net, call) : std::map<std::string, ojson>{};
      }
      audit_.push_back(AuditEntry{call, t_call, t_call + latency, r});
      cb(r);
    });
  }

  const std::vector<AuditEntry>& audit() const { return audit_; }

 private:
  static void validate_args(const ToolDescriptor& d, const ToolCall& call) {
    for (const auto& [name, type] : d.arg_schema) {
      auto it = call.args.find(name);
      if (it == call.args.end())
        throw InvocationError(d.name + ": missing arg '" + name + "'");
      const ojson& v = it->second;
      const bool ok = (type == ArgType::Str && v.is_string()) ||
                      (type == ArgType::Int && v.is_number_integer()) ||
                      (type == ArgType::Num && v.is_number());
      if (!ok)
        throw InvocationError(d.name + ": arg '" + name + "' has wrong type");
    }
    for (const auto& [name, _] : call.args)
      if (!d.arg_schema.count(name))
        throw InvocationError(d.name + ": unexpected arg '" + name + "'");
  }

  std::map<std::string, ToolDescriptor> tools_;
  std::vector<AuditEntry> audit_;
};

// ---------------------------------------------------------------------
// Default tool set covering service assurance and self-healing remedies
// plus the diagnostic checks. Latencies are simulated-time defaults and
// may be overridden per scenario.
// ---------------------------------------------------------------------

struct ToolLatencies {
  Millis diagnostic = 5'000;
  Millis ping_timeout = 60'000;  // a ping against an unreachable node
  Millis qos_write = 2'000;
  Millis config_write = 30'000;
  Millis reload = 30'000;
  Millis restart = 60'000;
  Millis scale = 600'000;
};

namespace tooldefs {

inline std::string arg_str(const ToolCall& c, const std::string& k) {
  return c.args.at(k).get<std::string>();
}
inline std::int64_t arg_int(const ToolCall& c, const std::string& k) {
  return c.args.at(k).get<std::int64_t>();
}
inline double arg_num(const ToolCall& c, const std::string& k) {
  return c.args.at(k).get<double>();
}

inline std::optional<std::string> need_node(const Simnet& net, const ToolCall& c) {
  if (!net.find_node(arg_str(c, "node"))) return "unknown node: " + arg_str(c, "node");
  return std::nullopt;
}

}  // namespace tooldefs

inline ToolRegistry register_defaults(const ToolLatencies& lat = {}) {
  using namespace tooldefs;
  ToolRegistry reg;

  reg.add({.name = "set_qos_profile",
           .arg_schema = {{"flow", ArgType::Str}, {"ng_qi", ArgType::Str}},
           .latency_ms = lat.qos_write,
           .safety = [](const Simnet& net, const ToolCall& c) -> std::optional<std::string> {
             if (!net.find_flow(arg_str(c, "flow")))
               return "unknown flow: " + arg_str(c, "flow");
             return std::nullopt;
           },
           .effect = [](Simnet& net, const ToolCall& c) {
             net.set_qos_profile(arg_str(c, "flow"), ngqi_from_string(arg_str(c, "ng_qi")));
             return std::map<std::string, ojson>{{"ng_qi", arg_str(c, "ng_qi")}};
           }});

  reg.add({.name = "reserve_bandwidth",
           .arg_schema = {{"cell", ArgType::Str},
                          {"flow", ArgType::Str},
                          {"rate_mbps", ArgType::Num}},
           .latency_ms = lat.qos_write,
           .safety = [](const Simnet& net, const ToolCall& c) -> std::optional<std::string> {
             const Cell* cell = net.find_cell(arg_str(c, "cell"));
             if (!cell) return "unknown cell: " + arg_str(c, "cell");
             const QosFlow* f = net.find_flow(arg_str(c, "flow"));
             if (!f) return "unknown flow: " + arg_str(c, "flow");
             const double rate = arg_num(c, "rate_mbps");
             const double other =
                 net.reserved_gbr(*cell) -
                 (f->ng_qi == NgQi::GuaranteedBitrate ? f->gbr_mbps : 0.0);
             if (other + rate > cell->capacity_mbps + 1e-12)
               return "reservation exceeds residual capacity";
             return std::nullopt;
           },
           .effect = [](Simnet& net, const ToolCall& c) {
             net.reserve_bandwidth(arg_str(c, "cell"), arg_str(c, "flow"),
                                   arg_num(c, "rate_mbps"));
             return std::map<std::string, ojson>{{"gbr_mbps", arg_num(c, "rate_mbps")}};
           }});

  reg.add({.name = "release_reservation",
           .arg_schema = {{"flow", ArgType::Str}},
           .latency_ms = lat.qos_write,
           .safety = [](const Simnet& net, const ToolCall& c) -> std::optional<std::string> {
             if (!net.find_flow(arg_str(c, "flow")))
               return "unknown flow: " + arg_str(c, "flow");
             return std::nullopt;
           },
           .effect = [](Simnet& net, const ToolCall& c) {
             net.release_reservation(arg_str(c, "flow"));
             return std::map<std::string, ojson>{};
           }});

  reg.add({.name = "update_node_config",
           .arg_schema = {{"node", ArgType::Str},
                          {"param", ArgType::Str},
                          {"value", ArgType::Int}},
           .latency_ms = lat.config_write,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             net.update_node_param(arg_str(c, "node"), arg_str(c, "param"),
                                   arg_int(c, "value"));
             return std::map<std::string, ojson>{{"param", arg_str(c, "param")},
                                                 {"value", arg_int(c, "value")}};
           }});

  reg.add({.name = "graceful_reload",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.reload,
           .safety = need_node,
           .effect = [](Simnet&, const ToolCall&) {
             return std::map<std::string, ojson>{{"reloaded", true}};
           }});

  reg.add({.name = "restart_node",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.restart,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             net.restart_node(arg_str(c, "node"));
             return std::map<std::string, ojson>{{"health", "Up"}};
           }});

  reg.add({.name = "scale_session_capacity",
           .arg_schema = {{"node", ArgType::Str}, {"delta", ArgType::Int}},
           .latency_ms = lat.scale,
           .safety = [](const Simnet& net, const ToolCall& c) -> std::optional<std::string> {
             const NfNode* n = net.find_node(arg_str(c, "node"));
             if (!n) return "unknown node: " + arg_str(c, "node");
             if (!n->params.count("session_capacity"))
               return "node has no session_capacity";
             return std::nullopt;
           },
           .effect = [](Simnet& net, const ToolCall& c) {
             net.scale_session_capacity(arg_str(c, "node"), arg_int(c, "delta"));
             return std::map<std::string, ojson>{
                 {"session_capacity",
                  net.find_node(arg_str(c, "node"))->params.at("session_capacity")}};
           }});

  reg.add({.name = "ping_check",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.diagnostic,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             const NfNode* n = net.find_node(arg_str(c, "node"));
             const bool reachable = n->health != NodeHealth::Unreachable;
             return std::map<std::string, ojson>{{"reachable", reachable}};
           },
           .latency_for = [lat](const Simnet& net, const ToolCall& c) {
             const NfNode* n = net.find_node(arg_str(c, "node"));
             // An unreachable target holds the ping for the full timeout.
             if (n && n->health == NodeHealth::Unreachable) return lat.ping_timeout;
             return lat.diagnostic;
           }});

  reg.add({.name = "pod_status_check",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.diagnostic,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             return std::map<std::string, ojson>{
                 {"health", to_string(net.find_node(arg_str(c, "node"))->health)}};
           }});

  reg.add({.name = "link_check",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.diagnostic,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             const NfNode* n = net.find_node(arg_str(c, "node"));
             return std::map<std::string, ojson>{
                 {"link_up", n->health != NodeHealth::Unreachable}};
           }});

  reg.add({.name = "query_metrics",
           .arg_schema = {{"node", ArgType::Str}},
           .latency_ms = lat.diagnostic,
           .safety = need_node,
           .effect = [](Simnet& net, const ToolCall& c) {
             const NfNode* n = net.find_node(arg_str(c, "node"));
             std::map<std::string, ojson> out;
             out["usage"] = n->usage;
             out["params"] = n->params;
             return out;
           }});

  return reg;
}

}  // namespace hana
