#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hana/sim/allocate.hpp"
#include "hana/sim/types.hpp"

namespace hana {

struct AlarmTransition {
  bool raised = false;  // false => cleared
  Alert alert;
};

/// The simulated 5G core: cells with shared capacity, QoS flows, and
/// network-function nodes with threshold-driven alarms. Pure state; the
/// event loop drives it and owns the clock.
class Simnet {
 public:
  std::map<std::string, Cell> cells;
  std::map<std::string, QosFlow> flows;
  std::map<std::string, NfNode> nodes;

  // --- queries -------------------------------------------------------

  const QosFlow* find_flow(const std::string& id) const {
    auto it = flows.find(id);
    return it == flows.end() ? nullptr : &it->second;
  }
  const NfNode* find_node(const std::string& id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  }
  const Cell* find_cell(const std::string& id) const {
    auto it = cells.find(id);
    return it == cells.end() ? nullptr : &it->second;
  }

  double reserved_gbr(const Cell& cell) const {
    double sum = 0.0;
    for (const auto& fid : cell.flow_ids) {
      auto it = flows.find(fid);
      if (it != flows.end() && it->second.ng_qi == NgQi::GuaranteedBitrate)
        sum += it->second.gbr_mbps;
    }
    return sum;
  }

  bool alert_active(const std::string& node, AlertCode code) const {
    return active_alerts_.count({node, code}) > 0;
  }

  const std::set<std::pair<std::string, AlertCode>>& active_alerts() const {
    return active_alerts_;
  }

  // --- allocation & telemetry ---------------------------------------

  /// Reruns water-filling on every cell and snapshots the world.
  TelemetrySample sample(Millis t) {
    TelemetrySample s;
    s.t = t;
    for (auto& [cid, cell] : cells) {
      std::vector<const QosFlow*> fs;
      for (const auto& fid : cell.flow_ids) fs.push_back(&flows.at(fid));
      auto granted = allocate_capacity(cell, fs);
      for (auto& [fid, g] : granted) flows.at(fid).granted_mbps = g;
      // Single-cell scenarios: the sample carries the (only) cell's view.
      s.cell_id = cid;
      s.cell_capacity_mbps = cell.capacity_mbps;
      s.cell_offered_load = 0.0;
      for (const QosFlow* f : fs) {
        s.cell_offered_load += f->demand_mbps;
        FlowSample fl;
        fl.granted_mbps = flows.at(f->id).granted_mbps;
        fl.demand_mbps = f->demand_mbps;
        fl.gbr_mbps = f->gbr_mbps;
        fl.ng_qi = f->ng_qi;
        s.flows[f->id] = fl;
      }
    }
    for (const auto& [nid, node] : nodes) s.node_usages[nid] = node.usage;
    for (const auto& key : active_alerts_) s.active_alerts.push_back(key);
    return s;
  }

  // --- alarms --------------------------------------------------------

  /// Evaluates every node's alarm conditions against thresholds and
  /// returns the raise/clear transitions since the last evaluation.
  /// (node, code) pairs stay deduplicated: an active alarm re-raising
  /// produces no transition.
  std::vector<AlarmTransition> evaluate_alarms(Millis t) {
    std::vector<AlarmTransition> out;
    for (const auto& [nid, node] : nodes) {
      check_condition(t, node, AlertCode::AmfUnreachable,
                      node.kind == NodeKind::AMF &&
                          node.health == NodeHealth::Unreachable,
                      Severity::Critical, out);
      check_condition(
          t, node, AlertCode::HttpConnExhaustion,
          node.params.count("max_http_connections") &&
              usage_of(node, "http_connections_in_use") >=
                  node.params.at("max_http_connections"),
          Severity::Critical, out);
      check_condition(
          t, node, AlertCode::SessionCapacityL1,
          node.params.count("session_capacity") &&
              static_cast<double>(usage_of(node, "active_sessions")) >=
                  0.95 * static_cast<double>(node.params.at("session_capacity")),
          Severity::Major, out);
    }
    return out;
  }

  // --- mutations (driven by fault injection and tool effects) --------

  /// Applies a fault's overrides. Unknown target is a configuration error.
  void apply_fault(const FaultInjection& f) {
    auto it = nodes.find(f.target_node);
    if (it == nodes.end())
      throw std::runtime_error("fault targets unknown node: " + f.target_node);
    for (const auto& [k, v] : f.param_overrides) it->second.params[k] = v;
    for (const auto& [k, v] : f.usage_overrides) it->second.usage[k] = v;
    if (f.set_unreachable) it->second.health = NodeHealth::Unreachable;
  }

  std::optional<std::string> set_qos_profile(const std::string& flow_id, NgQi q) {
    auto it = flows.find(flow_id);
    if (it == flows.end()) return "unknown flow: " + flow_id;
    it->second.ng_qi = q;
    if (q != NgQi::GuaranteedBitrate) it->second.gbr_mbps = 0.0;
    return std::nullopt;
  }

  /// Fails (state untouched) if the reservation would oversubscribe the cell.
  std::optional<std::string> reserve_bandwidth(const std::string& cell_id,
                                               const std::string& flow_id,
                                               double rate) {
    auto cit = cells.find(cell_id);
    if (cit == cells.end()) return "unknown cell: " + cell_id;
    auto fit = flows.find(flow_id);
    if (fit == flows.end()) return "unknown flow: " + flow_id;
    QosFlow& f = fit->second;
    const double other = reserved_gbr(cit->second) -
                         (f.ng_qi == NgQi::GuaranteedBitrate ? f.gbr_mbps : 0.0);
    if (other + rate > cit->second.capacity_mbps + 1e-12)
      return "reservation exceeds residual capacity";
    f.ng_qi = NgQi::GuaranteedBitrate;
    f.gbr_mbps = rate;
    return std::nullopt;
  }

  std::optional<std::string> release_reservation(const std::string& flow_id) {
    auto it = flows.find(flow_id);
    if (it == flows.end()) return "unknown flow: " + flow_id;
    it->second.ng_qi = NgQi::BestEffort;
    it->second.gbr_mbps = 0.0;
    return std::nullopt;
  }

  std::optional<std::string> update_node_param(const std::string& node_id,
                                               const std::string& param,
                                               std::int64_t value) {
    auto it = nodes.find(node_id);
    if (it == nodes.end()) return "unknown node: " + node_id;
    it->second.params[param] = value;
    return std::nullopt;
  }

  std::optional<std::string> restart_node(const std::string& node_id) {
    auto it = nodes.find(node_id);
    if (it == nodes.end()) return "unknown node: " + node_id;
    it->second.health = NodeHealth::Up;
    it->second.usage["http_connections_in_use"] = 0;
    return std::nullopt;
  }

  std::optional<std::string> scale_session_capacity(const std::string& node_id,
                                                    std::int64_t delta) {
    auto it = nodes.find(node_id);
    if (it == nodes.end()) return "unknown node: " + node_id;
    it->second.params["session_capacity"] += delta;
    return std::nullopt;
  }

 private:
  static std::int64_t usage_of(const NfNode& n, const std::string& key) {
    auto it = n.usage.find(key);
    return it == n.usage.end() ? 0 : it->second;
  }

  void check_condition(Millis t, const NfNode& node, AlertCode code,
                       bool firing, Severity sev,
                       std::vector<AlarmTransition>& out) {
    const std::pair<std::string, AlertCode> key{node.id, code};
    const bool active = active_alerts_.count(key) > 0;
    if (firing && !active) {
      active_alerts_.insert(key);
      Alert a;
      a.t = t;
      a.source_node = node.id;
      a.code = code;
      a.severity = sev;
      a.details["address"] = node.address;
      a.details["node_kind"] = to_string(node.kind);
      out.push_back(AlarmTransition{true, a});
    } else if (!firing && active) {
      active_alerts_.erase(key);
      Alert a;
      a.t = t;
      a.source_node = node.id;
      a.code = code;
      a.severity = sev;
      a.details["address"] = node.address;
      a.details["node_kind"] = to_string(node.kind);
      out.push_back(AlarmTransition{false, a});
    }
  }

  std::set<std::pair<std::string, AlertCode>> active_alerts_;
};

}  // namespace hana
