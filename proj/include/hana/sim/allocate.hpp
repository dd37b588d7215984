#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hana/sim/types.hpp"

namespace hana {

/// Reservation-first water-filling share of a cell's capacity.
///
/// GBR flows take min(gbr, demand) first, walked in flow-id order. The
/// residual is then split equally across every flow that still has
/// unsatisfied demand (GBR flows compete for their excess like anyone
/// else); a flow capped below the water level returns its unused share
/// to the pool, which is redistributed until the level settles.
inline std::map<std::string, double> allocate_capacity(
    const Cell& cell, const std::vector<const QosFlow*>& flows) {
  std::map<std::string, double> granted;
  double residual = cell.capacity_mbps;

  std::vector<const QosFlow*> order(flows);
  std::sort(order.begin(), order.end(),
            [](const QosFlow* a, const QosFlow* b) { return a->id < b->id; });

  for (const QosFlow* f : order) {
    double g = 0.0;
    if (f->ng_qi == NgQi::GuaranteedBitrate)
      g = std::min({f->gbr_mbps, f->demand_mbps, residual});
    granted[f->id] = g;
    residual -= g;
  }

  // Water-fill the remaining demand: repeatedly satisfy every flow whose
  // residual demand sits below the current equal share, then recompute
  // the level.
  std::vector<const QosFlow*> active;
  for (const QosFlow* f : order)
    if (f->demand_mbps - granted[f->id] > 0.0) active.push_back(f);
  while (!active.empty() && residual > 0.0) {
    const double share = residual / static_cast<double>(active.size());
    std::vector<const QosFlow*> still;
    bool removed = false;
    for (const QosFlow* f : active) {
      const double want = f->demand_mbps - granted[f->id];
      if (want <= share) {
        granted[f->id] += want;
        residual -= want;
        removed = true;
      } else {
        still.push_back(f);
      }
    }
    if (!removed) {
      for (const QosFlow* f : still) granted[f->id] += share;
      residual = 0.0;
      still.clear();
    }
    active = std::move(still);
  }
  return granted;
}

}  // namespace hana
