// SPDX-License-Identifier: Apache-2.0
#include "atq/load.hpp"

#include <cmath>

#include "atq/error.hpp"

namespace atq {

namespace loads {

Load min_cost() { return {"mincost", Combiner::Min, Combiner::Plus, kInfinity, 0.0, 0.0, kInfinity}; }

Load min_time_sequential() {
  return {"mintime-seq", Combiner::Min, Combiner::Plus, kInfinity, 0.0, 0.0, kInfinity};
}

Load min_time_parallel() {
  return {"mintime-par", Combiner::Min, Combiner::Max, kInfinity, 0.0, 0.0, kInfinity};
}

Load min_skill() { return {"minskill", Combiner::Min, Combiner::Max, kInfinity, 0.0, 0.0, kInfinity}; }

Load max_probability() { return {"maxprob", Combiner::Max, Combiner::Times, 0.0, 1.0, 0.0, 1.0}; }

// Max probability after the -ln transform.
Load security_index() {
  return {"security-index", Combiner::Min, Combiner::Plus, kInfinity, 0.0, 0.0, kInfinity};
}

}  // namespace loads

const std::vector<Load>& builtin_loads() {
  static const std::vector<Load> all{
      loads::min_cost(),        loads::min_time_sequential(), loads::min_time_parallel(),
      loads::min_skill(),       loads::max_probability(),     loads::security_index(),
  };
  return all;
}

const Load& load_by_name(std::string_view name) {
  for (const auto& load : builtin_loads()) {
    if (load.name == name) return load;
  }
  throw UnknownEntityError("unknown metric '" + std::string(name) + "'");
}

double Attribution::at(std::string_view id) const {
  auto it = values_.find(id);
  if (it == values_.end()) {
    throw MissingAttributionError("no attribution for '" + std::string(id) + "'");
  }
  return it->second;
}

IntervalAttribution::IntervalAttribution(
    std::initializer_list<std::pair<const NodeId, Interval>> values) {
  for (const auto& [id, bounds] : values) set(id, bounds);
}

IntervalAttribution IntervalAttribution::from_points(const Attribution& points) {
  IntervalAttribution out;
  for (const auto& [id, x] : points.values()) out.bounds_[id] = {x, x};
  return out;
}

void IntervalAttribution::set(const NodeId& id, Interval bounds) {
  if (!(bounds.lo <= bounds.hi)) {
    throw InvariantError("interval for '" + id + "' has lo > hi");
  }
  bounds_[id] = bounds;
}

Interval IntervalAttribution::at(std::string_view id) const {
  auto it = bounds_.find(id);
  if (it == bounds_.end()) {
    throw MissingAttributionError("no interval attribution for '" + std::string(id) + "'");
  }
  return it->second;
}

Attribution IntervalAttribution::lower() const {
  Attribution out;
  for (const auto& [id, b] : bounds_) out.set(id, b.lo);
  return out;
}

Attribution IntervalAttribution::upper() const {
  Attribution out;
  for (const auto& [id, b] : bounds_) out.set(id, b.hi);
  return out;
}

double neg_log(double probability) {
  if (probability >= 1.0) return 0.0;
  if (probability <= 0.0) return kInfinity;
  return -std::log(probability);
}

}  // namespace atq
