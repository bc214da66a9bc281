// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atq/attack_tree.hpp"

namespace atq {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Combiner { Min, Max, Plus, Times };

constexpr double combine(Combiner op, double a, double b) noexcept {
  switch (op) {
    case Combiner::Min:
      return a < b ? a : b;
    case Combiner::Max:
      return a < b ? b : a;
    case Combiner::Plus:
      return a + b;
    case Combiner::Times:
      return a * b;
  }
  return a;
}

/// Linearly ordered unital semiring attribute domain
/// (V, nabla, delta, 1_nabla, 1_delta, <=) over a closed real interval V.
///
/// nabla combines values of alternative attacks, delta combines the steps of
/// one attack. The order is numeric <= for every built-in.
struct Load {
  std::string name;
  Combiner nabla = Combiner::Min;
  Combiner delta = Combiner::Plus;
  double unit_nabla = kInfinity;
  double unit_delta = 0.0;
  double domain_min = 0.0;
  double domain_max = kInfinity;

  double across(double a, double b) const noexcept { return combine(nabla, a, b); }
  double within(double a, double b) const noexcept { return combine(delta, a, b); }
  bool precedes(double a, double b) const noexcept { return a <= b; }
  bool in_domain(double x) const noexcept {
    return x >= domain_min && x <= domain_max;
  }
};

namespace loads {
Load min_cost();
Load min_time_sequential();
Load min_time_parallel();
Load min_skill();
Load max_probability();
Load security_index();
}  // namespace loads

/// mincost, mintime-seq, mintime-par, minskill, maxprob, security-index.
const std::vector<Load>& builtin_loads();
/// Throws UnknownEntityError for names outside builtin_loads().
const Load& load_by_name(std::string_view name);

/// Point value per BAS.
class Attribution {
 public:
  Attribution() = default;
  Attribution(std::initializer_list<std::pair<const NodeId, double>> values)
      : values_(values) {}

  void set(const NodeId& id, double value) { values_[id] = value; }
  bool contains(std::string_view id) const { return values_.find(id) != values_.end(); }
  /// Throws MissingAttributionError.
  double at(std::string_view id) const;
  bool empty() const noexcept { return values_.empty(); }
  const std::map<NodeId, double, std::less<>>& values() const noexcept { return values_; }

 private:
  std::map<NodeId, double, std::less<>> values_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const noexcept { return lo == hi; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// [lo, hi] bounds per BAS; a point value is the degenerate interval.
class IntervalAttribution {
 public:
  IntervalAttribution() = default;
  IntervalAttribution(std::initializer_list<std::pair<const NodeId, Interval>> values);
  static IntervalAttribution from_points(const Attribution& points);

  /// Throws InvariantError when lo > hi.
  void set(const NodeId& id, Interval bounds);
  bool contains(std::string_view id) const { return bounds_.find(id) != bounds_.end(); }
  /// Throws MissingAttributionError.
  Interval at(std::string_view id) const;
  bool empty() const noexcept { return bounds_.empty(); }
  const std::map<NodeId, Interval, std::less<>>& bounds() const noexcept { return bounds_; }

  Attribution lower() const;
  Attribution upper() const;

 private:
  std::map<NodeId, Interval, std::less<>> bounds_;
};

/// -ln(p), with -ln(1) reported as +0.
double neg_log(double probability);

}  // namespace atq
