// SPDX-License-Identifier: Apache-2.0
#include "atq/metrics.hpp"

#include <functional>
#include <sstream>
#include <vector>

#include "atq/error.hpp"

namespace atq {

namespace {

double leaf_value(const Load& load, const Attribution& attr, std::string_view id) {
  double x = attr.at(id);
  if (!load.in_domain(x)) {
    std::ostringstream msg;
    msg << "value " << x << " for '" << id << "' lies outside the domain of " << load.name;
    throw InvariantError(msg.str());
  }
  return x;
}

}  // namespace

double attack_metric(const Load& load, const Attribution& attr, const Attack& attack) {
  double acc = load.unit_delta;
  for (const auto& step : attack) acc = load.within(acc, leaf_value(load, attr, step));
  return acc;
}

double tree_metric_definitional(const Load& load, const Attribution& attr,
                                const AttackTree& tree, std::string_view node) {
  double acc = load.unit_nabla;
  for (const auto& attack : minimal_attacks(tree, node)) {
    acc = load.across(acc, attack_metric(load, attr, attack));
  }
  return acc;
}

double tree_metric_bottom_up(const Load& load, const Attribution& attr,
                             const AttackTree& tree, std::string_view node) {
  tree.require_valid();
  if (!tree.tree_structured_below(node)) {
    throw InvariantError("bottom-up metric needs a tree-structured cone below '" +
                         std::string(node) + "'");
  }
  std::function<double(std::size_t)> eval = [&](std::size_t v) -> double {
    const auto& n = tree.at(v);
    if (n.is_leaf()) return leaf_value(load, attr, n.id);
    const bool alternatives = n.type == GateType::Or;
    double acc = alternatives ? load.unit_nabla : load.unit_delta;
    for (auto u : tree.child_indices(v)) {
      double x = eval(u);
      acc = alternatives ? load.across(acc, x) : load.within(acc, x);
    }
    return acc;
  };
  return eval(tree.index_of(node));
}

double tree_metric(const Load& load, const Attribution& attr, const AttackTree& tree,
                   std::string_view node) {
  tree.require_valid();
  if (!tree.contains(node)) throw UnknownEntityError("unknown node '" + std::string(node) + "'");
  if (tree.tree_structured_below(node)) return tree_metric_bottom_up(load, attr, tree, node);
  return tree_metric_definitional(load, attr, tree, node);
}

Interval interval_tree_metric(const Load& load, const IntervalAttribution& iattr,
                              const AttackTree& tree, std::string_view node) {
  double a = tree_metric(load, iattr.lower(), tree, node);
  double b = tree_metric(load, iattr.upper(), tree, node);
  return a <= b ? Interval{a, b} : Interval{b, a};
}

Attribution to_log_domain(const Attribution& probabilities) {
  Attribution out;
  for (const auto& [id, p] : probabilities.values()) out.set(id, neg_log(p));
  return out;
}

IntervalAttribution to_log_domain(const IntervalAttribution& probabilities) {
  IntervalAttribution out;
  for (const auto& [id, b] : probabilities.bounds()) {
    out.set(id, {neg_log(b.hi), neg_log(b.lo)});
  }
  return out;
}

double security_index(const AttackTree& tree, const Attribution& probabilities) {
  return neg_log(tree_metric(loads::max_probability(), probabilities, tree));
}

double security_index_log_domain(const AttackTree& tree, const Attribution& probabilities) {
  // Validate the probabilities in their own domain before transforming.
  const auto prob = loads::max_probability();
  for (const auto& id : tree.basic_steps()) {
    if (probabilities.contains(id)) leaf_value(prob, probabilities, id);
  }
  return tree_metric(loads::security_index(), to_log_domain(probabilities), tree);
}

}  // namespace atq
