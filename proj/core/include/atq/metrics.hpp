// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "atq/attack_tree.hpp"
#include "atq/load.hpp"

namespace atq {

/// Delta-fold of the attribution over the attack; unit_delta for the empty
/// attack. Throws MissingAttributionError / InvariantError (out of domain).
double attack_metric(const Load& load, const Attribution& attr, const Attack& attack);

/// Nabla over the minimal attacks of `node` of their attack metric.
///
/// Dispatches to the bottom-up pass when the node's cone is tree-structured
/// and to the definitional computation otherwise.
double tree_metric(const Load& load, const Attribution& attr, const AttackTree& tree,
                   std::string_view node);
inline double tree_metric(const Load& load, const Attribution& attr, const AttackTree& tree) {
  return tree_metric(load, attr, tree, tree.root());
}

/// Leaves map to their value, OR to nabla, AND/SAND to delta. Exact only
/// when the cone below `node` is tree-structured; throws InvariantError
/// otherwise.
double tree_metric_bottom_up(const Load& load, const Attribution& attr,
                             const AttackTree& tree, std::string_view node);

/// Nabla over minimal_attacks(node). Works on any DAG.
double tree_metric_definitional(const Load& load, const Attribution& attr,
                                const AttackTree& tree, std::string_view node);

/// [metric at all lower endpoints, metric at all upper endpoints]. Valid for
/// loads whose metric is monotone in each leaf value, which covers every
/// built-in.
Interval interval_tree_metric(const Load& load, const IntervalAttribution& iattr,
                              const AttackTree& tree, std::string_view node);
inline Interval interval_tree_metric(const Load& load, const IntervalAttribution& iattr,
                                     const AttackTree& tree) {
  return interval_tree_metric(load, iattr, tree, tree.root());
}

/// beta(a) = -ln alpha(a) for every entry.
Attribution to_log_domain(const Attribution& probabilities);
/// [-ln hi, -ln lo] per entry.
IntervalAttribution to_log_domain(const IntervalAttribution& probabilities);

/// -ln of the max-probability metric at the root.
double security_index(const AttackTree& tree, const Attribution& probabilities);
/// Same quantity via the (min, +) load on -ln leaf values.
double security_index_log_domain(const AttackTree& tree, const Attribution& probabilities);

}  // namespace atq
