// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference computations written straight from the definitions. They share
// no code with the library beyond its data types.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atq/attack_tree.hpp"
#include "atq/knowledge.hpp"
#include "atq/load.hpp"

namespace atq::testing {

/// f_T by direct recursion over node children.
bool oracle_holds(const AttackTree& tree, const NodeId& node, const Attack& attack);

/// Every subset of `leaves` for which `pred` holds and no proper subset does.
AttackSet brute_minimal(const std::vector<NodeId>& leaves,
                        const std::function<bool(const Attack&)>& pred);
AttackSet brute_minimal(const AttackTree& tree, const NodeId& node);

/// All subsets of the tree's BASes that reach `node`.
AttackSet brute_successful(const AttackTree& tree, const NodeId& node);

/// Cut sets by recursion (OR: union, AND/SAND: pairwise unions), then
/// subsumption removal. Suitable for larger trees than brute force.
AttackSet oracle_cut_sets(const AttackTree& tree, const NodeId& node);

/// Nabla over the sets of the delta-fold; unit_nabla for no sets.
double fold_sets(const Load& load, const Attribution& attr, const AttackSet& sets);

/// Keeps BASes in `live` and gates with at least one kept child.
AttackTree oracle_prune(const AttackTree& tree, const std::set<NodeId>& live);

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// p[E, A] with exact counts: leaf usages per tactic (coarse parents fanned out
/// to their subtechniques tagged with the tactic), divided by the tactic's
/// total. Keys are (technique, tactic).
std::map<std::pair<std::string, std::string>, Ratio> oracle_likelihoods(
    const KnowledgeSnapshot& snapshot);

/// Random formula text over the given atoms together with its meaning.
struct RandomFormula {
  std::string text;
  std::function<bool(const Attack&)> holds;
};
RandomFormula random_formula(std::mt19937_64& rng, const AttackTree& tree, int depth);

/// Subsets of all BASes, as a list; for n <= 20.
std::vector<Attack> all_attacks(const AttackTree& tree);

}  // namespace atq::testing
