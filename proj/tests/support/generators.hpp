// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "atq/attack_tree.hpp"
#include "atq/knowledge.hpp"
#include "atq/load.hpp"

namespace atq::testing {

using Rng = std::mt19937_64;

struct TreeShape {
  int min_leaves = 1;
  int max_leaves = 10;
  bool dag = false;          // allow shared children
  double share_rate = 0.25;  // chance of adding an extra, already-parented child
  bool allow_sand = true;
};

/// Random valid AT. Leaves are "b0".."bN", gates "g0".. with the last gate as
/// root (or the single leaf when only one is drawn).
AttackTree random_tree(Rng& rng, const TreeShape& shape);

/// Values drawn inside the load's domain; integers for the additive loads
/// so sums are exact.
Attribution random_attribution(Rng& rng, const AttackTree& tree, const Load& load);
IntervalAttribution random_intervals(Rng& rng, const AttackTree& tree, const Load& load);

/// Uniform draw from [lo, hi] per leaf.
Attribution sample_inside(Rng& rng, const IntervalAttribution& bounds);

struct SnapshotShape {
  int tactics = 3;
  int techniques = 6;
  int max_subtechniques = 3;
  int campaigns = 4;
  int max_uses = 6;
};

/// Random valid snapshot mixing fine, coarse and mixed usage records.
KnowledgeSnapshot random_snapshot(Rng& rng, const SnapshotShape& shape);

}  // namespace atq::testing
