// SPDX-License-Identifier: Apache-2.0
#include "atq/attack_tree.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <sstream>

#include "atq/error.hpp"

namespace atq {

std::string_view to_string(GateType type) noexcept {
  switch (type) {
    case GateType::Or:
      return "OR";
    case GateType::And:
      return "AND";
    case GateType::Sand:
      return "SAND";
    case GateType::Bas:
      return "BAS";
  }
  return "BAS";
}

std::optional<GateType> parse_gate_type(std::string_view text) noexcept {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(c));
  if (upper == "OR") return GateType::Or;
  if (upper == "AND") return GateType::And;
  if (upper == "SAND") return GateType::Sand;
  if (upper == "BAS") return GateType::Bas;
  return std::nullopt;
}

AttackTree::AttackTree(std::vector<Node> nodes, NodeId root)
    : nodes_(std::move(nodes)), root_(std::move(root)) {
  index();
  check();
}

void AttackTree::index() {
  children_.assign(nodes_.size(), {});
  parents_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    // First declaration wins; duplicates are reported by check().
    by_id_.emplace(nodes_[i].id, i);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& child : nodes_[i].children) {
      auto it = by_id_.find(child);
      if (it == by_id_.end()) continue;
      children_[i].push_back(it->second);
      parents_[it->second].push_back(i);
    }
  }
  root_index_ = index_of(root_);
}

void AttackTree::check() {
  auto report = [this](Violation::Kind kind, const NodeId& node,
                       std::string message) {
    violations_.push_back({kind, node, std::move(message)});
  };

  std::map<std::string_view, int> seen;
  for (const auto& n : nodes_) {
    if (n.id.empty()) report(Violation::Kind::EmptyId, n.id, "node with empty id");
    if (++seen[n.id] == 2) {
      report(Violation::Kind::DuplicateId, n.id, "duplicate node id '" + n.id + "'");
    }
  }

  for (const auto& n : nodes_) {
    std::set<std::string_view> distinct;
    for (const auto& child : n.children) {
      if (!by_id_.count(child)) {
        report(Violation::Kind::DanglingChild, n.id,
               "node '" + n.id + "' references undeclared child '" + child + "'");
      }
      if (!distinct.insert(child).second) {
        report(Violation::Kind::RepeatedChild, n.id,
               "node '" + n.id + "' lists child '" + child + "' twice");
      }
    }
    if (n.is_leaf() && !n.children.empty()) {
      report(Violation::Kind::LeafWithChildren, n.id,
             "BAS '" + n.id + "' has children");
    }
    if (!n.is_leaf() && n.children.empty()) {
      report(Violation::Kind::GateWithoutChildren, n.id,
             "gate without children: '" + n.id + "'");
    }
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (parents_[i].empty()) roots.push_back(i);
  }
  if (root_index_ == npos) {
    report(Violation::Kind::UnknownRoot, root_, "root '" + root_ + "' is not declared");
  }
  if (roots.empty() && !nodes_.empty()) {
    report(Violation::Kind::NoRoot, root_, "no node without parents");
  } else if (roots.size() > 1) {
    std::string names;
    for (auto r : roots) names += (names.empty() ? "" : ", ") + nodes_[r].id;
    report(Violation::Kind::MultipleRoots, root_, "multiple roots: " + names);
  } else if (roots.size() == 1 && root_index_ != npos && roots[0] != root_index_) {
    report(Violation::Kind::RootMismatch, root_,
           "declared root '" + root_ + "' has parents; the parentless node is '" +
               nodes_[roots[0]].id + "'");
  }

  // Iterative three-colour DFS.
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> colour(nodes_.size(), kWhite);
  for (std::size_t start = 0; start < nodes_.size(); ++start) {
    if (colour[start] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    colour[start] = kGrey;
    bool cyclic = false;
    while (!stack.empty() && !cyclic) {
      auto& [v, next] = stack.back();
      if (next < children_[v].size()) {
        std::size_t u = children_[v][next++];
        if (colour[u] == kGrey) {
          report(Violation::Kind::Cycle, nodes_[u].id,
                 "cycle through '" + nodes_[u].id + "'");
          cyclic = true;
        } else if (colour[u] == kWhite) {
          colour[u] = kGrey;
          stack.emplace_back(u, 0);
        }
      } else {
        colour[v] = kBlack;
        stack.pop_back();
      }
    }
    if (cyclic) break;
  }
}

bool AttackTree::contains(std::string_view id) const {
  return by_id_.find(id) != by_id_.end();
}

std::size_t AttackTree::index_of(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? npos : it->second;
}

const Node& AttackTree::node(std::string_view id) const {
  auto i = index_of(id);
  if (i == npos) throw UnknownEntityError("unknown node '" + std::string(id) + "'");
  return nodes_[i];
}

std::vector<NodeId> AttackTree::basic_steps() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) out.push_back(n.id);
  }
  return out;
}

void AttackTree::require_valid() const {
  if (valid()) return;
  std::ostringstream msg;
  msg << "invalid attack tree:";
  for (const auto& v : violations_) msg << "\n  " << v.message;
  throw InvariantError(msg.str());
}

namespace {

std::vector<char> cone_mask(const AttackTree& tree, std::size_t top) {
  std::vector<char> in(tree.size(), 0);
  std::vector<std::size_t> stack{top};
  in[top] = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto u : tree.child_indices(v)) {
      if (!in[u]) {
        in[u] = 1;
        stack.push_back(u);
      }
    }
  }
  return in;
}

std::size_t checked_index(const AttackTree& tree, std::string_view id) {
  tree.require_valid();
  auto i = tree.index_of(id);
  if (i == AttackTree::npos) {
    throw UnknownEntityError("unknown node '" + std::string(id) + "'");
  }
  return i;
}

}  // namespace

bool AttackTree::tree_structured_below(std::string_view id) const {
  auto top = index_of(id);
  if (top == npos) throw UnknownEntityError("unknown node '" + std::string(id) + "'");
  auto in = cone_mask(*this, top);
  std::vector<int> incoming(nodes_.size(), 0);
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (!in[v]) continue;
    for (auto u : children_[v]) {
      if (++incoming[u] > 1) return false;
    }
  }
  return true;
}

std::vector<NodeId> AttackTree::descendants(std::string_view id) const {
  auto top = index_of(id);
  if (top == npos) throw UnknownEntityError("unknown node '" + std::string(id) + "'");
  auto in = cone_mask(*this, top);
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (in[v] && v != top) out.push_back(nodes_[v].id);
  }
  return out;
}

std::vector<Violation> validate(const AttackTree& tree) { return tree.violations(); }

bool structure_function(const AttackTree& tree, std::string_view node,
                        const Attack& attack) {
  auto top = checked_index(tree, node);
  for (const auto& step : attack) {
    auto i = tree.index_of(step);
    if (i == AttackTree::npos || !tree.at(i).is_leaf()) {
      throw UnknownEntityError("attack step '" + step + "' is not a BAS of the tree");
    }
  }
  std::vector<std::int8_t> memo(tree.size(), -1);
  std::function<bool(std::size_t)> eval = [&](std::size_t v) -> bool {
    if (memo[v] >= 0) return memo[v] != 0;
    const auto& n = tree.at(v);
    bool result = false;
    switch (n.type) {
      case GateType::Bas:
        result = attack.count(n.id) > 0;
        break;
      case GateType::Or:
        result = std::any_of(tree.child_indices(v).begin(), tree.child_indices(v).end(), eval);
        break;
      case GateType::And:
      case GateType::Sand:
        result = std::all_of(tree.child_indices(v).begin(), tree.child_indices(v).end(), eval);
        break;
    }
    memo[v] = result ? 1 : 0;
    return result;
  };
  return eval(top);
}

namespace {

// Cut sets over node indices, each sorted ascending.
using CutSet = std::vector<std::size_t>;
using Family = std::vector<CutSet>;

void minimize(Family& family) {
  std::sort(family.begin(), family.end(), [](const CutSet& a, const CutSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  family.erase(std::unique(family.begin(), family.end()), family.end());
  Family kept;
  kept.reserve(family.size());
  for (auto& candidate : family) {
    bool subsumed = false;
    for (const auto& k : kept) {
      if (k.size() >= candidate.size()) break;
      if (std::includes(candidate.begin(), candidate.end(), k.begin(), k.end())) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) kept.push_back(std::move(candidate));
  }
  family = std::move(kept);
}

class CutSetBuilder {
 public:
  CutSetBuilder(const AttackTree& tree, std::size_t limit)
      : tree_(tree), limit_(limit), memo_(tree.size()), done_(tree.size(), 0) {}

  const Family& of(std::size_t v) {
    if (done_[v]) return memo_[v];
    const auto& n = tree_.at(v);
    Family result;
    switch (n.type) {
      case GateType::Bas:
        result.push_back({v});
        break;
      case GateType::Or:
        for (auto u : tree_.child_indices(v)) {
          const auto& sub = of(u);
          result.insert(result.end(), sub.begin(), sub.end());
          guard(result.size());
        }
        minimize(result);
        break;
      case GateType::And:
      case GateType::Sand:
        result.push_back({});
        for (auto u : tree_.child_indices(v)) {
          const auto& sub = of(u);
          guard(result.size() * sub.size());
          Family next;
          next.reserve(result.size() * sub.size());
          for (const auto& left : result) {
            for (const auto& right : sub) {
              CutSet merged;
              merged.reserve(left.size() + right.size());
              std::set_union(left.begin(), left.end(), right.begin(), right.end(),
                             std::back_inserter(merged));
              next.push_back(std::move(merged));
            }
          }
          minimize(next);
          result = std::move(next);
        }
        break;
    }
    memo_[v] = std::move(result);
    done_[v] = 1;
    return memo_[v];
  }

 private:
  void guard(std::size_t n) const {
    if (n > limit_) {
      throw Error("minimal attack enumeration exceeds " + std::to_string(limit_) +
                  " candidate sets");
    }
  }

  const AttackTree& tree_;
  std::size_t limit_;
  std::vector<Family> memo_;
  std::vector<char> done_;
};

}  // namespace

AttackSet minimal_attacks(const AttackTree& tree, std::string_view node,
                          std::size_t limit) {
  auto top = checked_index(tree, node);
  CutSetBuilder builder(tree, limit);
  AttackSet out;
  for (const auto& cut : builder.of(top)) {
    Attack attack;
    for (auto i : cut) attack.insert(tree.at(i).id);
    out.insert(std::move(attack));
  }
  return out;
}

bool is_module(const AttackTree& tree, std::string_view node) {
  auto top = checked_index(tree, node);
  auto in = cone_mask(tree, top);
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (!in[v] || v == top) continue;
    for (auto p : tree.parent_indices(v)) {
      if (!in[p]) return false;
    }
  }
  return true;
}

AttackTree prune(const AttackTree& tree, const std::set<NodeId>& live) {
  tree.require_valid();
  for (const auto& id : live) {
    auto i = tree.index_of(id);
    if (i == AttackTree::npos) throw UnknownEntityError("unknown node '" + id + "'");
    if (!tree.at(i).is_leaf()) {
      throw InvariantError("prune: live node '" + id + "' is not a BAS");
    }
  }

  std::vector<std::int8_t> keep(tree.size(), -1);
  std::function<bool(std::size_t)> kept = [&](std::size_t v) -> bool {
    if (keep[v] >= 0) return keep[v] != 0;
    bool result = false;
    if (tree.at(v).is_leaf()) {
      result = live.count(tree.at(v).id) > 0;
    } else {
      // Visit every child so the memo is complete for the rebuild below.
      for (auto u : tree.child_indices(v)) result = kept(u) || result;
    }
    keep[v] = result ? 1 : 0;
    return result;
  };
  if (!kept(tree.root_index())) {
    throw InvariantError("empty campaign: pruning removes every leaf below root '" +
                         tree.root() + "'");
  }

  std::vector<Node> nodes;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (keep[v] != 1) continue;
    Node n = tree.at(v);
    n.children.clear();
    for (auto u : tree.child_indices(v)) {
      if (keep[u] == 1) n.children.push_back(tree.at(u).id);
    }
    nodes.push_back(std::move(n));
  }
  return AttackTree(std::move(nodes), tree.root());
}

}  // namespace atq
