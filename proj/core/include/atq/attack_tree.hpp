// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atq {

using NodeId = std::string;

enum class GateType { Or, And, Sand, Bas };

std::string_view to_string(GateType type) noexcept;
/// Accepts "OR", "AND", "SAND", "BAS" (case-insensitive).
std::optional<GateType> parse_gate_type(std::string_view text) noexcept;

struct Node {
  NodeId id;
  GateType type = GateType::Bas;
  std::vector<NodeId> children;  // order matters for SAND only
  std::string label;
  std::optional<std::string> tactic;
  std::optional<std::string> technique;

  bool is_leaf() const noexcept { return type == GateType::Bas; }
};

/// A set of basic attack steps.
using Attack = std::set<NodeId>;
using AttackSet = std::set<Attack>;

struct Violation {
  enum class Kind {
    EmptyId,
    DuplicateId,
    DanglingChild,
    RepeatedChild,
    GateWithoutChildren,
    LeafWithChildren,
    UnknownRoot,
    NoRoot,
    MultipleRoots,
    RootMismatch,
    Cycle,
  };
  Kind kind;
  NodeId node;
  std::string message;
};

/// Rooted DAG of OR/AND/SAND gates over BAS leaves.
///
/// Construction never throws on structural problems: they are collected and
/// reported by validate(). Every analysis entry point calls require_valid()
/// first, so an invalid tree can be inspected but not evaluated.
class AttackTree {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  AttackTree() = default;
  AttackTree(std::vector<Node> nodes, NodeId root);

  const NodeId& root() const noexcept { return root_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(std::string_view id) const;
  /// Throws UnknownEntityError.
  const Node& node(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // npos when absent
  const Node& at(std::size_t index) const { return nodes_[index]; }

  std::span<const std::size_t> child_indices(std::size_t index) const {
    return children_[index];
  }
  std::span<const std::size_t> parent_indices(std::size_t index) const {
    return parents_[index];
  }
  std::size_t root_index() const noexcept { return root_index_; }

  /// BAS ids in declaration order.
  std::vector<NodeId> basic_steps() const;

  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }
  bool valid() const noexcept { return violations_.empty(); }
  /// Throws InvariantError listing the violations.
  void require_valid() const;

  /// No node reachable from `id` through two different paths.
  bool tree_structured_below(std::string_view id) const;
  bool tree_structured() const { return tree_structured_below(root_); }

  /// Strict descendants of `id`, in declaration order.
  std::vector<NodeId> descendants(std::string_view id) const;

 private:
  void index();
  void check();

  std::vector<Node> nodes_;
  NodeId root_;
  std::size_t root_index_ = npos;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<Violation> violations_;
};

std::vector<Violation> validate(const AttackTree& tree);

/// f_T(node, attack). SAND is evaluated as AND.
bool structure_function(const AttackTree& tree, std::string_view node,
                        const Attack& attack);

/// Minimal attacks reaching `node`; depends only on the node's descendant
/// cone. Throws Error when the enumeration grows beyond `limit` sets.
AttackSet minimal_attacks(const AttackTree& tree, std::string_view node,
                          std::size_t limit = 1'000'000);

/// True iff no edge enters the strict descendants of `node` from outside its
/// cone.
bool is_module(const AttackTree& tree, std::string_view node);

/// Keeps the BASes in `live` and every gate with at least one kept child.
/// Throws InvariantError if nothing survives below the root.
AttackTree prune(const AttackTree& tree, const std::set<NodeId>& live);

}  // namespace atq
