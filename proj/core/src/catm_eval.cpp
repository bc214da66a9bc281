// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdio>
#include <vector>

#include "atq/catm.hpp"
#include "atq/error.hpp"
#include "atq/metrics.hpp"

namespace atq {

namespace {

using Overrides = std::map<NodeId, Interval, std::less<>>;

bool is_subset(const Attack& small, const Attack& big) {
  return small.size() <= big.size() && std::includes(big.begin(), big.end(), small.begin(), small.end());
}

AttackSet minimize(const std::vector<Attack>& sets) {
  std::vector<const Attack*> order;
  for (const auto& s : sets) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const Attack* a, const Attack* b) { return a->size() < b->size(); });
  std::vector<const Attack*> kept;
  for (const auto* s : order) {
    bool dominated = std::any_of(kept.begin(), kept.end(),
                                 [&](const Attack* k) { return is_subset(*k, *s); });
    if (!dominated) kept.push_back(s);
  }
  AttackSet out;
  for (const auto* s : kept) out.insert(*s);
  return out;
}

struct Term {
  std::set<NodeId> positive;
  std::set<NodeId> negative;
};

std::vector<Term> dnf(const Formula& f, bool polarity, std::size_t limit) {
  switch (f.kind) {
    case Formula::Kind::Atom: {
      Term t;
      (polarity ? t.positive : t.negative).insert(f.name);
      return {t};
    }
    case Formula::Kind::Not:
      return dnf(*f.lhs, !polarity, limit);
    case Formula::Kind::And: {
      auto a = dnf(*f.lhs, polarity, limit);
      auto b = dnf(*f.rhs, polarity, limit);
      if (!polarity) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      std::vector<Term> out;
      for (const auto& x : a) {
        for (const auto& y : b) {
          Term t = x;
          t.positive.insert(y.positive.begin(), y.positive.end());
          t.negative.insert(y.negative.begin(), y.negative.end());
          bool clash = std::any_of(t.positive.begin(), t.positive.end(),
                                   [&](const NodeId& id) { return t.negative.count(id) > 0; });
          if (!clash) out.push_back(std::move(t));
          if (out.size() > limit) throw Error("formula expansion exceeds the enumeration limit");
        }
      }
      return out;
    }
    default:
      throw FormulaError("layer-2 construct inside a layer-1 formula", f.position);
  }
}

void check_atoms(const AttackTree& tree, const Formula& f) {
  if (f.kind == Formula::Kind::Atom && !tree.contains(f.name)) {
    throw FormulaError("unknown node '" + f.name + "'", f.position);
  }
  if (f.lhs) check_atoms(tree, *f.lhs);
  if (f.rhs) check_atoms(tree, *f.rhs);
}

void check_targets(const AttackTree& tree, const Formula& root, const Formula& f) {
  if (f.kind == Formula::Kind::Assign) {
    if (!tree.contains(f.name)) {
      throw FormulaError("unknown assignment target '" + f.name + "'", f.position);
    }
    auto check = check_assignment_target(tree, root, f.name);
    if (!check.ok()) throw FormulaError(check.message, f.position);
  }
  if (f.lhs) check_targets(tree, root, *f.lhs);
  if (f.rhs) check_targets(tree, root, *f.rhs);
}

bool holds(const AttackTree& tree, const Attack& attack, const Formula& phi) {
  switch (phi.kind) {
    case Formula::Kind::Atom:
      return structure_function(tree, phi.name, attack);
    case Formula::Kind::Not:
      return !holds(tree, attack, *phi.lhs);
    case Formula::Kind::And:
      return holds(tree, attack, *phi.lhs) && holds(tree, attack, *phi.rhs);
    default:
      throw FormulaError("layer-2 construct inside a layer-1 formula", phi.position);
  }
}

const IntervalAttribution* base_attribution(const LoadAttributions& attrs, const Load& load,
                                            IntervalAttribution& scratch) {
  if (auto it = attrs.find(load.name); it != attrs.end()) return &it->second;
  if (load.name == "security-index") {
    if (auto it = attrs.find("maxprob"); it != attrs.end()) {
      scratch = to_log_domain(it->second);
      return &scratch;
    }
  }
  return nullptr;
}

// Overridden gates that are not inside the cone of another overridden gate.
std::vector<NodeId> outer_gates(const AttackTree& tree, const Overrides& overrides) {
  std::vector<NodeId> gates;
  for (const auto& [id, b] : overrides) {
    if (!tree.node(id).is_leaf()) gates.push_back(id);
  }
  std::set<NodeId> inner;
  for (const auto& g : gates) {
    for (const auto& d : tree.descendants(g)) inner.insert(d);
  }
  std::vector<NodeId> out;
  for (const auto& g : gates) {
    if (!inner.count(g)) out.push_back(g);
  }
  return out;
}

Truth compare(const Interval& metric, double m) {
  if (metric.hi <= m) return Truth::True;
  if (metric.lo < m && m < metric.hi) return Truth::Maybe;
  return Truth::False;
}

Interval value_of(const NodeId& id, const Load& load, const IntervalAttribution* base,
                  const Overrides& overrides) {
  Interval iv;
  if (auto it = overrides.find(id); it != overrides.end()) {
    iv = it->second;
  } else if (base) {
    iv = base->at(id);
  } else {
    throw MissingAttributionError("no " + load.name + " attribution for '" + id + "'");
  }
  if (!load.in_domain(iv.lo) || !load.in_domain(iv.hi)) {
    throw InvariantError("value of '" + id + "' outside the domain of " + load.name);
  }
  return iv;
}

Interval attack_interval(const AttackTree& tree, const Attack& attack, const Load& load,
                         const LoadAttributions& attrs, const Overrides& overrides) {
  IntervalAttribution scratch;
  const auto* base = base_attribution(attrs, load, scratch);
  Attack effective = attack;
  for (const auto& g : outer_gates(tree, overrides)) {
    for (const auto& d : tree.descendants(g)) effective.erase(d);
    if (structure_function(tree, g, attack)) effective.insert(g);
  }
  Interval out{load.unit_delta, load.unit_delta};
  for (const auto& id : effective) {
    auto iv = value_of(id, load, base, overrides);
    out.lo = load.within(out.lo, iv.lo);
    out.hi = load.within(out.hi, iv.hi);
  }
  return out;
}

std::string describe(const Formula& psi, const Interval& metric) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ": metric [%.6g, %.6g] vs threshold %.6g", metric.lo, metric.hi,
                psi.threshold);
  return to_string(psi) + buf;
}

Truth val(const AttackTree& tree, const Attack& attack, const LoadAttributions& attrs,
          const Formula& psi, const Overrides& overrides, std::vector<std::string>* trace) {
  switch (psi.kind) {
    case Formula::Kind::Not:
      return kleene_not(val(tree, attack, attrs, *psi.lhs, overrides, trace));
    case Formula::Kind::And:
      return kleene_and(val(tree, attack, attrs, *psi.lhs, overrides, trace),
                        val(tree, attack, attrs, *psi.rhs, overrides, trace));
    case Formula::Kind::MetricLeq: {
      if (!holds(tree, attack, *psi.lhs)) {
        if (trace) trace->push_back(to_string(psi) + ": attack does not satisfy the operand");
        return Truth::False;
      }
      const auto& load = load_by_name(psi.name);
      auto metric = attack_interval(tree, attack, load, attrs, overrides);
      if (trace) trace->push_back(describe(psi, metric));
      return compare(metric, psi.threshold);
    }
    case Formula::Kind::Assign: {
      Overrides inner = overrides;
      inner[psi.name] = psi.bounds;
      return val(tree, attack, attrs, *psi.lhs, inner, trace);
    }
    case Formula::Kind::Atom:
      break;
  }
  throw FormulaError("atom outside metric() in a layer-2 formula", psi.position);
}

// Copy of the tree in which each gate of `gates` is a BAS; nodes no longer
// reachable from the root are dropped.
AttackTree collapse(const AttackTree& tree, const std::vector<NodeId>& gates) {
  std::set<NodeId> cut(gates.begin(), gates.end());
  std::vector<bool> keep(tree.size(), false);
  std::vector<std::size_t> stack{tree.root_index()};
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    if (keep[v]) continue;
    keep[v] = true;
    if (cut.count(tree.at(v).id)) continue;
    for (auto c : tree.child_indices(v)) stack.push_back(c);
  }
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (!keep[i]) continue;
    Node n = tree.at(i);
    if (cut.count(n.id)) {
      n.type = GateType::Bas;
      n.children.clear();
    }
    nodes.push_back(std::move(n));
  }
  return AttackTree(std::move(nodes), tree.root());
}

Truth val_tree(const AttackTree& tree, const LoadAttributions& attrs, const Formula& psi,
               const Overrides& overrides, std::vector<std::string>* trace) {
  switch (psi.kind) {
    case Formula::Kind::Not:
      return kleene_not(val_tree(tree, attrs, *psi.lhs, overrides, trace));
    case Formula::Kind::And:
      return kleene_and(val_tree(tree, attrs, *psi.lhs, overrides, trace),
                        val_tree(tree, attrs, *psi.rhs, overrides, trace));
    case Formula::Kind::MetricLeq: {
      const auto& load = load_by_name(psi.name);
      IntervalAttribution scratch;
      const auto* base = base_attribution(attrs, load, scratch);
      IntervalAttribution effective = base ? *base : IntervalAttribution{};
      for (const auto& [id, b] : overrides) effective.set(id, b);
      auto gates = outer_gates(tree, overrides);
      auto metric = gates.empty()
                        ? formula_metric(tree, load, effective, *psi.lhs)
                        : formula_metric(collapse(tree, gates), load, effective, *psi.lhs);
      if (trace) trace->push_back(describe(psi, metric));
      return compare(metric, psi.threshold);
    }
    case Formula::Kind::Assign: {
      Overrides inner = overrides;
      inner[psi.name] = psi.bounds;
      return val_tree(tree, attrs, *psi.lhs, inner, trace);
    }
    case Formula::Kind::Atom:
      break;
  }
  throw FormulaError("atom outside metric() in a layer-2 formula", psi.position);
}

}  // namespace

AssignmentCheck check_assignment_target(const AttackTree& tree, const Formula& f,
                                        std::string_view target) {
  const Node& n = tree.node(target);
  if (n.is_leaf()) return {};
  if (!is_module(tree, target)) {
    return {AssignmentCheck::Status::NotModule,
            "cannot assign to '" + n.id +
                "': not a module (a descendant is reachable from outside its cone)"};
  }
  auto mentioned = atoms(f);
  for (const auto& d : tree.descendants(target)) {
    if (mentioned.count(d)) {
      return {AssignmentCheck::Status::DescendantInFormula,
              "cannot assign to '" + n.id + "': its descendant '" + d + "' occurs in the formula"};
    }
  }
  return {};
}

void bind(const AttackTree& tree, const Formula& f) {
  tree.require_valid();
  check_atoms(tree, f);
  check_targets(tree, f, f);
}

bool eval_layer1(const AttackTree& tree, const Attack& attack, const Formula& phi) {
  if (is_layer2(phi)) throw FormulaError("expected a layer-1 formula", phi.position);
  bind(tree, phi);
  return holds(tree, attack, phi);
}

Truth eval_layer2(const AttackTree& tree, const Attack& attack, const LoadAttributions& attrs,
                  const Formula& psi, std::vector<std::string>* trace) {
  bind(tree, psi);
  for (const auto& id : attack) {
    if (!tree.contains(id) || !tree.node(id).is_leaf()) {
      throw UnknownEntityError("attack element '" + id + "' is not a basic attack step");
    }
  }
  return val(tree, attack, attrs, psi, {}, trace);
}

AttackSet minimal_satisfying(const AttackTree& tree, const Formula& phi, std::size_t limit) {
  if (is_layer2(phi)) throw FormulaError("expected a layer-1 formula", phi.position);
  bind(tree, phi);
  std::vector<Attack> candidates;
  for (const auto& term : dnf(phi, true, limit)) {
    AttackSet combos{Attack{}};
    for (const auto& p : term.positive) {
      auto reach = minimal_attacks(tree, p, limit);
      std::vector<Attack> next;
      for (const auto& c : combos) {
        for (const auto& a : reach) {
          Attack u = c;
          u.insert(a.begin(), a.end());
          next.push_back(std::move(u));
          if (next.size() > limit) throw Error("formula expansion exceeds the enumeration limit");
        }
      }
      combos = minimize(next);
    }
    for (const auto& c : combos) {
      bool blocked = std::any_of(term.negative.begin(), term.negative.end(),
                                 [&](const NodeId& n) { return structure_function(tree, n, c); });
      if (!blocked) candidates.push_back(c);
    }
  }
  return minimize(candidates);
}

double formula_metric(const AttackTree& tree, const Load& load, const Attribution& attr,
                      const Formula& phi) {
  double acc = load.unit_nabla;
  for (const auto& s : minimal_satisfying(tree, phi)) {
    acc = load.across(acc, attack_metric(load, attr, s));
  }
  return acc;
}

Interval formula_metric(const AttackTree& tree, const Load& load, const IntervalAttribution& attr,
                        const Formula& phi) {
  auto sets = minimal_satisfying(tree, phi);
  auto lower = attr.lower();
  auto upper = attr.upper();
  Interval out{load.unit_nabla, load.unit_nabla};
  for (const auto& s : sets) {
    out.lo = load.across(out.lo, attack_metric(load, lower, s));
    out.hi = load.across(out.hi, attack_metric(load, upper, s));
  }
  return out;
}

Truth eval_tree_level(const AttackTree& tree, const LoadAttributions& attrs, const Formula& psi,
                      std::vector<std::string>* trace) {
  bind(tree, psi);
  return val_tree(tree, attrs, psi, {}, trace);
}

}  // namespace atq
