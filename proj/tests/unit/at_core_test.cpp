// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <optional>

#include "atq/at_format.hpp"
#include "atq/attack_tree.hpp"
#include "atq/error.hpp"
#include "builders.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace atq {
namespace {

using testing::bas;
using testing::initial_access;
using testing::gate;

bool has_kind(const AttackTree& t, Violation::Kind k) {
  const auto& v = t.violations();
  return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
}

bool same_shape(const AttackTree& a, const AttackTree& b) {
  if (a.root() != b.root() || a.size() != b.size()) return false;
  for (const auto& n : a.nodes()) {
    if (!b.contains(n.id)) return false;
    const Node& m = b.node(n.id);
    if (m.type != n.type || m.children != n.children) return false;
  }
  return true;
}

// -- validate ---------------------------------------------------------------

TEST(Validate, SingleBasIsValid) {
  AttackTree t({bas("a")}, "a");
  EXPECT_TRUE(validate(t).empty());
}

TEST(Validate, GateWithoutChildren) {
  AttackTree t({gate("g", GateType::And, {})}, "g");
  ASSERT_EQ(validate(t).size(), 1U);
  EXPECT_EQ(validate(t)[0].kind, Violation::Kind::GateWithoutChildren);
  EXPECT_NE(validate(t)[0].message.find("gate without children"), std::string::npos);
  EXPECT_THROW(t.require_valid(), InvariantError);
  EXPECT_THROW(minimal_attacks(t, "g"), InvariantError);
}

TEST(Validate, InitialAccessIsValid) { EXPECT_TRUE(validate(initial_access()).empty()); }

TEST(Validate, StructuralViolations) {
  EXPECT_TRUE(has_kind(AttackTree({gate("g", GateType::Or, {"x"})}, "g"),
                       Violation::Kind::DanglingChild));
  EXPECT_TRUE(has_kind(AttackTree({gate("g", GateType::Or, {"a"}), bas("a"), bas("a")}, "g"),
                       Violation::Kind::DuplicateId));
  EXPECT_TRUE(has_kind(AttackTree({gate("g", GateType::Or, {"a", "a"}), bas("a")}, "g"),
                       Violation::Kind::RepeatedChild));
  Node leafy = bas("a");
  leafy.children = {"b"};
  EXPECT_TRUE(has_kind(AttackTree({gate("g", GateType::Or, {"a"}), leafy, bas("b")}, "g"),
                       Violation::Kind::LeafWithChildren));
  EXPECT_TRUE(has_kind(AttackTree({gate("g", GateType::Or, {"a"}), bas("a"), bas("b")}, "g"),
                       Violation::Kind::MultipleRoots));
  EXPECT_TRUE(has_kind(AttackTree({bas("a")}, "zz"), Violation::Kind::UnknownRoot));
  AttackTree cyc({gate("r", GateType::Or, {"g"}), gate("g", GateType::And, {"h", "a"}),
                  gate("h", GateType::Or, {"g"}), bas("a")},
                 "r");
  EXPECT_FALSE(cyc.valid());
  EXPECT_TRUE(has_kind(cyc, Violation::Kind::Cycle));
}

TEST(Validate, OneChildGateIsLegal) {
  AttackTree t({gate("g", GateType::And, {"a"}), bas("a")}, "g");
  EXPECT_TRUE(t.valid());
  EXPECT_EQ(minimal_attacks(t, "g"), (AttackSet{{"a"}}));
}

// -- structure function -------------------------------------------------------

TEST(StructureFunction, Examples) {
  const auto t = initial_access();
  EXPECT_TRUE(structure_function(t, "InA", {"CVE1"}));
  EXPECT_FALSE(structure_function(t, "VPN", {"GVC"}));
  for (const auto& id : t.basic_steps()) EXPECT_FALSE(structure_function(t, id, {}));
  EXPECT_THROW(structure_function(t, "nope", {}), UnknownEntityError);
}

TEST(StructureFunction, SandIsAnd) {
  AttackTree t({gate("s", GateType::Sand, {"a", "b"}), bas("a"), bas("b")}, "s");
  EXPECT_FALSE(structure_function(t, "s", {"b"}));
  EXPECT_TRUE(structure_function(t, "s", {"b", "a"}));
}

TEST(StructureFunction, MatchesOracleAndIsCoherent) {
  testing::Rng rng(11);
  for (int i = 0; i < 150; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 9, .dag = i % 2 == 1});
    ASSERT_TRUE(t.valid());
    const auto leaves = t.basic_steps();
    for (const auto& a : testing::all_attacks(t)) {
      const bool ok = structure_function(t, t.root(), a);
      ASSERT_EQ(ok, testing::oracle_holds(t, t.root(), a));
      if (!ok) continue;
      for (const auto& b : leaves) {
        Attack more = a;
        more.insert(b);
        ASSERT_TRUE(structure_function(t, t.root(), more));
      }
    }
  }
}

// -- minimal attacks ------------------------------------------------------------

TEST(MinimalAttacks, InitialAccess) {
  EXPECT_EQ(minimal_attacks(initial_access(), "InA"), (AttackSet{{"CVE1"}, {"CVE2"}, {"GVC", "CVP"}}));
}

TEST(MinimalAttacks, SingleBas) {
  AttackTree t({bas("b")}, "b");
  EXPECT_EQ(minimal_attacks(t, "b"), (AttackSet{{"b"}}));
}

TEST(MinimalAttacks, SharedLeafCountsOnce) {
  // r = AND(x, y), x = OR(a, s), y = AND(s, b)
  AttackTree t({gate("r", GateType::And, {"x", "y"}), gate("x", GateType::Or, {"a", "s"}),
                gate("y", GateType::And, {"s", "b"}), bas("a"), bas("s"), bas("b")},
               "r");
  EXPECT_EQ(minimal_attacks(t, "r"), (AttackSet{{"s", "b"}}));
}

TEST(MinimalAttacks, EqualsBruteForceOnRandomTreesAndDags) {
  testing::Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 10, .dag = i % 2 == 1});
    ASSERT_EQ(minimal_attacks(t, t.root()), testing::brute_minimal(t, t.root())) << "tree " << i;
  }
}

TEST(MinimalAttacks, AntichainAndCharacterisation) {
  testing::Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 8, .dag = true});
    const auto mins = minimal_attacks(t, t.root());
    for (const auto& m : mins) {
      EXPECT_TRUE(structure_function(t, t.root(), m));
      for (const auto& x : m) {
        Attack smaller = m;
        smaller.erase(x);
        EXPECT_FALSE(structure_function(t, t.root(), smaller));
      }
      for (const auto& n : mins) {
        if (&m == &n) continue;
        EXPECT_FALSE(std::includes(m.begin(), m.end(), n.begin(), n.end()));
      }
    }
    for (const auto& a : testing::all_attacks(t)) {
      const bool covered = std::any_of(mins.begin(), mins.end(), [&](const Attack& m) {
        return std::includes(a.begin(), a.end(), m.begin(), m.end());
      });
      EXPECT_EQ(structure_function(t, t.root(), a), covered);
    }
  }
}

TEST(MinimalAttacks, InnerNodeDependsOnConeOnly) {
  testing::Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    const auto t = testing::random_tree(rng, {.min_leaves = 3, .max_leaves = 8, .dag = true});
    for (const auto& n : t.nodes()) {
      ASSERT_EQ(minimal_attacks(t, n.id), testing::brute_minimal(t, n.id));
    }
  }
}

TEST(MinimalAttacks, LimitThrows) {
  std::vector<Node> nodes{gate("r", GateType::And, {})};
  for (int i = 0; i < 12; ++i) {
    const std::string g = "o" + std::to_string(i);
    nodes[0].children.push_back(g);
    nodes.push_back(gate(g, GateType::Or, {g + "a", g + "b"}));
    nodes.push_back(bas(g + "a"));
    nodes.push_back(bas(g + "b"));
  }
  AttackTree t(nodes, "r");
  EXPECT_EQ(minimal_attacks(t, "r").size(), 4096U);
  EXPECT_THROW(minimal_attacks(t, "r", 100), Error);
}

// -- modules ------------------------------------------------------------------

TEST(IsModule, TreeStructuredNodesAreModules) {
  testing::Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 10});
    for (const auto& n : t.nodes()) EXPECT_TRUE(is_module(t, n.id));
  }
}

TEST(IsModule, WocaoSharedCredentialGate) {
  const auto doc = read_at_file(testing::fixture("wocao_custom.at.json"));
  ASSERT_TRUE(doc.tree.valid());
  EXPECT_TRUE(is_module(doc.tree, "CrD"));
  EXPECT_FALSE(doc.tree.tree_structured());
  // the AND parent is shared by several tactic gates
  std::size_t parents = doc.tree.parent_indices(doc.tree.index_of("CrD")).size();
  EXPECT_GE(parents, 2U);
}

TEST(IsModule, SharedLeafEscapesEachParent) {
  // r = OR(p, q), p = AND(a, s), q = AND(s, b)
  AttackTree t({gate("r", GateType::Or, {"p", "q"}), gate("p", GateType::And, {"a", "s"}),
                gate("q", GateType::And, {"s", "b"}), bas("a"), bas("s"), bas("b")},
               "r");
  EXPECT_TRUE(is_module(t, "s"));
  EXPECT_FALSE(is_module(t, "p"));
  EXPECT_FALSE(is_module(t, "q"));
  EXPECT_TRUE(is_module(t, "r"));
}

// Module iff no strict descendant has a parent outside the node's cone.
bool module_oracle(const AttackTree& t, const NodeId& v) {
  const auto desc = t.descendants(v);
  std::set<NodeId> cone(desc.begin(), desc.end());
  cone.insert(v);
  for (const auto& n : t.nodes()) {
    if (cone.count(n.id)) continue;
    for (const auto& c : n.children) {
      if (c != v && cone.count(c)) return false;
    }
  }
  return true;
}

TEST(IsModule, MatchesReachabilityOracle) {
  testing::Rng rng(31);
  for (int i = 0; i < 80; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 10, .dag = true, .share_rate = 0.5});
    for (const auto& n : t.nodes()) EXPECT_EQ(is_module(t, n.id), module_oracle(t, n.id));
  }
}

// -- prune --------------------------------------------------------------------

TEST(Prune, AllLiveIsIdentity) {
  const auto t = initial_access();
  const auto leaves = t.basic_steps();
  EXPECT_TRUE(same_shape(prune(t, {leaves.begin(), leaves.end()}), t));
}

TEST(Prune, InitialAccessKeepsVpnBranch) {
  const auto p = prune(initial_access(), {"GVC", "CVP"});
  EXPECT_EQ(p.size(), 4U);
  EXPECT_EQ(p.node("InA").children, (std::vector<NodeId>{"VPN"}));
  EXPECT_FALSE(p.contains("EVJ"));
  EXPECT_EQ(minimal_attacks(p, "InA"), (AttackSet{{"GVC", "CVP"}}));
}

TEST(Prune, NothingLiveThrows) { EXPECT_THROW(prune(initial_access(), {}), InvariantError); }

// Subtrees without live leaves are absent: gates look only at present
// children.
std::optional<bool> holds_skipping(const AttackTree& t, const NodeId& v, const std::set<NodeId>& live,
                                   const Attack& a) {
  const Node& n = t.node(v);
  if (n.is_leaf()) {
    if (!live.count(v)) return std::nullopt;
    return a.count(v) > 0;
  }
  std::optional<bool> acc;
  for (const auto& c : n.children) {
    const auto r = holds_skipping(t, c, live, a);
    if (!r) continue;
    if (!acc) {
      acc = *r;
    } else {
      acc = n.type == GateType::Or ? (*acc || *r) : (*acc && *r);
    }
  }
  return acc;
}

TEST(Prune, MatchesOracleAndSkipSemantics) {
  testing::Rng rng(404);
  for (int i = 0; i < 100; ++i) {
    const auto t = testing::random_tree(rng, {.max_leaves = 9, .dag = i % 3 == 0});
    std::set<NodeId> live;
    for (const auto& l : t.basic_steps()) {
      if (rng() % 2) live.insert(l);
    }
    if (live.empty()) live.insert(t.basic_steps().front());
    const auto p = prune(t, live);
    ASSERT_TRUE(p.valid());
    ASSERT_TRUE(same_shape(p, testing::oracle_prune(t, live)));
    // attacks over live leaves
    const std::vector<NodeId> lv(live.begin(), live.end());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << lv.size()); ++mask) {
      Attack a;
      for (std::size_t k = 0; k < lv.size(); ++k) {
        if (mask >> k & 1U) a.insert(lv[k]);
      }
      ASSERT_EQ(structure_function(p, p.root(), a), *holds_skipping(t, t.root(), live, a));
    }
  }
}

TEST(Prune, OrOnlyTreesMatchRestriction) {
  AttackTree t({gate("r", GateType::Or, {"x", "c"}), gate("x", GateType::Or, {"a", "b"}),
                bas("a"), bas("b"), bas("c")},
               "r");
  const auto p = prune(t, {"a", "c"});
  for (const Attack& a : {Attack{}, Attack{"a"}, Attack{"c"}, Attack{"a", "c"}}) {
    EXPECT_EQ(structure_function(p, "r", a), structure_function(t, "r", a));
  }
}

TEST(GateType, RoundTrip) {
  for (auto g : {GateType::Or, GateType::And, GateType::Sand, GateType::Bas}) {
    EXPECT_EQ(parse_gate_type(to_string(g)), g);
  }
  EXPECT_EQ(parse_gate_type("sand"), GateType::Sand);
  EXPECT_FALSE(parse_gate_type("XOR").has_value());
}

// -- at/1 format ----------------------------------------------------------------

TEST(AtFormat, RoundTripIsByteStable) {
  for (const char* name : {"initial_access.at.json", "initial_access_interval.at.json", "wocao_custom.at.json",
                           "dreamjob_custom.at.json"}) {
    const auto text = testing::slurp(testing::fixture(name));
    const auto once = write_at(parse_at(text));
    EXPECT_EQ(write_at(parse_at(once)), once) << name;
  }
}

TEST(AtFormat, ReadsAttributes) {
  const auto doc = read_at_file(testing::fixture("initial_access_interval.at.json"));
  EXPECT_EQ(doc.probability_intervals.at("CVP"), (Interval{0.5, 0.9}));
  const auto pts = read_at_file(testing::fixture("initial_access.at.json"));
  EXPECT_EQ(pts.bounds_for("mincost").at("GVC"), (Interval{11, 11}));
  EXPECT_EQ(pts.bounds_for("maxprob").at("CVE1"), (Interval{0.5, 0.5}));
}

TEST(AtFormat, UnknownFieldsSurvive) {
  const std::string text =
      R"({"format":"at/1","root":"a","note":"x","nodes":[{"id":"a","type":"BAS","colour":"red","prob":1}]})";
  const auto out = write_at(parse_at(text));
  EXPECT_NE(out.find("\"note\""), std::string::npos);
  EXPECT_NE(out.find("\"colour\""), std::string::npos);
}

TEST(AtFormat, Rejections) {
  EXPECT_THROW(parse_at("{"), ParseError);
  EXPECT_THROW(parse_at(R"({"format":"at/2","root":"a","nodes":[]})"), ParseError);
  EXPECT_THROW(parse_at(R"({"format":"at/1","root":"a","nodes":[{"id":"a","type":"NAND"}]})"),
               ParseError);
  // both prob and prob_interval
  EXPECT_THROW(
      parse_at(
          R"({"format":"at/1","root":"a","nodes":[{"id":"a","type":"BAS","prob":0.5,"prob_interval":[0.1,0.2]}]})"),
      ParseError);
  // probability on a gate
  EXPECT_THROW(
      parse_at(
          R"({"format":"at/1","root":"g","nodes":[{"id":"g","type":"OR","children":["a"],"prob":0.5},{"id":"a","type":"BAS"}]})"),
      ParseError);
  const auto broken = read_at_file(testing::fixture("broken.at.json"));
  EXPECT_FALSE(broken.tree.valid());
}

}  // namespace
}  // namespace atq
