// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "atq/error.hpp"
#include "atq/knowledge.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace atq {
namespace {

// TA0001: T1078 (.002, .003), T1190 ; TA0002: T1569 (.001, .002) ; TA0003: T1078 (.003)
KnowledgeSnapshot mitre_like(std::vector<Campaign> campaigns) {
  return KnowledgeSnapshot(
      "unit",
      {{"TA0001", "Initial Access"}, {"TA0002", "Execution"}, {"TA0003", "Persistence"}},
      {{"T1078", "Valid Accounts", std::nullopt, {"TA0001", "TA0003"}},
       {"T1078.002", "Domain Accounts", "T1078", {"TA0001"}},
       {"T1078.003", "Local Accounts", "T1078", {"TA0001", "TA0003"}},
       {"T1190", "Exploit Public-Facing Application", std::nullopt, {"TA0001"}},
       {"T1569", "System Services", std::nullopt, {"TA0002"}},
       {"T1569.001", "Launchctl", "T1569", {"TA0002"}},
       {"T1569.002", "Service Execution", "T1569", {"TA0002"}}},
      std::move(campaigns));
}

// -- snapshot ------------------------------------------------------------------

TEST(Snapshot, TwoTacticsRoundTripsLosslessly) {
  const auto s = read_snapshot_file(testing::fixture("two_tactics.snapshot.json"));
  EXPECT_EQ(s.campaigns().size(), 2U);
  const auto text = write_snapshot(s);
  const auto again = parse_snapshot(text);
  EXPECT_EQ(again, s);
  EXPECT_EQ(write_snapshot(again), text);
}

TEST(Snapshot, EmptyCampaignListIsValid) {
  KnowledgeSnapshot s("v", {{"A1", "a"}}, {{"E1", "e", std::nullopt, {"A1"}}}, {});
  const auto p = likelihoods(s);
  EXPECT_FALSE(p.observed("A1"));
  EXPECT_THROW(p.probability("E1", "A1"), UnknownEntityError);
}

TEST(Snapshot, UndeclaredTechniqueNamesCampaignAndPair) {
  try {
    mitre_like({{"C9", "x", {{"TA0001", "T9999"}}}});
    FAIL() << "accepted a dangling usage";
  } catch (const InvariantError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("C9"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(TA0001, T9999)"), std::string::npos) << msg;
  }
}

TEST(Snapshot, OtherInvariants) {
  EXPECT_THROW(KnowledgeSnapshot("", {}, {}, {}), InvariantError);
  EXPECT_THROW(KnowledgeSnapshot("v", {{"A", "a"}, {"A", "b"}}, {}, {}), InvariantError);
  EXPECT_THROW(KnowledgeSnapshot("v", {{"A", "a"}}, {{"E", "e", std::nullopt, {"B"}}}, {}),
               InvariantError);
  // three levels
  EXPECT_THROW(KnowledgeSnapshot("v", {{"A", "a"}},
                                 {{"E", "e", std::nullopt, {"A"}},
                                  {"E.1", "e1", "E", {"A"}},
                                  {"E.1.1", "e11", "E.1", {"A"}}},
                                 {}),
               InvariantError);
  EXPECT_THROW(KnowledgeSnapshot("v", {{"A", "a"}}, {{"E.1", "e1", "E", {"A"}}}, {}),
               InvariantError);
  // technique not tagged with the tactic of its usage
  EXPECT_THROW(mitre_like({{"C1", "x", {{"TA0002", "T1190"}}}}), InvariantError);
  EXPECT_THROW(mitre_like({{"C1", "x", {}}, {"C1", "y", {}}}), InvariantError);
}

TEST(Snapshot, RepeatedUsagesCollapse) {
  const auto s = mitre_like({{"C1", "x", {{"TA0001", "T1190"}, {"TA0001", "T1190"}}}});
  EXPECT_EQ(s.campaign("C1").uses.size(), 1U);
}

TEST(Snapshot, ParseErrors) {
  EXPECT_THROW(parse_snapshot("[1,"), ParseError);
  EXPECT_THROW(parse_snapshot(R"({"format":"snapshot/2"})"), ParseError);
  EXPECT_THROW(parse_snapshot(R"({"format":"snapshot/1","version":"v","tactics":{}})"), ParseError);
  EXPECT_THROW(read_snapshot_file(testing::fixture("does-not-exist.json")), Error);
}

TEST(Snapshot, Lookups) {
  const auto s = mitre_like({});
  EXPECT_EQ(s.tactic_rank("TA0003"), 2U);
  EXPECT_EQ(s.subtechniques("T1078"), (std::vector<std::string>{"T1078.002", "T1078.003"}));
  EXPECT_EQ(s.subtechniques_for("T1078", "TA0003"), (std::vector<std::string>{"T1078.003"}));
  EXPECT_TRUE(s.subtechniques("T1190").empty());
  EXPECT_THROW(s.technique("T0"), UnknownEntityError);
  EXPECT_THROW(s.campaign("C0"), UnknownEntityError);
  EXPECT_EQ(enterprise_tactic_order().size(), 14U);
  EXPECT_EQ(enterprise_tactic_order().front(), "TA0043");
  EXPECT_EQ(enterprise_tactic_order().back(), "TA0040");
}

// -- normalize_usage -------------------------------------------------------------

TEST(NormalizeUsage, MixedKeepsListedSubtechniques) {
  const auto s = mitre_like({{"C1", "x", {{"TA0001", "T1078"}, {"TA0001", "T1078.002"}}}});
  EXPECT_EQ(normalize_usage(s, "C1", "TA0001"), (std::set<std::string>{"T1078.002"}));
}

TEST(NormalizeUsage, CoarseFansOut) {
  const auto s = mitre_like({{"C1", "x", {{"TA0002", "T1569"}}}});
  EXPECT_EQ(normalize_usage(s, "C1", "TA0002"), (std::set<std::string>{"T1569.001", "T1569.002"}));
}

TEST(NormalizeUsage, CoarseFanOutFollowsTacticTags) {
  const auto s = mitre_like({{"C1", "x", {{"TA0003", "T1078"}}}});
  EXPECT_EQ(normalize_usage(s, "C1", "TA0003"), (std::set<std::string>{"T1078.003"}));
}

TEST(NormalizeUsage, LeafIsItself) {
  const auto s = mitre_like({{"C1", "x", {{"TA0001", "T1190"}}}});
  EXPECT_EQ(normalize_usage(s, "C1", "TA0001"), (std::set<std::string>{"T1190"}));
  EXPECT_TRUE(normalize_usage(s, "C1", "TA0002").empty());
}

TEST(NormalizeUsage, MixedAndFineCoincide) {
  const auto mixed = mitre_like({{"C1", "x", {{"TA0001", "T1078"}, {"TA0001", "T1078.003"}}}});
  const auto fine = mitre_like({{"C1", "x", {{"TA0001", "T1078.003"}}}});
  EXPECT_EQ(normalize_usage(mixed, "C1", "TA0001"), normalize_usage(fine, "C1", "TA0001"));
}

TEST(NormalizeUsage, OnlyLeavesOnRandomSnapshots) {
  testing::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto s = testing::random_snapshot(rng, {});
    for (const auto& c : s.campaigns()) {
      for (const auto& t : s.tactics()) {
        for (const auto& leaf : normalize_usage(s, c.id, t.id)) {
          EXPECT_TRUE(s.subtechniques_for(leaf, t.id).empty()) << leaf;
        }
      }
    }
  }
}

// -- likelihoods -------------------------------------------------------------------

TEST(Likelihoods, TwoTactics) {
  const auto p = likelihoods(read_snapshot_file(testing::fixture("two_tactics.snapshot.json")));
  EXPECT_NEAR(p.probability("E1", "A1"), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.probability("E2", "A1"), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(p.probability("E3", "A1"), 0.0);
  EXPECT_EQ(p.count("E1", "A1"), 2U);
  EXPECT_EQ(p.total("A1"), 3U);
  EXPECT_EQ(p.probability("E2", "A2"), 0.5);
}

TEST(Likelihoods, SingleUsageIsCertain) {
  const auto p = likelihoods(mitre_like({{"C1", "x", {{"TA0001", "T1190"}}}}));
  EXPECT_EQ(p.probability("T1190", "TA0001"), 1.0);
}

TEST(Likelihoods, CoarseEntriesEnterTheDenominator) {
  const auto p = likelihoods(mitre_like(
      {{"C1", "x", {{"TA0002", "T1569"}}}, {"C2", "y", {{"TA0002", "T1569.002"}}}}));
  EXPECT_EQ(p.total("TA0002"), 3U);
  EXPECT_NEAR(p.probability("T1569.002", "TA0002"), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.probability("T1569.001", "TA0002"), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(p.probability("T1569", "TA0002"), 0.0);
}

TEST(Likelihoods, MatchesExactOracleOnRandomSnapshots) {
  testing::Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto s = testing::random_snapshot(rng, {.tactics = 4, .techniques = 8, .campaigns = 10});
    const auto p = likelihoods(s);
    const auto oracle = testing::oracle_likelihoods(s);
    std::size_t nonzero = 0;
    for (const auto& [key, n] : p.counts()) nonzero += n > 0;
    EXPECT_EQ(nonzero, oracle.size());
    for (const auto& [key, r] : oracle) {
      EXPECT_EQ(p.count(key.first, key.second), static_cast<std::size_t>(r.num));
      EXPECT_EQ(p.total(key.second), static_cast<std::size_t>(r.den));
      EXPECT_NEAR(p.probability(key.first, key.second), r.value(), 1e-15);
    }
    // rows add up to one, entries in [0, 1]
    for (const auto& t : s.tactics()) {
      if (!p.observed(t.id)) continue;
      double sum = 0;
      for (const auto& e : s.techniques()) {
        const double v = p.probability(e.id, t.id);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    // every used leaf is positive
    for (const auto& c : s.campaigns()) {
      for (const auto& t : s.tactics()) {
        for (const auto& leaf : normalize_usage(s, c.id, t.id)) {
          EXPECT_GT(p.probability(leaf, t.id), 0.0);
        }
      }
    }
  }
}

TEST(Likelihoods, InvariantToCampaignOrderAndDuplicates) {
  testing::Rng rng(18);
  for (int i = 0; i < 50; ++i) {
    const auto s = testing::random_snapshot(rng, {.campaigns = 6});
    auto campaigns = s.campaigns();
    std::reverse(campaigns.begin(), campaigns.end());
    for (auto& c : campaigns) {
      auto dup = c.uses;
      c.uses.insert(c.uses.end(), dup.rbegin(), dup.rend());
    }
    const KnowledgeSnapshot shuffled(s.version(), s.tactics(), s.techniques(), campaigns);
    EXPECT_EQ(likelihoods(shuffled).counts(), likelihoods(s).counts());
  }
}

TEST(Likelihoods, CsvExport) {
  const auto s = read_snapshot_file(testing::fixture("two_tactics.snapshot.json"));
  EXPECT_EQ(likelihoods(s).to_csv(s),
            "technique,tactic,probability\n"
            "E1,A1,0.666666666667\n"
            "E2,A1,0.333333333333\n"
            "E2,A2,0.5\n"
            "E3,A2,0.5\n");
}

// -- campaign matrix ---------------------------------------------------------------

TEST(CampaignMatrix, Subtechniques) {
  const auto s = read_snapshot_file(testing::fixture("subtechniques.snapshot.json"));
  const auto c = campaign_matrix(s, "C");
  EXPECT_TRUE(c.used("E1", "A1"));
  EXPECT_TRUE(c.used("E2.2", "A1"));
  EXPECT_TRUE(c.used("E2.3", "A1"));
  EXPECT_FALSE(c.used("E2.1", "A1"));
  EXPECT_FALSE(c.used("E3", "A1"));
  EXPECT_EQ(c.size(), 3U);
  EXPECT_THROW(campaign_matrix(s, "nope"), UnknownEntityError);
}

TEST(CampaignMatrix, EmptyAndCoarse) {
  const auto s = mitre_like({{"C0", "empty", {}}, {"C1", "x", {{"TA0002", "T1569"}}}});
  EXPECT_TRUE(campaign_matrix(s, "C0").empty());
  const auto c = campaign_matrix(s, "C1");
  EXPECT_EQ(c.size(), 2U);
  EXPECT_TRUE(c.used("T1569.001", "TA0002"));
  EXPECT_TRUE(c.used("T1569.002", "TA0002"));
}

}  // namespace
}  // namespace atq
