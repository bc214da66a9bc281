// SPDX-License-Identifier: Apache-2.0
#include "atq/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "atq/error.hpp"

namespace atq {

std::string_view to_string(Difficulty difficulty) noexcept {
  switch (difficulty) {
    case Difficulty::Easy:
      return "easy";
    case Difficulty::Default:
      return "default";
    case Difficulty::Hard:
      return "hard";
  }
  return "default";
}

std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto d : kDifficulties) {
    if (lower == to_string(d)) return d;
  }
  return std::nullopt;
}

std::string template_node_id(std::string_view technique, std::string_view tactic) {
  std::string id(technique);
  id += '@';
  id += tactic;
  return id;
}

TemplateTree build_template(const KnowledgeSnapshot& snapshot, Difficulty difficulty) {
  const GateType tactic_gate = difficulty == Difficulty::Hard      ? GateType::And
                               : difficulty == Difficulty::Default ? GateType::Sand
                                                                   : GateType::Or;
  const GateType technique_gate = difficulty == Difficulty::Hard ? GateType::And : GateType::Or;

  std::vector<Node> nodes;
  const GateType root_gate = difficulty == Difficulty::Hard ? GateType::And : GateType::Sand;
  Node root{std::string(kTemplateRoot), root_gate, {}, "Campaign", std::nullopt, std::nullopt};
  nodes.push_back(root);

  for (const auto& tactic : snapshot.tactics()) {
    Node gate{tactic.id, tactic_gate, {}, tactic.name, tactic.id, std::nullopt};
    std::vector<Node> below;
    for (const auto& technique : snapshot.techniques()) {
      if (technique.parent) continue;
      auto subs = snapshot.subtechniques_for(technique.id, tactic.id);
      bool tagged = std::find(technique.tactics.begin(), technique.tactics.end(), tactic.id) !=
                    technique.tactics.end();
      if (!tagged && subs.empty()) continue;

      Node t{template_node_id(technique.id, tactic.id), GateType::Bas, {}, technique.name,
             tactic.id, technique.id};
      std::vector<Node> leaves;
      if (!subs.empty()) {
        t.type = technique_gate;
        for (const auto& sub : subs) {
          Node leaf{template_node_id(sub, tactic.id), GateType::Bas, {},
                    snapshot.technique(sub).name, tactic.id, sub};
          t.children.push_back(leaf.id);
          leaves.push_back(std::move(leaf));
        }
      }
      gate.children.push_back(t.id);
      below.push_back(std::move(t));
      for (auto& leaf : leaves) below.push_back(std::move(leaf));
    }
    if (gate.children.empty()) continue;
    nodes.front().children.push_back(gate.id);
    nodes.push_back(std::move(gate));
    for (auto& n : below) nodes.push_back(std::move(n));
  }

  TemplateTree out{AttackTree(std::move(nodes), std::string(kTemplateRoot)), difficulty};
  out.tree.require_valid();
  return out;
}

std::set<NodeId> used_leaves(const TemplateTree& tmpl, const CampaignMatrix& campaign) {
  std::set<NodeId> out;
  for (const auto& n : tmpl.tree.nodes()) {
    if (n.is_leaf() && n.tactic && n.technique && campaign.used(*n.technique, *n.tactic)) {
      out.insert(n.id);
    }
  }
  return out;
}

Attribution leaf_probabilities(const AttackTree& tree, const ProbMatrix& p) {
  Attribution out;
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf() && n.tactic && n.technique && p.observed(*n.tactic)) {
      out.set(n.id, p.probability(*n.technique, *n.tactic));
    }
  }
  return out;
}

namespace {

// Absent subtrees return nullopt and drop out of their parent's fold, which
// is the same as handing back the parent's neutral element.
std::optional<double> sec(const AttackTree& tree, std::size_t v, const CampaignMatrix& campaign,
                          const ProbMatrix& p) {
  const Node& n = tree.at(v);
  if (n.is_leaf()) {
    if (!n.tactic || !n.technique || !campaign.used(*n.technique, *n.tactic)) return std::nullopt;
    return neg_log(p.probability(*n.technique, *n.tactic));
  }
  std::optional<double> acc;
  for (auto c : tree.child_indices(v)) {
    auto x = sec(tree, c, campaign, p);
    if (!x) continue;
    if (!acc) {
      acc = x;
    } else if (n.type == GateType::Or) {
      acc = std::min(*acc, *x);
    } else {
      acc = *acc + *x;
    }
  }
  return acc;
}

}  // namespace

double campaign_index(const TemplateTree& tmpl, const CampaignMatrix& campaign,
                      const ProbMatrix& p) {
  auto x = sec(tmpl.tree, tmpl.tree.root_index(), campaign, p);
  if (!x) throw InvariantError("campaign has no recorded usages; security index undefined");
  return *x;
}

double campaign_index(const KnowledgeSnapshot& snapshot, std::string_view campaign,
                      Difficulty difficulty) {
  return Scorer(snapshot).index(campaign, difficulty);
}

AtDocument instantiate(const KnowledgeSnapshot& snapshot, std::string_view campaign,
                       Difficulty difficulty) {
  auto tmpl = build_template(snapshot, difficulty);
  auto used = used_leaves(tmpl, campaign_matrix(snapshot, campaign));
  if (used.empty()) {
    throw InvariantError("campaign '" + std::string(campaign) + "' has no recorded usages");
  }
  AtDocument doc;
  doc.tree = prune(tmpl.tree, used);
  auto p = likelihoods(snapshot);
  doc.probabilities = leaf_probabilities(doc.tree, p);
  doc.extra["snapshot_version"] = snapshot.version();
  doc.extra["campaign"] = std::string(campaign);
  doc.extra["difficulty"] = std::string(to_string(difficulty));
  return doc;
}

Scorer::Scorer(const KnowledgeSnapshot& snapshot)
    : snapshot_(&snapshot),
      p_(likelihoods(snapshot)),
      templates_{build_template(snapshot, Difficulty::Easy),
                 build_template(snapshot, Difficulty::Default),
                 build_template(snapshot, Difficulty::Hard)} {}

const TemplateTree& Scorer::templ(Difficulty difficulty) const {
  return templates_[static_cast<std::size_t>(difficulty)];
}

double Scorer::index(std::string_view campaign, Difficulty difficulty) const {
  auto m = campaign_matrix(*snapshot_, campaign);
  if (m.empty()) {
    throw InvariantError("campaign '" + std::string(campaign) +
                         "' has no recorded usages; security index undefined");
  }
  return campaign_index(templ(difficulty), m, p_);
}

std::optional<double> Scorer::try_index(std::string_view campaign, Difficulty difficulty) const {
  auto m = campaign_matrix(*snapshot_, campaign);
  if (m.empty()) return std::nullopt;
  return campaign_index(templ(difficulty), m, p_);
}

SecurityRange Scorer::range(std::string_view campaign) const {
  return {index(campaign, Difficulty::Easy), index(campaign, Difficulty::Hard)};
}

namespace {

void sort_scores(std::vector<CampaignScore>& rows) {
  std::sort(rows.begin(), rows.end(), [](const CampaignScore& a, const CampaignScore& b) {
    if (a.index.has_value() != b.index.has_value()) return a.index.has_value();
    if (a.index && *a.index != *b.index) return *a.index < *b.index;
    return a.campaign < b.campaign;
  });
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed6(const std::optional<double>& x) {
  if (!x) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *x);
  return buf;
}

}  // namespace

std::vector<CampaignScore> Scorer::compare_all(Difficulty difficulty) const {
  std::vector<CampaignScore> rows;
  for (const auto& c : snapshot_->campaigns()) {
    rows.push_back({c.id, c.name, try_index(c.id, difficulty)});
  }
  sort_scores(rows);
  return rows;
}

SecurityRange security_range(const KnowledgeSnapshot& snapshot, std::string_view campaign) {
  return Scorer(snapshot).range(campaign);
}

std::vector<CampaignScore> compare_all(const KnowledgeSnapshot& snapshot, Difficulty difficulty) {
  return Scorer(snapshot).compare_all(difficulty);
}

std::string compare_csv(const std::vector<CampaignScore>& rows, Difficulty difficulty) {
  std::ostringstream out;
  out << "campaign,name,difficulty,index\n";
  for (const auto& r : rows) {
    out << csv_field(r.campaign) << ',' << csv_field(r.name) << ',' << to_string(difficulty)
        << ',' << fixed6(r.index) << '\n';
  }
  return out.str();
}

std::string plot_csv(const Scorer& scorer) {
  auto rows = scorer.compare_all(Difficulty::Default);
  std::ostringstream out;
  out << "campaign,easy,default,hard\n";
  for (const auto& r : rows) {
    out << csv_field(r.campaign) << ',' << fixed6(scorer.try_index(r.campaign, Difficulty::Easy))
        << ',' << fixed6(r.index) << ','
        << fixed6(scorer.try_index(r.campaign, Difficulty::Hard)) << '\n';
  }
  return out.str();
}

}  // namespace atq
