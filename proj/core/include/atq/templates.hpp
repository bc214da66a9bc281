// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "atq/at_format.hpp"
#include "atq/attack_tree.hpp"
#include "atq/knowledge.hpp"
#include "atq/load.hpp"

namespace atq {

enum class Difficulty { Easy, Default, Hard };

inline constexpr std::array<Difficulty, 3> kDifficulties{Difficulty::Easy, Difficulty::Default,
                                                          Difficulty::Hard};

std::string_view to_string(Difficulty difficulty) noexcept;
/// "easy", "default", "hard" (case-insensitive).
std::optional<Difficulty> parse_difficulty(std::string_view text) noexcept;

/// Full campaign template over a snapshot.
///
///   campaign (AND for hard, else SAND)
///     <tactic>                 AND | SAND | OR   (hard | default | easy)
///       <technique>@<tactic>   BAS, or AND | OR | OR when it has
///         <sub>@<tactic>       subtechniques tagged with the tactic
///
/// Every node below the root carries its tactic, technique nodes also their
/// technique id. Tactics without techniques are left out.
struct TemplateTree {
  AttackTree tree;
  Difficulty difficulty = Difficulty::Default;
};

inline constexpr std::string_view kTemplateRoot = "campaign";
std::string template_node_id(std::string_view technique, std::string_view tactic);

TemplateTree build_template(const KnowledgeSnapshot& snapshot, Difficulty difficulty);

/// Template leaves whose (technique, tactic) the campaign used.
std::set<NodeId> used_leaves(const TemplateTree& tmpl, const CampaignMatrix& campaign);

/// p[E, A] for every tagged leaf of `tree` whose tactic was observed.
Attribution leaf_probabilities(const AttackTree& tree, const ProbMatrix& p);

/// Security index of one campaign: AND/SAND sum, OR min, a used leaf gives
/// -ln p[E, A], and any subtree without used leaves is treated as absent
/// (the parent's neutral element). Throws InvariantError when no leaf of the
/// template is used.
double campaign_index(const TemplateTree& tmpl, const CampaignMatrix& campaign,
                      const ProbMatrix& p);
/// Throws UnknownEntityError for an unknown campaign.
double campaign_index(const KnowledgeSnapshot& snapshot, std::string_view campaign,
                      Difficulty difficulty);

/// Pruned, probability-attributed template of one campaign in at/1 form,
/// tagged with "snapshot_version", "campaign" and "difficulty".
AtDocument instantiate(const KnowledgeSnapshot& snapshot, std::string_view campaign,
                       Difficulty difficulty);

struct SecurityRange {
  double easy = 0.0;
  double hard = 0.0;
};

struct CampaignScore {
  std::string campaign;
  std::string name;
  std::optional<double> index;  // empty for campaigns without usages
};

/// Caches the probability matrix and the three templates of a snapshot.
class Scorer {
 public:
  explicit Scorer(const KnowledgeSnapshot& snapshot);

  const KnowledgeSnapshot& snapshot() const noexcept { return *snapshot_; }
  const ProbMatrix& probabilities() const noexcept { return p_; }
  const TemplateTree& templ(Difficulty difficulty) const;

  double index(std::string_view campaign, Difficulty difficulty) const;
  std::optional<double> try_index(std::string_view campaign, Difficulty difficulty) const;
  SecurityRange range(std::string_view campaign) const;
  /// Ascending by index, ties by campaign id, undefined rows last.
  std::vector<CampaignScore> compare_all(Difficulty difficulty) const;

 private:
  const KnowledgeSnapshot* snapshot_;
  ProbMatrix p_;
  std::array<TemplateTree, 3> templates_;
};

SecurityRange security_range(const KnowledgeSnapshot& snapshot, std::string_view campaign);
std::vector<CampaignScore> compare_all(const KnowledgeSnapshot& snapshot, Difficulty difficulty);

/// "campaign,name,difficulty,index" with 6 decimals or "undefined".
std::string compare_csv(const std::vector<CampaignScore>& rows, Difficulty difficulty);
/// "campaign,easy,default,hard" in ascending default order.
std::string plot_csv(const Scorer& scorer);

}  // namespace atq
