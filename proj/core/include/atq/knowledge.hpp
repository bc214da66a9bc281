// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace atq {

struct Tactic {
  std::string id;
  std::string name;
};

struct Technique {
  std::string id;
  std::string name;
  std::optional<std::string> parent;  // set for subtechniques
  std::vector<std::string> tactics;
};

struct Usage {
  std::string tactic;
  std::string technique;
  auto operator<=>(const Usage&) const = default;
};

struct Campaign {
  std::string id;
  std::string name;
  std::vector<Usage> uses;
};

/// Tactic ids of the MITRE Enterprise matrix, Reconnaissance to Impact.
const std::vector<std::string>& enterprise_tactic_order();

/// Versioned record of tactics, techniques and per-campaign usage.
///
/// The constructor checks referential integrity and the two-level technique
/// hierarchy, and drops repeated usage pairs; violations throw
/// InvariantError naming the offending entry.
class KnowledgeSnapshot {
 public:
  KnowledgeSnapshot(std::string version, std::vector<Tactic> tactics,
                    std::vector<Technique> techniques, std::vector<Campaign> campaigns);

  const std::string& version() const noexcept { return version_; }
  const std::vector<Tactic>& tactics() const noexcept { return tactics_; }
  const std::vector<Technique>& techniques() const noexcept { return techniques_; }
  const std::vector<Campaign>& campaigns() const noexcept { return campaigns_; }

  bool has_tactic(std::string_view id) const { return tactic_index_.count(id) > 0; }
  bool has_technique(std::string_view id) const { return technique_index_.count(id) > 0; }
  bool has_campaign(std::string_view id) const { return campaign_index_.count(id) > 0; }

  // These throw UnknownEntityError.
  const Tactic& tactic(std::string_view id) const;
  const Technique& technique(std::string_view id) const;
  const Campaign& campaign(std::string_view id) const;
  std::size_t tactic_rank(std::string_view id) const;

  /// Subtechniques of `parent`, in declaration order.
  const std::vector<std::string>& subtechniques(std::string_view parent) const;
  /// Subtechniques of `parent` tagged with `tactic`.
  std::vector<std::string> subtechniques_for(std::string_view parent,
                                             std::string_view tactic) const;

  friend bool operator==(const KnowledgeSnapshot& a, const KnowledgeSnapshot& b);

 private:
  std::string version_;
  std::vector<Tactic> tactics_;
  std::vector<Technique> techniques_;
  std::vector<Campaign> campaigns_;
  std::map<std::string, std::size_t, std::less<>> tactic_index_;
  std::map<std::string, std::size_t, std::less<>> technique_index_;
  std::map<std::string, std::size_t, std::less<>> campaign_index_;
  std::map<std::string, std::vector<std::string>, std::less<>> children_;
};

/// Reads the "snapshot/1" JSON format. Throws ParseError or InvariantError.
KnowledgeSnapshot parse_snapshot(std::string_view text);
KnowledgeSnapshot read_snapshot_file(const std::filesystem::path& path);
std::string write_snapshot(const KnowledgeSnapshot& snapshot);
void write_snapshot_file(const std::filesystem::path& path, const KnowledgeSnapshot& snapshot);

/// Leaf techniques a campaign used for one tactic, after resolving
/// granularity per parent technique:
///  - only subtechniques listed: those subtechniques;
///  - only the parent listed: every subtechnique of it tagged with the tactic;
///  - parent and some subtechniques listed: the listed subtechniques;
///  - a technique without subtechniques for the tactic maps to itself.
std::set<std::string> normalize_usage(const KnowledgeSnapshot& snapshot,
                                      std::string_view campaign, std::string_view tactic);

struct TechniqueTactic {
  std::string technique;
  std::string tactic;
  auto operator<=>(const TechniqueTactic&) const = default;
};

/// Relative frequency of each leaf technique among all normalised usages
/// recorded for a tactic, pooled across campaigns.
class ProbMatrix {
 public:
  ProbMatrix() = default;

  bool observed(std::string_view tactic) const { return totals_.count(tactic) > 0; }
  /// Throws UnknownEntityError when no campaign used the tactic.
  double probability(std::string_view technique, std::string_view tactic) const;
  std::size_t count(std::string_view technique, std::string_view tactic) const;
  std::size_t total(std::string_view tactic) const;

  const std::map<TechniqueTactic, std::size_t>& counts() const noexcept { return counts_; }

  /// "technique,tactic,probability" rows for every non-zero entry, tactics in
  /// snapshot order, 12 significant digits.
  std::string to_csv(const KnowledgeSnapshot& snapshot) const;

 private:
  friend ProbMatrix likelihoods(const KnowledgeSnapshot& snapshot);
  std::map<TechniqueTactic, std::size_t> counts_;
  std::map<std::string, std::size_t, std::less<>> totals_;
};

ProbMatrix likelihoods(const KnowledgeSnapshot& snapshot);

/// Usage flags of one campaign over (leaf technique, tactic); absent = unused.
class CampaignMatrix {
 public:
  CampaignMatrix() = default;
  explicit CampaignMatrix(std::set<TechniqueTactic> used) : used_(std::move(used)) {}

  bool used(std::string_view technique, std::string_view tactic) const {
    return used_.count(TechniqueTactic{std::string(technique), std::string(tactic)}) > 0;
  }
  void mark(std::string technique, std::string tactic) {
    used_.insert({std::move(technique), std::move(tactic)});
  }
  void clear(std::string_view technique, std::string_view tactic) {
    used_.erase(TechniqueTactic{std::string(technique), std::string(tactic)});
  }
  bool empty() const noexcept { return used_.empty(); }
  std::size_t size() const noexcept { return used_.size(); }
  const std::set<TechniqueTactic>& entries() const noexcept { return used_; }

 private:
  std::set<TechniqueTactic> used_;
};

CampaignMatrix campaign_matrix(const KnowledgeSnapshot& snapshot, std::string_view campaign);

}  // namespace atq
