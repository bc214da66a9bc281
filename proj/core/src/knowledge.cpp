// SPDX-License-Identifier: Apache-2.0
#include "atq/knowledge.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atq/error.hpp"
#include "io_util.hpp"

namespace atq {

using Json = nlohmann::ordered_json;

const std::vector<std::string>& enterprise_tactic_order() {
  static const std::vector<std::string> order{
      "TA0043",  // Reconnaissance
      "TA0042",  // Resource Development
      "TA0001",  // Initial Access
      "TA0002",  // Execution
      "TA0003",  // Persistence
      "TA0004",  // Privilege Escalation
      "TA0005",  // Defense Evasion
      "TA0006",  // Credential Access
      "TA0007",  // Discovery
      "TA0008",  // Lateral Movement
      "TA0009",  // Collection
      "TA0011",  // Command and Control
      "TA0010",  // Exfiltration
      "TA0040",  // Impact
  };
  return order;
}

KnowledgeSnapshot::KnowledgeSnapshot(std::string version, std::vector<Tactic> tactics,
                                     std::vector<Technique> techniques,
                                     std::vector<Campaign> campaigns)
    : version_(std::move(version)),
      tactics_(std::move(tactics)),
      techniques_(std::move(techniques)),
      campaigns_(std::move(campaigns)) {
  if (version_.empty()) throw InvariantError("snapshot: empty version string");

  for (std::size_t i = 0; i < tactics_.size(); ++i) {
    const auto& t = tactics_[i];
    if (t.id.empty()) throw InvariantError("tactics[" + std::to_string(i) + "]: empty id");
    if (!tactic_index_.emplace(t.id, i).second) {
      throw InvariantError("tactics[" + std::to_string(i) + "]: duplicate tactic id '" + t.id + "'");
    }
  }
  for (std::size_t i = 0; i < techniques_.size(); ++i) {
    const auto& t = techniques_[i];
    const auto where = "techniques[" + std::to_string(i) + "] '" + t.id + "'";
    if (t.id.empty()) throw InvariantError(where + ": empty id");
    if (!technique_index_.emplace(t.id, i).second) {
      throw InvariantError(where + ": duplicate technique id");
    }
    for (const auto& tactic : t.tactics) {
      if (!has_tactic(tactic)) {
        throw InvariantError(where + ": references undeclared tactic '" + tactic + "'");
      }
    }
  }
  for (const auto& t : techniques_) {
    if (!t.parent) continue;
    const auto where = "technique '" + t.id + "'";
    if (*t.parent == t.id) throw InvariantError(where + ": is its own parent");
    if (!has_technique(*t.parent)) {
      throw InvariantError(where + ": parent '" + *t.parent + "' is not declared");
    }
    if (technique(*t.parent).parent) {
      throw InvariantError(where + ": parent '" + *t.parent +
                           "' is itself a subtechnique (hierarchy has two levels)");
    }
    children_[*t.parent].push_back(t.id);
  }
  for (std::size_t i = 0; i < campaigns_.size(); ++i) {
    auto& c = campaigns_[i];
    const auto where = "campaigns[" + std::to_string(i) + "] '" + c.id + "'";
    if (c.id.empty()) throw InvariantError(where + ": empty id");
    if (!campaign_index_.emplace(c.id, i).second) {
      throw InvariantError(where + ": duplicate campaign id");
    }
    std::set<Usage> seen;
    std::vector<Usage> unique;
    for (const auto& u : c.uses) {
      const auto pair = "usage (" + u.tactic + ", " + u.technique + ")";
      if (!has_tactic(u.tactic)) {
        throw InvariantError(where + ": " + pair + " references undeclared tactic '" + u.tactic + "'");
      }
      if (!has_technique(u.technique)) {
        throw InvariantError(where + ": " + pair + " references undeclared technique '" +
                             u.technique + "'");
      }
      const auto& tags = technique(u.technique).tactics;
      if (std::find(tags.begin(), tags.end(), u.tactic) == tags.end()) {
        throw InvariantError(where + ": " + pair + " uses a technique not tagged with that tactic");
      }
      if (seen.insert(u).second) unique.push_back(u);
    }
    c.uses = std::move(unique);
  }
}

const Tactic& KnowledgeSnapshot::tactic(std::string_view id) const {
  auto it = tactic_index_.find(id);
  if (it == tactic_index_.end()) throw UnknownEntityError("unknown tactic '" + std::string(id) + "'");
  return tactics_[it->second];
}

const Technique& KnowledgeSnapshot::technique(std::string_view id) const {
  auto it = technique_index_.find(id);
  if (it == technique_index_.end()) {
    throw UnknownEntityError("unknown technique '" + std::string(id) + "'");
  }
  return techniques_[it->second];
}

const Campaign& KnowledgeSnapshot::campaign(std::string_view id) const {
  auto it = campaign_index_.find(id);
  if (it == campaign_index_.end()) {
    throw UnknownEntityError("unknown campaign '" + std::string(id) + "'");
  }
  return campaigns_[it->second];
}

std::size_t KnowledgeSnapshot::tactic_rank(std::string_view id) const {
  auto it = tactic_index_.find(id);
  if (it == tactic_index_.end()) throw UnknownEntityError("unknown tactic '" + std::string(id) + "'");
  return it->second;
}

const std::vector<std::string>& KnowledgeSnapshot::subtechniques(std::string_view parent) const {
  static const std::vector<std::string> none;
  auto it = children_.find(parent);
  return it == children_.end() ? none : it->second;
}

std::vector<std::string> KnowledgeSnapshot::subtechniques_for(std::string_view parent,
                                                              std::string_view tactic) const {
  std::vector<std::string> out;
  for (const auto& sub : subtechniques(parent)) {
    const auto& tags = technique(sub).tactics;
    if (std::find(tags.begin(), tags.end(), tactic) != tags.end()) out.push_back(sub);
  }
  return out;
}

bool operator==(const KnowledgeSnapshot& a, const KnowledgeSnapshot& b) {
  auto tactics_eq = [](const Tactic& x, const Tactic& y) { return x.id == y.id && x.name == y.name; };
  auto techniques_eq = [](const Technique& x, const Technique& y) {
    return x.id == y.id && x.name == y.name && x.parent == y.parent && x.tactics == y.tactics;
  };
  auto campaigns_eq = [](const Campaign& x, const Campaign& y) {
    return x.id == y.id && x.name == y.name && x.uses == y.uses;
  };
  return a.version_ == b.version_ &&
         std::equal(a.tactics_.begin(), a.tactics_.end(), b.tactics_.begin(), b.tactics_.end(),
                    tactics_eq) &&
         std::equal(a.techniques_.begin(), a.techniques_.end(), b.techniques_.begin(),
                    b.techniques_.end(), techniques_eq) &&
         std::equal(a.campaigns_.begin(), a.campaigns_.end(), b.campaigns_.begin(),
                    b.campaigns_.end(), campaigns_eq);
}

// ---------------------------------------------------------------------------
// snapshot/1

namespace {

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing \"" + key + "\"");
  }
  return obj[key];
}

const Json& array_member(const Json& obj, const char* key, const std::string& where) {
  const auto& j = member(obj, key, where);
  if (!j.is_array()) throw ParseError(where + "." + key + ": expected an array");
  return j;
}

}  // namespace

KnowledgeSnapshot parse_snapshot(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("snapshot: top level must be an object");
  if (member(root, "format", "snapshot") != "snapshot/1") {
    throw ParseError("snapshot: \"format\" must be \"snapshot/1\"");
  }

  std::vector<Tactic> tactics;
  std::size_t i = 0;
  for (const auto& j : array_member(root, "tactics", "snapshot")) {
    const auto where = "tactics[" + std::to_string(i++) + "]";
    tactics.push_back({detail::json_string(member(j, "id", where), where + ".id"),
                       detail::json_string(member(j, "name", where), where + ".name")});
  }

  std::vector<Technique> techniques;
  i = 0;
  for (const auto& j : array_member(root, "techniques", "snapshot")) {
    const auto where = "techniques[" + std::to_string(i++) + "]";
    Technique t;
    t.id = detail::json_string(member(j, "id", where), where + ".id");
    t.name = detail::json_string(member(j, "name", where), where + ".name");
    if (j.contains("parent") && !j["parent"].is_null()) {
      t.parent = detail::json_string(j["parent"], where + ".parent");
    }
    for (const auto& tag : array_member(j, "tactics", where)) {
      t.tactics.push_back(detail::json_string(tag, where + ".tactics"));
    }
    techniques.push_back(std::move(t));
  }

  std::vector<Campaign> campaigns;
  i = 0;
  for (const auto& j : array_member(root, "campaigns", "snapshot")) {
    const auto where = "campaigns[" + std::to_string(i++) + "]";
    Campaign c;
    c.id = detail::json_string(member(j, "id", where), where + ".id");
    c.name = detail::json_string(member(j, "name", where), where + ".name");
    std::size_t k = 0;
    for (const auto& u : array_member(j, "uses", where)) {
      const auto uw = where + ".uses[" + std::to_string(k++) + "]";
      c.uses.push_back({detail::json_string(member(u, "tactic", uw), uw + ".tactic"),
                        detail::json_string(member(u, "technique", uw), uw + ".technique")});
    }
    campaigns.push_back(std::move(c));
  }

  return KnowledgeSnapshot(detail::json_string(member(root, "version", "snapshot"), "version"),
                           std::move(tactics), std::move(techniques), std::move(campaigns));
}

KnowledgeSnapshot read_snapshot_file(const std::filesystem::path& path) {
  return parse_snapshot(detail::read_text(path));
}

std::string write_snapshot(const KnowledgeSnapshot& snapshot) {
  Json root = Json::object();
  root["format"] = "snapshot/1";
  root["version"] = snapshot.version();
  Json tactics = Json::array();
  for (const auto& t : snapshot.tactics()) tactics.push_back({{"id", t.id}, {"name", t.name}});
  Json techniques = Json::array();
  for (const auto& t : snapshot.techniques()) {
    Json j = {{"id", t.id}, {"name", t.name}};
    j["parent"] = t.parent ? Json(*t.parent) : Json(nullptr);
    j["tactics"] = t.tactics;
    techniques.push_back(std::move(j));
  }
  Json campaigns = Json::array();
  for (const auto& c : snapshot.campaigns()) {
    Json uses = Json::array();
    for (const auto& u : c.uses) uses.push_back({{"tactic", u.tactic}, {"technique", u.technique}});
    campaigns.push_back({{"id", c.id}, {"name", c.name}, {"uses", std::move(uses)}});
  }
  root["tactics"] = std::move(tactics);
  root["techniques"] = std::move(techniques);
  root["campaigns"] = std::move(campaigns);
  return root.dump(2) + "\n";
}

void write_snapshot_file(const std::filesystem::path& path, const KnowledgeSnapshot& snapshot) {
  detail::write_text(path, write_snapshot(snapshot));
}

// ---------------------------------------------------------------------------
// Likelihoods

std::set<std::string> normalize_usage(const KnowledgeSnapshot& snapshot,
                                      std::string_view campaign, std::string_view tactic) {
  const auto& c = snapshot.campaign(campaign);
  snapshot.tactic(tactic);

  std::set<std::string> listed;
  for (const auto& u : c.uses) {
    if (u.tactic == tactic) listed.insert(u.technique);
  }

  std::set<std::string> out;
  for (const auto& id : listed) {
    const auto& t = snapshot.technique(id);
    if (t.parent) {
      out.insert(id);  // fine-grained; also covers the mixed case
      continue;
    }
    auto subs = snapshot.subtechniques_for(id, tactic);
    if (subs.empty()) {
      out.insert(id);
      continue;
    }
    bool any_listed = std::any_of(subs.begin(), subs.end(),
                                  [&](const std::string& s) { return listed.count(s) > 0; });
    if (!any_listed) out.insert(subs.begin(), subs.end());  // coarse-grained fan-out
  }
  return out;
}

double ProbMatrix::probability(std::string_view technique, std::string_view tactic) const {
  auto total_it = totals_.find(tactic);
  if (total_it == totals_.end()) {
    throw UnknownEntityError("no campaign records tactic '" + std::string(tactic) + "'");
  }
  return static_cast<double>(count(technique, tactic)) / static_cast<double>(total_it->second);
}

std::size_t ProbMatrix::count(std::string_view technique, std::string_view tactic) const {
  auto it = counts_.find(TechniqueTactic{std::string(technique), std::string(tactic)});
  return it == counts_.end() ? 0 : it->second;
}

std::size_t ProbMatrix::total(std::string_view tactic) const {
  auto it = totals_.find(tactic);
  return it == totals_.end() ? 0 : it->second;
}

std::string ProbMatrix::to_csv(const KnowledgeSnapshot& snapshot) const {
  std::ostringstream out;
  out << "technique,tactic,probability\n";
  char buf[64];
  for (const auto& tactic : snapshot.tactics()) {
    if (!observed(tactic.id)) continue;
    for (const auto& technique : snapshot.techniques()) {
      auto n = count(technique.id, tactic.id);
      if (n == 0) continue;
      std::snprintf(buf, sizeof buf, "%.12g", probability(technique.id, tactic.id));
      out << technique.id << ',' << tactic.id << ',' << buf << '\n';
    }
  }
  return out.str();
}

ProbMatrix likelihoods(const KnowledgeSnapshot& snapshot) {
  ProbMatrix p;
  for (const auto& c : snapshot.campaigns()) {
    std::set<std::string> tactics;
    for (const auto& u : c.uses) tactics.insert(u.tactic);
    for (const auto& tactic : tactics) {
      for (const auto& leaf : normalize_usage(snapshot, c.id, tactic)) {
        ++p.counts_[{leaf, tactic}];
        ++p.totals_[tactic];
      }
    }
  }
  return p;
}

CampaignMatrix campaign_matrix(const KnowledgeSnapshot& snapshot, std::string_view campaign) {
  const auto& c = snapshot.campaign(campaign);
  std::set<std::string> tactics;
  for (const auto& u : c.uses) tactics.insert(u.tactic);
  CampaignMatrix m;
  for (const auto& tactic : tactics) {
    for (const auto& leaf : normalize_usage(snapshot, c.id, tactic)) m.mark(leaf, tactic);
  }
  return m;
}

}  // namespace atq
