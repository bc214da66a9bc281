// SPDX-License-Identifier: Apache-2.0
#include "atq/stix.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "atq/error.hpp"
#include "io_util.hpp"

namespace atq {

using Json = nlohmann::json;

namespace {

constexpr std::string_view kVersionProperty = "x_atq_snapshot_version";

std::string slug(std::string_view text) {
  std::string out;
  bool dash = false;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (dash && !out.empty()) out += '-';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      dash = false;
    } else if (c != '&' && c != '\'') {
      dash = true;
    }
  }
  return out;
}

bool is_true(const Json& obj, const char* key) {
  return obj.contains(key) && obj[key].is_boolean() && obj[key].get<bool>();
}

std::string string_or(const Json& obj, const char* key, std::string fallback = {}) {
  if (obj.contains(key) && obj[key].is_string()) return obj[key].get<std::string>();
  return fallback;
}

std::optional<std::string> attack_id(const Json& obj) {
  if (!obj.contains("external_references") || !obj["external_references"].is_array()) {
    return std::nullopt;
  }
  for (const auto& ref : obj["external_references"]) {
    if (string_or(ref, "source_name") == "mitre-attack" && ref.contains("external_id")) {
      return string_or(ref, "external_id");
    }
  }
  return std::nullopt;
}

std::string derive_version(const Json* collection) {
  if (!collection) return "stix-import";
  auto pinned = string_or(*collection, std::string(kVersionProperty).c_str());
  if (!pinned.empty()) return pinned;
  auto name = string_or(*collection, "name", "stix");
  auto version = string_or(*collection, "x_mitre_version");
  std::string lowered = slug(name);
  std::string base = lowered.find("enterprise") != std::string::npos ? "mitre-enterprise" : lowered;
  return version.empty() ? base : base + "-v" + version;
}

struct RawTechnique {
  std::string id;
  std::string name;
  std::vector<std::string> phases;
};

}  // namespace

StixImport import_stix(std::string_view text) {
  Json bundle;
  try {
    bundle = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("STIX bundle is not valid JSON: ") + e.what());
  }
  if (!bundle.is_object() || !bundle.contains("objects") || !bundle["objects"].is_array()) {
    throw ParseError("STIX bundle: expected an object with an \"objects\" array");
  }

  std::vector<std::string> warnings;
  std::map<std::string, const Json*> by_ref;
  const Json* collection = nullptr;
  const Json* matrix = nullptr;
  std::size_t index = 0;
  for (const auto& obj : bundle["objects"]) {
    const auto where = "objects[" + std::to_string(index++) + "]";
    if (!obj.is_object() || !obj.contains("type") || !obj.contains("id")) {
      throw ParseError("STIX bundle: " + where + " lacks \"type\" or \"id\"");
    }
    by_ref[string_or(obj, "id")] = &obj;
    auto type = string_or(obj, "type");
    if (type == "x-mitre-collection" && !collection) collection = &obj;
    if (type == "x-mitre-matrix" && !matrix) matrix = &obj;
  }

  auto skip = [](const Json& obj) { return is_true(obj, "revoked") || is_true(obj, "x_mitre_deprecated"); };

  // Tactics, keyed by kill-chain shortname.
  std::map<std::string, Tactic> tactic_by_ref;
  std::map<std::string, std::string> tactic_by_shortname;
  std::vector<std::string> appearance;
  for (const auto& obj : bundle["objects"]) {
    if (string_or(obj, "type") != "x-mitre-tactic" || skip(obj)) continue;
    auto id = attack_id(obj);
    if (!id) {
      warnings.push_back("tactic " + string_or(obj, "id") + " has no ATT&CK id; skipped");
      continue;
    }
    Tactic t{*id, string_or(obj, "name", *id)};
    tactic_by_shortname[string_or(obj, "x_mitre_shortname", slug(t.name))] = t.id;
    tactic_by_ref[string_or(obj, "id")] = t;
    appearance.push_back(t.id);
  }

  std::vector<std::string> order;
  const auto& enterprise = enterprise_tactic_order();
  bool all_enterprise = !appearance.empty() && std::all_of(appearance.begin(), appearance.end(), [&](const std::string& id) {
    return std::find(enterprise.begin(), enterprise.end(), id) != enterprise.end();
  });
  if (all_enterprise) {
    for (const auto& id : enterprise) {
      if (std::find(appearance.begin(), appearance.end(), id) != appearance.end()) order.push_back(id);
    }
  } else if (matrix && matrix->contains("tactic_refs")) {
    for (const auto& ref : (*matrix)["tactic_refs"]) {
      auto it = tactic_by_ref.find(ref.get<std::string>());
      if (it != tactic_by_ref.end()) order.push_back(it->second.id);
    }
    for (const auto& id : appearance) {
      if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
    }
  } else {
    order = appearance;
  }
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  std::map<std::string, std::string> tactic_names;
  for (const auto& [ref, t] : tactic_by_ref) tactic_names[t.id] = t.name;

  // Techniques.
  std::map<std::string, RawTechnique> technique_by_ref;
  std::map<std::string, std::string> parent_of;  // ATT&CK id -> parent ATT&CK id
  std::set<std::string> skipped_refs;
  for (const auto& obj : bundle["objects"]) {
    if (string_or(obj, "type") != "attack-pattern") continue;
    if (skip(obj)) {
      skipped_refs.insert(string_or(obj, "id"));
      continue;
    }
    auto id = attack_id(obj);
    if (!id) {
      warnings.push_back("attack-pattern " + string_or(obj, "id") + " has no ATT&CK id; skipped");
      skipped_refs.insert(string_or(obj, "id"));
      continue;
    }
    RawTechnique t{*id, string_or(obj, "name", *id), {}};
    if (obj.contains("kill_chain_phases")) {
      for (const auto& phase : obj["kill_chain_phases"]) {
        auto name = string_or(phase, "phase_name");
        auto it = tactic_by_shortname.find(name);
        if (it == tactic_by_shortname.end()) {
          warnings.push_back("technique " + *id + ": unknown kill-chain phase '" + name + "' ignored");
          continue;
        }
        if (std::find(t.phases.begin(), t.phases.end(), it->second) == t.phases.end()) {
          t.phases.push_back(it->second);
        }
      }
    }
    std::sort(t.phases.begin(), t.phases.end(),
              [&](const std::string& a, const std::string& b) { return rank[a] < rank[b]; });
    if (auto dot = id->find('.'); dot != std::string::npos) parent_of[*id] = id->substr(0, dot);
    technique_by_ref[string_or(obj, "id")] = std::move(t);
  }

  // Relationships.
  std::map<std::string, std::set<std::string>> uses_by_campaign_ref;
  for (const auto& obj : bundle["objects"]) {
    if (string_or(obj, "type") != "relationship" || skip(obj)) continue;
    auto kind = string_or(obj, "relationship_type");
    auto source = string_or(obj, "source_ref");
    auto target = string_or(obj, "target_ref");
    auto rel_id = string_or(obj, "id");
    if (kind == "subtechnique-of") {
      auto s = technique_by_ref.find(source);
      auto t = technique_by_ref.find(target);
      if (s == technique_by_ref.end() || t == technique_by_ref.end()) {
        if (skipped_refs.count(source) || skipped_refs.count(target)) continue;
        throw InvariantError("relationship " + rel_id + " references missing object '" +
                             (s == technique_by_ref.end() ? source : target) + "'");
      }
      parent_of[s->second.id] = t->second.id;
      continue;
    }
    if (kind != "uses" || source.rfind("campaign--", 0) != 0) continue;
    if (!by_ref.count(source)) {
      throw InvariantError("relationship " + rel_id + " references missing object '" + source + "'");
    }
    if (target.rfind("attack-pattern--", 0) != 0) continue;
    if (!by_ref.count(target)) {
      throw InvariantError("relationship " + rel_id + " references missing object '" + target + "'");
    }
    if (skipped_refs.count(target)) continue;
    uses_by_campaign_ref[source].insert(target);
  }

  std::vector<Tactic> tactics;
  for (const auto& id : order) tactics.push_back({id, tactic_names[id]});

  std::map<std::string, Technique> techniques;  // sorted by ATT&CK id
  for (const auto& [ref, raw] : technique_by_ref) {
    Technique t{raw.id, raw.name, std::nullopt, raw.phases};
    if (auto it = parent_of.find(raw.id); it != parent_of.end()) t.parent = it->second;
    techniques.emplace(raw.id, std::move(t));
  }
  for (auto& [id, t] : techniques) {
    if (t.parent && !techniques.count(*t.parent)) {
      warnings.push_back("subtechnique " + id + ": parent " + *t.parent + " missing; kept as top-level");
      t.parent.reset();
    }
  }

  std::map<std::string, Campaign> campaigns;
  for (const auto& obj : bundle["objects"]) {
    if (string_or(obj, "type") != "campaign" || skip(obj)) continue;
    auto ref = string_or(obj, "id");
    auto id = attack_id(obj).value_or(ref);
    Campaign c{id, string_or(obj, "name", id), {}};
    std::vector<Usage> uses;
    for (const auto& target : uses_by_campaign_ref[ref]) {
      const auto& raw = technique_by_ref.at(target);
      if (raw.phases.empty()) {
        warnings.push_back("campaign " + id + ": technique " + raw.id + " has no tactic; usage dropped");
        continue;
      }
      if (raw.phases.size() > 1) {
        std::string list;
        for (const auto& p : raw.phases) list += (list.empty() ? "" : ", ") + p;
        warnings.push_back("campaign " + id + ": technique " + raw.id + " is tagged with " +
                           std::to_string(raw.phases.size()) + " tactics (" + list +
                           "); usage recorded for each");
      }
      for (const auto& tactic : raw.phases) uses.push_back({tactic, raw.id});
    }
    std::sort(uses.begin(), uses.end(), [&](const Usage& a, const Usage& b) {
      return rank[a.tactic] != rank[b.tactic] ? rank[a.tactic] < rank[b.tactic]
                                              : a.technique < b.technique;
    });
    c.uses = std::move(uses);
    if (!campaigns.emplace(id, std::move(c)).second) {
      throw InvariantError("duplicate campaign id '" + id + "'");
    }
  }
  if (campaigns.empty()) throw InvariantError("STIX bundle contains no campaign objects");

  std::vector<Technique> technique_list;
  for (auto& [id, t] : techniques) technique_list.push_back(std::move(t));
  std::vector<Campaign> campaign_list;
  for (auto& [id, c] : campaigns) campaign_list.push_back(std::move(c));

  return StixImport{KnowledgeSnapshot(derive_version(collection), std::move(tactics),
                                      std::move(technique_list), std::move(campaign_list)),
                    std::move(warnings)};
}

StixImport import_stix_file(const std::filesystem::path& path) {
  return import_stix(detail::read_text(path));
}

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string stix_id(std::string_view type, std::string_view key) {
  std::string material = std::string(type) + "|" + std::string(key);
  auto a = fnv1a(material, 0xcbf29ce484222325ULL);
  auto b = fnv1a(material, 0x84222325cbf29ce4ULL);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%08x-%04x-4%03x-8%03x-%012llx",
                static_cast<unsigned>(a >> 32), static_cast<unsigned>((a >> 16) & 0xffff),
                static_cast<unsigned>(a & 0xfff), static_cast<unsigned>((b >> 48) & 0xfff),
                static_cast<unsigned long long>(b & 0xffffffffffffULL));
  return std::string(type) + "--" + buf;
}

Json external(std::string_view id) {
  return Json::array({{{"source_name", "mitre-attack"}, {"external_id", id}}});
}

}  // namespace

std::string export_stix(const KnowledgeSnapshot& snapshot) {
  Json objects = Json::array();
  std::map<std::string, std::string> shortname;
  for (const auto& t : snapshot.tactics()) shortname[t.id] = slug(t.name);

  Json collection = {{"type", "x-mitre-collection"},
                     {"id", stix_id("x-mitre-collection", snapshot.version())},
                     {"name", snapshot.version()}};
  collection[std::string(kVersionProperty)] = snapshot.version();
  objects.push_back(std::move(collection));

  Json tactic_refs = Json::array();
  for (const auto& t : snapshot.tactics()) tactic_refs.push_back(stix_id("x-mitre-tactic", t.id));
  objects.push_back({{"type", "x-mitre-matrix"},
                     {"id", stix_id("x-mitre-matrix", snapshot.version())},
                     {"name", "matrix"},
                     {"tactic_refs", std::move(tactic_refs)}});

  for (const auto& t : snapshot.tactics()) {
    objects.push_back({{"type", "x-mitre-tactic"},
                       {"id", stix_id("x-mitre-tactic", t.id)},
                       {"name", t.name},
                       {"x_mitre_shortname", shortname[t.id]},
                       {"external_references", external(t.id)}});
  }
  for (const auto& t : snapshot.techniques()) {
    Json phases = Json::array();
    for (const auto& tactic : t.tactics) {
      phases.push_back({{"kill_chain_name", "mitre-attack"}, {"phase_name", shortname[tactic]}});
    }
    objects.push_back({{"type", "attack-pattern"},
                       {"id", stix_id("attack-pattern", t.id)},
                       {"name", t.name},
                       {"x_mitre_is_subtechnique", t.parent.has_value()},
                       {"kill_chain_phases", std::move(phases)},
                       {"external_references", external(t.id)}});
    if (t.parent) {
      objects.push_back({{"type", "relationship"},
                         {"id", stix_id("relationship", t.id + ">" + *t.parent)},
                         {"relationship_type", "subtechnique-of"},
                         {"source_ref", stix_id("attack-pattern", t.id)},
                         {"target_ref", stix_id("attack-pattern", *t.parent)}});
    }
  }
  for (const auto& c : snapshot.campaigns()) {
    objects.push_back({{"type", "campaign"},
                       {"id", stix_id("campaign", c.id)},
                       {"name", c.name},
                       {"external_references", external(c.id)}});
    std::set<std::string> used;
    for (const auto& u : c.uses) used.insert(u.technique);
    for (const auto& technique : used) {
      objects.push_back({{"type", "relationship"},
                         {"id", stix_id("relationship", c.id + ">" + technique)},
                         {"relationship_type", "uses"},
                         {"source_ref", stix_id("campaign", c.id)},
                         {"target_ref", stix_id("attack-pattern", technique)}});
    }
  }

  Json bundle = {{"type", "bundle"},
                 {"id", stix_id("bundle", snapshot.version())},
                 {"objects", std::move(objects)}};
  return bundle.dump(2) + "\n";
}

}  // namespace atq
