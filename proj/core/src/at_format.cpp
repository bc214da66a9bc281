// SPDX-License-Identifier: Apache-2.0
#include "atq/at_format.hpp"

#include "atq/error.hpp"
#include "atq/metrics.hpp"
#include "io_util.hpp"

namespace atq {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormat = "at/1";

Interval parse_bounds(const Json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 2) throw ParseError(where + ": interval must be [lo, hi]");
    Interval b{detail::json_number(j[0], where), detail::json_number(j[1], where)};
    if (!(b.lo <= b.hi)) throw ParseError(where + ": interval has lo > hi");
    return b;
  }
  double x = detail::json_number(j, where);
  return {x, x};
}

Json bounds_json(const Interval& b) {
  if (b.degenerate()) return detail::number_json<Json>(b.lo);
  return Json::array({detail::number_json<Json>(b.lo), detail::number_json<Json>(b.hi)});
}

}  // namespace

IntervalAttribution AtDocument::bounds_for(std::string_view metric) const {
  if (metric == "maxprob" || metric == "security-index") {
    IntervalAttribution merged = probability_intervals;
    for (const auto& [id, p] : probabilities.values()) merged.set(id, {p, p});
    return metric == "maxprob" ? merged : to_log_domain(merged);
  }
  auto it = attributes.find(metric);
  return it == attributes.end() ? IntervalAttribution{} : it->second;
}

AtDocument parse_at(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("AT file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("AT file: top level must be an object");
  if (!root.contains("format") || root["format"] != kFormat) {
    throw ParseError("AT file: \"format\" must be \"at/1\"");
  }
  if (!root.contains("root")) throw ParseError("AT file: missing \"root\"");
  if (!root.contains("nodes") || !root["nodes"].is_array()) {
    throw ParseError("AT file: \"nodes\" must be an array");
  }

  AtDocument doc;
  for (const auto& [key, value] : root.items()) {
    if (key != "format" && key != "root" && key != "nodes") doc.extra[key] = value;
  }

  std::vector<Node> nodes;
  std::size_t index = 0;
  for (const auto& jn : root["nodes"]) {
    const std::string where = "nodes[" + std::to_string(index++) + "]";
    if (!jn.is_object()) throw ParseError(where + ": expected an object");
    if (!jn.contains("id")) throw ParseError(where + ": missing \"id\"");
    if (!jn.contains("type")) throw ParseError(where + ": missing \"type\"");
    Node n;
    n.id = detail::json_string(jn["id"], where + ".id");
    auto type = parse_gate_type(detail::json_string(jn["type"], where + ".type"));
    if (!type) throw ParseError(where + ": unknown node type " + jn["type"].dump());
    n.type = *type;
    if (jn.contains("children")) {
      if (!jn["children"].is_array()) throw ParseError(where + ".children: expected an array");
      for (const auto& c : jn["children"]) {
        n.children.push_back(detail::json_string(c, where + ".children"));
      }
    }
    if (jn.contains("label")) n.label = detail::json_string(jn["label"], where + ".label");
    if (jn.contains("tactic") && !jn["tactic"].is_null()) {
      n.tactic = detail::json_string(jn["tactic"], where + ".tactic");
    }
    if (jn.contains("technique") && !jn["technique"].is_null()) {
      n.technique = detail::json_string(jn["technique"], where + ".technique");
    }

    const bool has_prob = jn.contains("prob");
    const bool has_interval = jn.contains("prob_interval");
    if (has_prob && has_interval) {
      throw ParseError(where + ": \"prob\" and \"prob_interval\" are mutually exclusive");
    }
    if ((has_prob || has_interval || jn.contains("attrs")) && !n.is_leaf()) {
      throw ParseError(where + ": attributes are only allowed on BAS nodes");
    }
    auto check_prob = [&](double p) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParseError(where + ": probability outside [0,1]");
    };
    if (has_prob) {
      double p = detail::json_number(jn["prob"], where + ".prob");
      check_prob(p);
      doc.probabilities.set(n.id, p);
    }
    if (has_interval) {
      const auto& ji = jn["prob_interval"];
      if (!ji.is_array()) throw ParseError(where + ".prob_interval: expected [lo, hi]");
      auto b = parse_bounds(ji, where + ".prob_interval");
      check_prob(b.lo);
      check_prob(b.hi);
      doc.probability_intervals.set(n.id, b);
    }
    if (jn.contains("attrs")) {
      if (!jn["attrs"].is_object()) throw ParseError(where + ".attrs: expected an object");
      for (const auto& [metric, value] : jn["attrs"].items()) {
        doc.attributes[metric].set(n.id, parse_bounds(value, where + ".attrs." + metric));
      }
    }

    Json rest = Json::object();
    for (const auto& [key, value] : jn.items()) {
      static const std::set<std::string> known{"id",     "type",      "children", "label",
                                               "tactic", "technique", "prob",     "prob_interval",
                                               "attrs"};
      if (!known.count(key)) rest[key] = value;
    }
    if (!rest.empty()) doc.node_extra[n.id] = std::move(rest);
    nodes.push_back(std::move(n));
  }

  doc.tree = AttackTree(std::move(nodes), detail::json_string(root["root"], "root"));
  return doc;
}

AtDocument read_at_file(const std::filesystem::path& path) {
  return parse_at(detail::read_text(path));
}

std::string write_at(const AtDocument& doc) {
  Json root = Json::object();
  root["format"] = kFormat;
  root["root"] = doc.tree.root();
  Json nodes = Json::array();
  for (const auto& n : doc.tree.nodes()) {
    Json jn = Json::object();
    jn["id"] = n.id;
    jn["type"] = to_string(n.type);
    if (!n.label.empty()) jn["label"] = n.label;
    if (!n.is_leaf()) jn["children"] = n.children;
    if (n.tactic) jn["tactic"] = *n.tactic;
    if (n.technique) jn["technique"] = *n.technique;
    if (doc.probabilities.contains(n.id)) {
      jn["prob"] = doc.probabilities.at(n.id);
    } else if (doc.probability_intervals.contains(n.id)) {
      auto b = doc.probability_intervals.at(n.id);
      jn["prob_interval"] = Json::array({b.lo, b.hi});
    }
    Json attrs = Json::object();
    for (const auto& [metric, bounds] : doc.attributes) {
      if (bounds.contains(n.id)) attrs[metric] = bounds_json(bounds.at(n.id));
    }
    if (!attrs.empty()) jn["attrs"] = std::move(attrs);
    if (auto it = doc.node_extra.find(n.id); it != doc.node_extra.end()) {
      for (const auto& [key, value] : it->second.items()) jn[key] = value;
    }
    nodes.push_back(std::move(jn));
  }
  for (const auto& [key, value] : doc.extra.items()) root[key] = value;
  root["nodes"] = std::move(nodes);
  return root.dump(2) + "\n";
}

void write_at_file(const std::filesystem::path& path, const AtDocument& doc) {
  detail::write_text(path, write_at(doc));
}

}  // namespace atq
