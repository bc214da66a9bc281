// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "atq/attack_tree.hpp"
#include "atq/load.hpp"

namespace atq {

/// In-memory form of an "at/1" file.
///
///   {"format":"at/1","root":"<id>","nodes":[{"id","type","children",
///    "label","tactic","technique","prob" | "prob_interval":[lo,hi],
///    "attrs":{"<metric>": x | [lo,hi]}}]}
///
/// "attrs" carries values for the non-probability metrics. Fields the reader
/// does not know are kept in `extra` / `node_extra` and written back.
struct AtDocument {
  AttackTree tree;
  Attribution probabilities;
  IntervalAttribution probability_intervals;
  std::map<std::string, IntervalAttribution, std::less<>> attributes;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  std::map<NodeId, nlohmann::ordered_json> node_extra;

  bool has_probability_intervals() const { return !probability_intervals.empty(); }

  /// Leaf bounds for a metric: "maxprob" reads prob / prob_interval,
  /// "security-index" their -ln image, any other name reads attrs.
  /// Only leaves that carry a value are included.
  IntervalAttribution bounds_for(std::string_view metric) const;
};

/// Throws ParseError on malformed text or fields; structural problems of the
/// tree itself are left for validate().
AtDocument parse_at(std::string_view text);
AtDocument read_at_file(const std::filesystem::path& path);

/// Deterministic, two-space indented, trailing newline.
std::string write_at(const AtDocument& doc);
void write_at_file(const std::filesystem::path& path, const AtDocument& doc);

}  // namespace atq
