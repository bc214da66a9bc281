// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "atq/knowledge.hpp"

namespace atq {

struct StixImport {
  KnowledgeSnapshot snapshot;
  std::vector<std::string> warnings;
};

/// Best-effort extraction of a canonical snapshot from an ATT&CK-style STIX
/// bundle (x-mitre-tactic, attack-pattern, campaign, "uses" relationships).
///
/// A campaign's use of a technique is recorded for every tactic in the
/// technique's kill-chain phases; each such multi-tactic pair yields one
/// warning. Revoked and deprecated objects are skipped. The result is
/// canonically ordered: tactics by the Enterprise matrix (or the bundle's
/// matrix object), techniques and campaigns by id.
///
/// Throws ParseError for malformed bundles and InvariantError for dangling
/// references or a bundle without campaigns.
StixImport import_stix(std::string_view text);
StixImport import_stix_file(const std::filesystem::path& path);

/// Minimal bundle that import_stix maps back onto `snapshot`, provided every
/// campaign uses each technique under all of its tactics. Object ids are
/// derived deterministically from ATT&CK ids.
std::string export_stix(const KnowledgeSnapshot& snapshot);

}  // namespace atq
