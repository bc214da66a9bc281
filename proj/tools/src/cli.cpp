// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atq/at_format.hpp"
#include "atq/catm.hpp"
#include "atq/error.hpp"
#include "atq/knowledge.hpp"
#include "atq/metrics.hpp"
#include "atq/stix.hpp"
#include "atq/templates.hpp"

namespace atq::cli {

namespace {

struct RunConfig {
  std::string snapshot;
  std::string out;
  std::string difficulty = "default";
  std::string metric = "security-index";
  bool verbose = false;
  bool allow_cross_version = false;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write '" + path + "'");
  file << text;
  if (!file) throw Error("write to '" + path + "' failed");
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string format_interval(const Interval& b) {
  return "[" + fixed6(b.lo) + ", " + fixed6(b.hi) + "]";
}

bool all_degenerate(const IntervalAttribution& bounds) {
  for (const auto& [id, b] : bounds.bounds()) {
    if (!b.degenerate()) return false;
  }
  return true;
}

KnowledgeSnapshot load_snapshot(const RunConfig& cfg) {
  if (cfg.snapshot.empty()) throw InvariantError("--snapshot is required for this command");
  return read_snapshot_file(cfg.snapshot);
}

Difficulty difficulty_of(const RunConfig& cfg) {
  auto d = parse_difficulty(cfg.difficulty);
  if (!d) throw ParseError("unknown difficulty '" + cfg.difficulty + "'");
  return *d;
}

// Probabilities for tagged leaves that carry none, from the snapshot-wide
// likelihood matrix.
void attribute_from_snapshot(AtDocument& doc, const RunConfig& cfg, std::ostream& err) {
  if (cfg.snapshot.empty()) return;
  auto snapshot = load_snapshot(cfg);
  if (doc.extra.contains("snapshot_version") && doc.extra["snapshot_version"].is_string()) {
    auto version = doc.extra["snapshot_version"].get<std::string>();
    if (version != snapshot.version()) {
      if (!cfg.allow_cross_version) {
        throw InvariantError("AT was built from snapshot '" + version + "' but '" + cfg.snapshot +
                             "' is '" + snapshot.version() +
                             "'; pass --allow-cross-version to combine them");
      }
      err << "warning: combining AT from snapshot '" << version << "' with snapshot '"
          << snapshot.version() << "'\n";
    }
  }
  auto p = likelihoods(snapshot);
  for (const auto& n : doc.tree.nodes()) {
    if (!n.is_leaf() || !n.tactic || !n.technique) continue;
    if (doc.probabilities.contains(n.id) || doc.probability_intervals.contains(n.id)) continue;
    if (!p.observed(*n.tactic)) continue;
    doc.probabilities.set(n.id, p.probability(*n.technique, *n.tactic));
  }
}

LoadAttributions load_attributions(const AtDocument& doc) {
  LoadAttributions attrs;
  for (const auto& load : builtin_loads()) {
    auto b = doc.bounds_for(load.name);
    if (!b.empty()) attrs[load.name] = std::move(b);
  }
  return attrs;
}

Attack parse_attack(const std::string& text) {
  Attack attack;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    auto last = item.find_last_not_of(" \t");
    attack.insert(item.substr(first, last - first + 1));
  }
  return attack;
}

int cmd_ingest(const RunConfig& cfg, const std::string& bundle, std::ostream& out,
               std::ostream& err) {
  auto result = import_stix_file(bundle);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  emit(write_snapshot(result.snapshot), cfg.out, out);
  if (cfg.verbose) {
    err << "ingested " << result.snapshot.tactics().size() << " tactics, "
        << result.snapshot.techniques().size() << " techniques, "
        << result.snapshot.campaigns().size() << " campaigns (" << result.snapshot.version()
        << ")\n";
  }
  return kOk;
}

int cmd_likelihoods(const RunConfig& cfg, std::ostream& out) {
  auto snapshot = load_snapshot(cfg);
  emit(likelihoods(snapshot).to_csv(snapshot), cfg.out, out);
  return kOk;
}

int cmd_template(const RunConfig& cfg, const std::string& campaign, std::ostream& out,
                 std::ostream& err) {
  auto snapshot = load_snapshot(cfg);
  auto doc = instantiate(snapshot, campaign, difficulty_of(cfg));
  if (cfg.verbose) {
    err << campaign << ": " << doc.tree.size() << " nodes, " << doc.tree.basic_steps().size()
        << " basic steps\n";
  }
  emit(write_at(doc), cfg.out, out);
  return kOk;
}

int cmd_metric(const RunConfig& cfg, const std::string& file, std::ostream& out,
               std::ostream& err) {
  auto doc = read_at_file(file);
  doc.tree.require_valid();
  attribute_from_snapshot(doc, cfg, err);
  const auto& load = load_by_name(cfg.metric);
  auto bounds = doc.bounds_for(load.name);
  std::string text;
  if (all_degenerate(bounds)) {
    text = fixed6(tree_metric(load, bounds.lower(), doc.tree));
  } else {
    text = format_interval(interval_tree_metric(load, bounds, doc.tree));
  }
  emit(text + "\n", cfg.out, out);
  return kOk;
}

int cmd_compare(const RunConfig& cfg, const std::string& plot, std::ostream& out,
                std::ostream& err) {
  auto snapshot = load_snapshot(cfg);
  Scorer scorer(snapshot);
  auto difficulty = difficulty_of(cfg);
  auto rows = scorer.compare_all(difficulty);
  for (const auto& r : rows) {
    if (!r.index) err << "warning: campaign " << r.campaign << " has no usages; index undefined\n";
  }
  emit(compare_csv(rows, difficulty), cfg.out, out);
  std::string plot_path = plot;
  if (plot_path.empty() && !cfg.out.empty() && cfg.out != "-") plot_path = cfg.out + ".plot.csv";
  if (!plot_path.empty()) {
    emit(plot_csv(scorer), plot_path, out);
    if (cfg.verbose) err << "plot data written to " << plot_path << '\n';
  }
  return kOk;
}

int cmd_query(const RunConfig& cfg, const std::string& file, const std::string& formula,
              const std::optional<std::string>& attack_text, std::ostream& out,
              std::ostream& err) {
  auto doc = read_at_file(file);
  doc.tree.require_valid();
  auto psi = parse_formula(formula);
  attribute_from_snapshot(doc, cfg, err);
  std::vector<std::string> trace;
  std::string text;
  if (attack_text) {
    auto attack = parse_attack(*attack_text);
    if (is_layer2(*psi)) {
      text = std::string(to_string(eval_layer2(doc.tree, attack, load_attributions(doc), *psi,
                                               cfg.verbose ? &trace : nullptr)));
    } else {
      text = eval_layer1(doc.tree, attack, *psi) ? "TRUE" : "FALSE";
    }
  } else if (is_layer2(*psi)) {
    text = std::string(to_string(
        eval_tree_level(doc.tree, load_attributions(doc), *psi, cfg.verbose ? &trace : nullptr)));
  } else {
    const auto& load = load_by_name(cfg.metric);
    auto bounds = doc.bounds_for(load.name);
    if (all_degenerate(bounds)) {
      text = fixed6(formula_metric(doc.tree, load, bounds.lower(), *psi));
    } else {
      text = format_interval(formula_metric(doc.tree, load, bounds, *psi));
    }
  }
  for (const auto& line : trace) err << line << '\n';
  if (cfg.verbose) err << "formula: " << to_string(*psi) << '\n';
  emit(text + "\n", cfg.out, out);
  return kOk;
}

int cmd_check(const RunConfig& cfg, const std::string& file, std::ostream& out,
              std::ostream& err) {
  auto doc = read_at_file(file);
  const auto& violations = doc.tree.violations();
  for (const auto& v : violations) err << "error: " << v.message << '\n';
  if (!violations.empty()) return kInvariant;
  std::string text = "ok: " + std::to_string(doc.tree.size()) + " nodes, " +
                     std::to_string(doc.tree.basic_steps().size()) + " basic steps, " +
                     (doc.tree.tree_structured() ? "tree-structured" : "DAG") + "\n";
  emit(text, cfg.out, out);
  return kOk;
}

}  // namespace

int exit_code(const std::exception& e) noexcept {
  if (dynamic_cast<const ParseError*>(&e)) return kParse;
  if (dynamic_cast<const InvariantError*>(&e)) return kInvariant;
  if (dynamic_cast<const UnknownEntityError*>(&e)) return kUnknownEntity;
  if (dynamic_cast<const MissingAttributionError*>(&e)) return kMissingAttribution;
  if (dynamic_cast<const FormulaError*>(&e)) return kFormula;
  return kFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Attack-tree quantification over MITRE ATT&CK campaigns", "atq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  std::vector<std::string> loads;
  for (const auto& l : builtin_loads()) loads.push_back(l.name);

  app.add_option("--snapshot", cfg.snapshot, "Knowledge snapshot (snapshot/1 JSON)");
  app.add_option("-o,--out", cfg.out, "Output file (default: standard output)");
  app.add_option("--difficulty", cfg.difficulty, "Template difficulty")
      ->check(CLI::IsMember({"easy", "default", "hard"}, CLI::ignore_case));
  app.add_option("--metric", cfg.metric, "Metric name")->check(CLI::IsMember(loads));
  app.add_flag("-v,--verbose", cfg.verbose, "Extra diagnostics on standard error");
  app.add_flag("--allow-cross-version", cfg.allow_cross_version,
               "Accept an AT built from a different snapshot version");

  std::string bundle, campaign, at_file, formula, plot;
  std::optional<std::string> attack;

  auto* ingest = app.add_subcommand("ingest", "Import a STIX bundle into a snapshot");
  ingest->add_option("bundle", bundle, "STIX 2.x bundle")->required();

  auto* lik = app.add_subcommand("likelihoods", "Export p[technique, tactic] as CSV");

  auto* templ = app.add_subcommand("template", "Write the pruned template AT of a campaign");
  templ->add_option("campaign", campaign, "Campaign id, e.g. C0014")->required();

  auto* metric = app.add_subcommand("metric", "Compute a metric on an AT file");
  metric->add_option("at-file", at_file)->required();

  auto* compare = app.add_subcommand("compare", "Security index of every campaign, as CSV");
  compare->add_option("--plot", plot, "Plot-data CSV (default: <out>.plot.csv)");

  auto* query = app.add_subcommand("query", "Evaluate a cATM formula");
  query->add_option("at-file", at_file)->required();
  query->add_option("--catm", formula, "Formula")->required();
  query->add_option("--attack", attack, "Comma-separated basic attack steps");

  auto* check = app.add_subcommand("check", "Validate an AT file");
  check->add_option("at-file", at_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "atq: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(cfg, bundle, out, err);
    if (*lik) return cmd_likelihoods(cfg, out);
    if (*templ) return cmd_template(cfg, campaign, out, err);
    if (*metric) return cmd_metric(cfg, at_file, out, err);
    if (*compare) return cmd_compare(cfg, plot, out, err);
    if (*query) return cmd_query(cfg, at_file, formula, attack, out, err);
    if (*check) return cmd_check(cfg, at_file, out, err);
  } catch (const std::exception& e) {
    err << "atq: error: " << e.what() << '\n';
    return exit_code(e);
  }
  return kUsage;
}

}  // namespace atq::cli
