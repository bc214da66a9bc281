// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "atq/attack_tree.hpp"
#include "atq/load.hpp"

namespace atq {

// ---------------------------------------------------------------------------
// Truth values

enum class Truth { False, Maybe, True };

/// 0, 0.5, 1.
double numeric(Truth t) noexcept;
std::string_view to_string(Truth t) noexcept;  // "FALSE", "MAYBE", "TRUE"

Truth kleene_not(Truth t) noexcept;
Truth kleene_and(Truth a, Truth b) noexcept;

// ---------------------------------------------------------------------------
// Formulas

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Core AST shared by both layers. Or, =>, <=> and ^ (exclusive or of the
/// equivalence) never appear here: the builders below expand them into
/// Not/And.
struct Formula {
  enum class Kind { Atom, Not, And, MetricLeq, Assign };

  Kind kind = Kind::Atom;
  std::string name;       // atom id, load name (MetricLeq) or target (Assign)
  FormulaPtr lhs;         // Not, And, MetricLeq (layer-1 operand), Assign (body)
  FormulaPtr rhs;         // And
  double threshold = 0;   // MetricLeq
  Interval bounds;        // Assign
  std::size_t position = 0;

  friend bool operator==(const Formula& a, const Formula& b);
};

namespace catm {
FormulaPtr atom(std::string id, std::size_t position = 0);
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);     // !(!a & !b)
FormulaPtr implies(FormulaPtr a, FormulaPtr b);  // !(a & !b)
FormulaPtr iff(FormulaPtr a, FormulaPtr b);      // (a => b) & (b => a)
FormulaPtr xiff(FormulaPtr a, FormulaPtr b);     // !(a <=> b)
FormulaPtr metric_leq(std::string load, FormulaPtr phi, double threshold);
FormulaPtr assign(FormulaPtr body, std::string target, Interval bounds);
}  // namespace catm

/// True when the formula contains a metric comparison or an assignment.
bool is_layer2(const Formula& f);

/// Grammar, loosest binding first:
///
///   f := f ("<=>" | "^") f          left-assoc
///      | f "=>" f                   right-assoc
///      | f "|" f | f "&" f          left-assoc
///      | "!" f | "(" f ")" | atom
///      | "metric" "(" load "," f ")" "<=" number
///      | "set" atom "=" "[" number "," number "]" "in" f
///
/// Atoms match [A-Za-z0-9_.@-]+; numbers may be "inf". A formula using
/// metric or set is layer 2, and then atoms may only occur inside metric().
/// Throws FormulaError carrying the offending character offset.
FormulaPtr parse_formula(std::string_view text);

/// Desugared text; parse_formula(to_string(f)) is structurally equal to f.
std::string to_string(const Formula& f);

/// Atoms anywhere in the formula, including inside metric().
std::set<NodeId> atoms(const Formula& f);

/// Throws FormulaError for atoms or assignment targets missing from the tree
/// and for assignments that fail check_assignment_target.
void bind(const AttackTree& tree, const Formula& f);

struct AssignmentCheck {
  enum class Status { Ok, NotModule, DescendantInFormula };
  Status status = Status::Ok;
  std::string message;
  bool ok() const noexcept { return status == Status::Ok; }
};

/// Ok iff `target` is a BAS, or a module none of whose strict descendants
/// occurs as an atom in `f`.
AssignmentCheck check_assignment_target(const AttackTree& tree, const Formula& f,
                                        std::string_view target);

// ---------------------------------------------------------------------------
// Evaluation

/// Interval attribution per load name. "security-index" is derived from
/// "maxprob" when only the latter is present.
using LoadAttributions = std::map<std::string, IntervalAttribution, std::less<>>;

/// A, T |= phi. Throws FormulaError on layer-2 input.
bool eval_layer1(const AttackTree& tree, const Attack& attack, const Formula& phi);

/// Val_{A,T}(psi). A metric comparison is TRUE when A satisfies the operand
/// and the interval metric of A lies at or below the threshold, MAYBE when
/// the threshold is strictly inside it, FALSE otherwise. An assignment
/// evaluates its body with the target's interval replaced for every load; an
/// assigned gate stands in for its cone. `trace`, when given, receives one
/// line per metric comparison.
Truth eval_layer2(const AttackTree& tree, const Attack& attack, const LoadAttributions& attrs,
                  const Formula& psi, std::vector<std::string>* trace = nullptr);

/// Nabla over the minimal leaf sets satisfying phi of the delta-fold of
/// their values; unit_nabla when phi is unsatisfiable.
double formula_metric(const AttackTree& tree, const Load& load, const Attribution& attr,
                      const Formula& phi);
Interval formula_metric(const AttackTree& tree, const Load& load, const IntervalAttribution& attr,
                        const Formula& phi);

/// Minimal sets of BASes satisfying phi.
AttackSet minimal_satisfying(const AttackTree& tree, const Formula& phi,
                             std::size_t limit = 1'000'000);

/// Tree-level reading of a layer-2 formula: each metric comparison uses
/// formula_metric of its operand instead of a fixed attack.
Truth eval_tree_level(const AttackTree& tree, const LoadAttributions& attrs, const Formula& psi,
                      std::vector<std::string>* trace = nullptr);

}  // namespace atq
