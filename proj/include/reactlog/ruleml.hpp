#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reactlog/eca_engine.hpp"

namespace reactlog::ruleml {

/// The contents of an ECA-RuleML document: reactive rules, plus facts and
/// derivation rules (event calculus facts, effect axioms, integrity
/// constraints, plain atoms).
struct Document {
  std::vector<EcaRule> eca_rules;
  std::vector<Clause> clauses;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Diagnostic {
  /// Element path such as `/RuleML/ECA[2]/event/Not`.
  std::string location;
  std::string message;

  [[nodiscard]] std::string to_string() const { return location + ": " + message; }
};

/// Malformed XML, unknown elements, and structural violations.
class RuleMLError : public std::runtime_error {
 public:
  explicit RuleMLError(Diagnostic d) : std::runtime_error(d.to_string()), diagnostic_(std::move(d)) {}
  [[nodiscard]] const Diagnostic& diagnostic() const { return diagnostic_; }

 private:
  Diagnostic diagnostic_;
};

/// Reads a document. The root may be `<RuleML>` (holding any number of
/// items) or a single item such as `<ECA>`. Namespace prefixes and xmlns
/// declarations are ignored.
Document parse(std::string_view xml);
Document parse_file(const std::string& path);

/// Canonical form: a `<RuleML>` root, ECA rules first, then clauses, with
/// two-space indentation. Throws RuleMLError for terms with no XML form.
std::string serialize(const Document& doc);

/// Structural checks on raw XML; an empty result means `parse` succeeds.
std::vector<Diagnostic> validate(std::string_view xml);
/// Checks on a parsed or hand-built document (missing actions, malformed
/// event expressions, non-callable heads).
std::vector<Diagnostic> validate(const Document& doc);

/// Clause text to document: eca/1..7 facts become rules, everything else a clause.
Document from_clause_text(std::string_view text);
/// Document to clause text, one clause per line, rules as eca/6 (eca/7 with an oid).
/// Type and mode annotations are dropped; variables whose names are not
/// identifiers are renamed to `V_<n>`.
std::string to_clause_text(const Document& doc);

}  // namespace reactlog::ruleml
