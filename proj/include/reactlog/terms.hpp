#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reactlog/temporal.hpp"

namespace reactlog {

/// Input/output mode annotation carried on terms (`+` input, `-` output, `?` either).
enum class Mode : std::uint8_t { any, in, out };

char mode_char(Mode m);
Mode mode_from_char(char c);

/// Scalar payload of a data literal.
using Scalar = std::variant<std::int64_t, double, std::string, TimePoint>;

/// Immutable logical term: constant, variable, data literal, compound, or list.
///
/// Terms share structure and are cheap to copy. Equality is structural and
/// includes the optional type/mode annotations.
class Term {
 public:
  enum class Kind : std::uint8_t { constant, variable, literal, compound, list };

  Term();

  static Term constant(std::string name);
  static Term variable(std::string name);
  static Term literal(Scalar value);
  static Term integer(std::int64_t v) { return literal(Scalar{v}); }
  static Term real(double v) { return literal(Scalar{v}); }
  static Term string(std::string v) { return literal(Scalar{std::move(v)}); }
  static Term datetime(TimePoint t) { return literal(Scalar{t}); }
  static Term compound(std::string functor, std::vector<Term> args);
  static Term list(std::vector<Term> items);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] bool is_constant() const { return kind() == Kind::constant; }
  [[nodiscard]] bool is_variable() const { return kind() == Kind::variable; }
  [[nodiscard]] bool is_literal() const { return kind() == Kind::literal; }
  [[nodiscard]] bool is_compound() const { return kind() == Kind::compound; }
  [[nodiscard]] bool is_list() const { return kind() == Kind::list; }

  /// Constant name, variable name, or compound functor.
  [[nodiscard]] const std::string& name() const;
  [[nodiscard]] const Scalar& value() const;
  /// Compound arguments or list items; empty otherwise.
  [[nodiscard]] std::span<const Term> args() const;
  [[nodiscard]] std::size_t arity() const { return args().size(); }
  [[nodiscard]] const Term& arg(std::size_t i) const { return args()[i]; }

  [[nodiscard]] bool is_ground() const;
  [[nodiscard]] std::size_t hash() const;

  [[nodiscard]] const std::string& type_tag() const;
  [[nodiscard]] Mode mode() const;
  [[nodiscard]] Term annotated(std::string type_tag, Mode mode) const;

  /// True for a constant or compound whose functor and arity match.
  [[nodiscard]] bool has_functor(std::string_view name, std::size_t arity) const;
  /// `name/arity` key for constants and compounds.
  [[nodiscard]] std::string indicator() const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Standard order of terms (variables < numbers < datetimes < strings < constants < lists < compounds).
std::strong_ordering compare_terms(const Term& a, const Term& b);

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare_terms(a, b) < 0; }
};

/// Orders two data literals: integers promote to floats, strings compare
/// lexicographically, datetimes chronologically. Unordered kinds yield nullopt.
std::optional<std::partial_ordering> compare_values(const Term& a, const Term& b);

/// Variable bindings. Stored in triangular form; `apply` resolves to a fixpoint.
class Substitution {
 public:
  Substitution() = default;

  [[nodiscard]] const Term* lookup(const std::string& var) const;
  /// Binds without checks; callers go through `unify`.
  void bind(const std::string& var, Term value);

  [[nodiscard]] bool empty() const { return bindings_.empty(); }
  [[nodiscard]] std::size_t size() const { return bindings_.size(); }
  [[nodiscard]] const std::map<std::string, Term>& bindings() const { return bindings_; }

  /// Dereferences a variable chain to its current value (shallow).
  [[nodiscard]] Term walk(const Term& t) const;

  /// Restricts the substitution to the given variables, fully resolved.
  [[nodiscard]] Substitution project(const std::set<std::string>& vars) const;

  friend bool operator==(const Substitution& a, const Substitution& b) { return a.bindings_ == b.bindings_; }

  [[nodiscard]] std::string to_string() const;

 private:
  std::map<std::string, Term> bindings_;
};

/// Most general unifier of a and b extending `base`, with occurs check.
std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& base = {});

/// Replaces every bound variable, resolving chains to a fixpoint.
Term apply(const Substitution& s, const Term& t);

/// Renames every variable `V` in t to `V<suffix>`.
Term rename_apart(const Term& t, std::string_view suffix);

void collect_variables(const Term& t, std::set<std::string>& out);
std::set<std::string> variables_of(const Term& t);

/// A variant check: equal up to a consistent renaming of variables.
bool is_variant(const Term& a, const Term& b);

/// Numeric view of an integer or float literal.
std::optional<double> as_number(const Term& t);
std::optional<std::int64_t> as_integer(const Term& t);

/// Interprets integer literals (millis), datetime literals, and
/// `datetime(Y,M,D,H,Mi,S)` compounds as time points.
std::optional<TimePoint> as_time_point(const Term& t);

/// Interprets `timespan(D,H,M,S)` compounds and integer millis as spans.
std::optional<Timespan> as_timespan(const Term& t);
Term timespan_term(const Timespan& s);

/// Text of a constant, or of a string literal; otherwise the term's text form.
std::string symbol_text(const Term& t);

}  // namespace reactlog

template <>
struct std::hash<reactlog::Term> {
  std::size_t operator()(const reactlog::Term& t) const noexcept { return t.hash(); }
};
