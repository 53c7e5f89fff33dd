#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reactlog/terms.hpp"

namespace reactlog {

/// Raised on malformed clause text; carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);

  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Reads one term. A trailing '.' is allowed but not required.
Term parse_term(std::string_view text);

/// Reads a sequence of '.'-terminated clauses. Rules come back as `':-'(Head, Body)`
/// and directives as `':-'(Goal)`; bodies keep their `','/2` structure.
std::vector<Term> parse_clauses(std::string_view text);

/// Replaces the placeholder variables `_0`, `_1`, ... by the given arguments.
Term fill_placeholders(const Term& t, const std::vector<Term>& args);

/// Canonical text form; `parse_term(write_term(t)) == t` for terms built from
/// parsed text (annotations are not written).
std::string write_term(const Term& t);

/// Flattens a `','/2` chain into its conjuncts; `true` yields an empty list.
std::vector<Term> conjuncts(const Term& body);
Term make_conjunction(const std::vector<Term>& goals);

}  // namespace reactlog
