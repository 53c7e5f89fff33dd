#pragma once

#include <ostream>

#include "reactlog/ruleml.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog {

inline void PrintTo(const Term& t, std::ostream* os) { *os << write_term(t); }
inline void PrintTo(const TimeInterval& i, std::ostream* os) { *os << "[" << i.start().millis << "," << i.end().millis << "]"; }
inline void PrintTo(const EcaRule& r, std::ostream* os) {
  *os << write_term(r.to_term(true)) << (r.transactional ? " (transactional)" : "");
}
inline void PrintTo(const Clause& c, std::ostream* os) { *os << write_term(c.to_term()); }

namespace ruleml {
inline void PrintTo(const Document& d, std::ostream* os) {
  *os << "\n";
  for (const auto& r : d.eca_rules) {
    reactlog::PrintTo(r, os);
    *os << "\n";
  }
  for (const auto& c : d.clauses) {
    reactlog::PrintTo(c, os);
    *os << "\n";
  }
}
}  // namespace ruleml

}  // namespace reactlog
