#include "reactlog/terms.hpp"

#include <functional>
#include <stdexcept>

#include "reactlog/syntax.hpp"

namespace reactlog {

char mode_char(Mode m) {
  switch (m) {
    case Mode::in:
      return '+';
    case Mode::out:
      return '-';
    case Mode::any:
      break;
  }
  return '?';
}

Mode mode_from_char(char c) {
  if (c == '+') return Mode::in;
  if (c == '-') return Mode::out;
  return Mode::any;
}

struct Term::Node {
  Kind kind = Kind::constant;
  std::string name;
  Scalar value;
  std::vector<Term> args;
  std::string type_tag;
  Mode mode = Mode::any;
  bool ground = true;
  std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

std::size_t scalar_hash(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, TimePoint>) {
          return std::hash<std::int64_t>{}(v.millis) * 31 + 7;
        } else {
          return std::hash<V>{}(v);
        }
      },
      s);
}

const std::string& empty_string() {
  static const std::string s;
  return s;
}

const Scalar& empty_scalar() {
  static const Scalar s{std::int64_t{0}};
  return s;
}

}  // namespace

Term::Term() : Term(constant("")) {}

Term Term::constant(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->hash = mix(1, std::hash<std::string>{}(name));
  n->name = std::move(name);
  return Term{std::move(n)};
}

Term Term::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->ground = false;
  n->hash = mix(2, std::hash<std::string>{}(name));
  n->name = std::move(name);
  return Term{std::move(n)};
}

Term Term::literal(Scalar value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::literal;
  n->hash = mix(3 + value.index(), scalar_hash(value));
  n->value = std::move(value);
  return Term{std::move(n)};
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::compound;
  std::size_t h = mix(11, std::hash<std::string>{}(functor));
  for (const auto& a : args) {
    n->ground = n->ground && a.is_ground();
    h = mix(h, a.hash());
  }
  n->hash = mix(h, args.size());
  n->name = std::move(functor);
  n->args = std::move(args);
  return Term{std::move(n)};
}

Term Term::list(std::vector<Term> items) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::list;
  std::size_t h = 13;
  for (const auto& a : items) {
    n->ground = n->ground && a.is_ground();
    h = mix(h, a.hash());
  }
  n->hash = mix(h, items.size());
  n->args = std::move(items);
  return Term{std::move(n)};
}

Term::Kind Term::kind() const { return node_->kind; }

const std::string& Term::name() const {
  if (node_->kind == Kind::literal || node_->kind == Kind::list) return empty_string();
  return node_->name;
}

const Scalar& Term::value() const {
  if (node_->kind != Kind::literal) return empty_scalar();
  return node_->value;
}

std::span<const Term> Term::args() const { return node_->args; }

bool Term::is_ground() const { return node_->ground; }

std::size_t Term::hash() const { return node_->hash; }

const std::string& Term::type_tag() const { return node_->type_tag; }

Mode Term::mode() const { return node_->mode; }

Term Term::annotated(std::string type_tag, Mode mode) const {
  auto n = std::make_shared<Node>(*node_);
  n->type_tag = std::move(type_tag);
  n->mode = mode;
  return Term{std::move(n)};
}

bool Term::has_functor(std::string_view name, std::size_t arity) const {
  if (node_->kind == Kind::constant) return arity == 0 && node_->name == name;
  if (node_->kind == Kind::compound) return node_->args.size() == arity && node_->name == name;
  return false;
}

std::string Term::indicator() const {
  if (node_->kind == Kind::constant) return node_->name + "/0";
  if (node_->kind == Kind::compound) return node_->name + "/" + std::to_string(node_->args.size());
  return {};
}

std::string Term::to_string() const { return write_term(*this); }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.kind != y.kind || x.mode != y.mode || x.type_tag != y.type_tag) return false;
  switch (x.kind) {
    case Term::Kind::constant:
    case Term::Kind::variable:
      return x.name == y.name;
    case Term::Kind::literal:
      return x.value == y.value;
    case Term::Kind::compound:
      if (x.name != y.name) return false;
      [[fallthrough]];
    case Term::Kind::list:
      return x.args == y.args;
  }
  return false;
}

namespace {

int kind_rank(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::variable:
      return 0;
    case Term::Kind::literal:
      if (std::holds_alternative<TimePoint>(t.value())) return 2;
      if (std::holds_alternative<std::string>(t.value())) return 3;
      return 1;
    case Term::Kind::constant:
      return 4;
    case Term::Kind::list:
      return 5;
    case Term::Kind::compound:
      return 6;
  }
  return 7;
}

std::strong_ordering compare_doubles(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::strong_ordering compare_seq(std::span<const Term> a, std::span<const Term> b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (auto c = compare_terms(a[i], b[i]); c != 0) return c;
  }
  return std::strong_ordering::equal;
}

}  // namespace

std::strong_ordering compare_terms(const Term& a, const Term& b) {
  if (auto c = kind_rank(a) <=> kind_rank(b); c != 0) return c;
  switch (a.kind()) {
    case Term::Kind::variable:
    case Term::Kind::constant:
      return a.name() <=> b.name();
    case Term::Kind::literal: {
      const auto& x = a.value();
      const auto& y = b.value();
      if (std::holds_alternative<TimePoint>(x)) return std::get<TimePoint>(x) <=> std::get<TimePoint>(y);
      if (std::holds_alternative<std::string>(x)) return std::get<std::string>(x) <=> std::get<std::string>(y);
      double dx = std::holds_alternative<double>(x) ? std::get<double>(x) : static_cast<double>(std::get<std::int64_t>(x));
      double dy = std::holds_alternative<double>(y) ? std::get<double>(y) : static_cast<double>(std::get<std::int64_t>(y));
      if (auto c = compare_doubles(dx, dy); c != 0) return c;
      return x.index() <=> y.index();
    }
    case Term::Kind::list:
      return compare_seq(a.args(), b.args());
    case Term::Kind::compound: {
      if (auto c = a.arity() <=> b.arity(); c != 0) return c;
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      return compare_seq(a.args(), b.args());
    }
  }
  return std::strong_ordering::equal;
}

std::optional<std::partial_ordering> compare_values(const Term& a, const Term& b) {
  if (auto ta = as_time_point(a), tb = as_time_point(b); ta && tb &&
      (std::holds_alternative<TimePoint>(a.value()) || std::holds_alternative<TimePoint>(b.value()) ||
       a.is_compound() || b.is_compound())) {
    return ta->millis <=> tb->millis;
  }
  if (auto na = as_number(a), nb = as_number(b); na && nb) {
    if (a.is_literal() && b.is_literal() && std::holds_alternative<std::int64_t>(a.value()) &&
        std::holds_alternative<std::int64_t>(b.value())) {
      return std::get<std::int64_t>(a.value()) <=> std::get<std::int64_t>(b.value());
    }
    return *na <=> *nb;
  }
  if (a.is_literal() && b.is_literal() && std::holds_alternative<std::string>(a.value()) &&
      std::holds_alternative<std::string>(b.value())) {
    return std::get<std::string>(a.value()) <=> std::get<std::string>(b.value());
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Substitution

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& var, Term value) { bindings_.insert_or_assign(var, std::move(value)); }

Term Substitution::walk(const Term& t) const {
  Term cur = t;
  while (cur.is_variable()) {
    const Term* next = lookup(cur.name());
    if (next == nullptr) break;
    cur = *next;
  }
  return cur;
}

Substitution Substitution::project(const std::set<std::string>& vars) const {
  Substitution out;
  for (const auto& v : vars) {
    if (lookup(v) != nullptr) {
      Term resolved = apply(*this, Term::variable(v));
      if (!(resolved.is_variable() && resolved.name() == v)) out.bind(v, resolved);
    }
  }
  return out;
}

std::string Substitution::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : bindings_) {
    if (!first) out += ", ";
    first = false;
    out += k + " -> " + apply(*this, v).to_string();
  }
  return out + "}";
}

namespace {

bool occurs_in(const std::string& var, const Term& t, const Substitution& s) {
  Term w = s.walk(t);
  if (w.is_variable()) return w.name() == var;
  if (w.is_ground()) return false;
  for (const auto& a : w.args()) {
    if (occurs_in(var, a, s)) return true;
  }
  return false;
}

bool unify_into(const Term& a, const Term& b, Substitution& s) {
  Term x = s.walk(a);
  Term y = s.walk(b);
  if (x.is_variable() && y.is_variable() && x.name() == y.name()) return true;
  if (x.is_variable()) {
    if (occurs_in(x.name(), y, s)) return false;
    s.bind(x.name(), y);
    return true;
  }
  if (y.is_variable()) {
    if (occurs_in(y.name(), x, s)) return false;
    s.bind(y.name(), x);
    return true;
  }
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::constant:
      return x.name() == y.name();
    case Term::Kind::literal:
      return x.value() == y.value();
    case Term::Kind::compound:
      if (x.name() != y.name()) return false;
      [[fallthrough]];
    case Term::Kind::list: {
      if (x.arity() != y.arity()) return false;
      if (x.is_ground() && y.is_ground()) {
        // Annotations do not take part in unification.
        return compare_terms(x, y) == 0;
      }
      for (std::size_t i = 0; i < x.arity(); ++i) {
        if (!unify_into(x.arg(i), y.arg(i), s)) return false;
      }
      return true;
    }
    case Term::Kind::variable:
      break;
  }
  return false;
}

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& base) {
  Substitution s = base;
  if (!unify_into(a, b, s)) return std::nullopt;
  return s;
}

Term apply(const Substitution& s, const Term& t) {
  if (t.is_ground() || s.empty()) return t;
  switch (t.kind()) {
    case Term::Kind::variable: {
      const Term* v = s.lookup(t.name());
      if (v == nullptr) return t;
      return apply(s, *v);
    }
    case Term::Kind::compound:
    case Term::Kind::list: {
      std::vector<Term> args;
      args.reserve(t.arity());
      bool changed = false;
      for (const auto& a : t.args()) {
        args.push_back(apply(s, a));
        changed = changed || !(args.back() == a);
      }
      if (!changed) return t;
      Term out = t.is_list() ? Term::list(std::move(args)) : Term::compound(t.name(), std::move(args));
      if (!t.type_tag().empty() || t.mode() != Mode::any) out = out.annotated(t.type_tag(), t.mode());
      return out;
    }
    default:
      return t;
  }
}

Term rename_apart(const Term& t, std::string_view suffix) {
  if (t.is_ground()) return t;
  switch (t.kind()) {
    case Term::Kind::variable: {
      Term v = Term::variable(t.name() + std::string(suffix));
      if (!t.type_tag().empty() || t.mode() != Mode::any) v = v.annotated(t.type_tag(), t.mode());
      return v;
    }
    case Term::Kind::compound:
    case Term::Kind::list: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const auto& a : t.args()) args.push_back(rename_apart(a, suffix));
      Term out = t.is_list() ? Term::list(std::move(args)) : Term::compound(t.name(), std::move(args));
      if (!t.type_tag().empty() || t.mode() != Mode::any) out = out.annotated(t.type_tag(), t.mode());
      return out;
    }
    default:
      return t;
  }
}

void collect_variables(const Term& t, std::set<std::string>& out) {
  if (t.is_ground()) return;
  if (t.is_variable()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

std::set<std::string> variables_of(const Term& t) {
  std::set<std::string> out;
  collect_variables(t, out);
  return out;
}

namespace {

bool variant_into(const Term& a, const Term& b, std::map<std::string, std::string>& ab,
                  std::map<std::string, std::string>& ba) {
  if (a.is_variable() || b.is_variable()) {
    if (!(a.is_variable() && b.is_variable())) return false;
    auto [i, ins1] = ab.emplace(a.name(), b.name());
    auto [j, ins2] = ba.emplace(b.name(), a.name());
    return i->second == b.name() && j->second == a.name();
  }
  if (a.kind() != b.kind()) return false;
  if (a.is_ground() != b.is_ground()) return false;
  if (a.is_ground()) return compare_terms(a, b) == 0;
  if (a.is_compound() && a.name() != b.name()) return false;
  if (a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!variant_into(a.arg(i), b.arg(i), ab, ba)) return false;
  }
  return true;
}

}  // namespace

bool is_variant(const Term& a, const Term& b) {
  std::map<std::string, std::string> ab, ba;
  return variant_into(a, b, ab, ba);
}

std::optional<double> as_number(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(&t.value())) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&t.value())) return *d;
  return std::nullopt;
}

std::optional<std::int64_t> as_integer(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(&t.value())) return *i;
  return std::nullopt;
}

std::optional<TimePoint> as_time_point(const Term& t) {
  if (t.is_literal()) {
    if (const auto* i = std::get_if<std::int64_t>(&t.value())) return TimePoint{*i};
    if (const auto* p = std::get_if<TimePoint>(&t.value())) return *p;
    return std::nullopt;
  }
  if (t.has_functor("datetime", 6)) {
    int f[6];
    for (int i = 0; i < 6; ++i) {
      auto v = as_integer(t.arg(static_cast<std::size_t>(i)));
      if (!v) return std::nullopt;
      f[i] = static_cast<int>(*v);
    }
    return from_civil(f[0], f[1], f[2], f[3], f[4], f[5]);
  }
  return std::nullopt;
}

std::optional<Timespan> as_timespan(const Term& t) {
  if (auto i = as_integer(t); i && *i >= 0) return Timespan::from_millis(*i);
  if (t.has_functor("timespan", 4)) {
    std::int64_t f[4];
    for (std::size_t i = 0; i < 4; ++i) {
      auto v = as_integer(t.arg(i));
      if (!v || *v < 0) return std::nullopt;
      f[i] = *v;
    }
    return Timespan{f[0], f[1], f[2], f[3], 0};
  }
  return std::nullopt;
}

Term timespan_term(const Timespan& s) {
  Timespan n = Timespan::from_millis(s.total_millis());
  if (n.millis != 0) return Term::integer(s.total_millis());
  return Term::compound("timespan",
                        {Term::integer(n.days), Term::integer(n.hours), Term::integer(n.minutes), Term::integer(n.seconds)});
}

std::string symbol_text(const Term& t) {
  if (t.is_constant()) return t.name();
  if (t.is_literal()) {
    if (const auto* s = std::get_if<std::string>(&t.value())) return *s;
  }
  return t.to_string();
}

}  // namespace reactlog
