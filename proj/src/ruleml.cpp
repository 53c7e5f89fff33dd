#include "reactlog/ruleml.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "reactlog/event_algebra.hpp"
#include "reactlog/syntax.hpp"

namespace reactlog::ruleml {

namespace pt = boost::property_tree;
using Node = pt::ptree;

namespace {

// Element name, role layout and functor of the event calculus constructs.
struct EcForm {
  const char* element;
  const char* functor;
  std::vector<const char*> roles;  // "" marks a child without a role tag
};

const std::vector<EcForm>& ec_forms() {
  static const std::vector<EcForm> forms = {
      {"Happens", "happens", {"event", "time"}},
      {"Planned", "planned", {"event", "time"}},
      {"Occurs", "occurs", {"event", "interval"}},
      {"Initially", "initially", {"fluent"}},
      {"Initiates", "initiates", {"event", "fluent", "time"}},
      {"Terminates", "terminates", {"event", "fluent", "time"}},
      {"HoldsAt", "holdsAt", {"fluent", "time"}},
      {"ValueAt", "valueAt", {"parameter", "time", ""}},
      {"HoldsInterval", "holdsInterval", {"", ""}},
  };
  return forms;
}

const EcForm* ec_form_by_element(const std::string& name) {
  for (const auto& f : ec_forms()) {
    if (name == f.element) return &f;
  }
  return nullptr;
}

const EcForm* ec_form_by_term(const Term& t) {
  if (!t.is_compound()) return nullptr;
  for (const auto& f : ec_forms()) {
    if (t.has_functor(f.functor, f.roles.size())) return &f;
  }
  return nullptr;
}

// Variadic algebra operators and their element names.
const std::map<std::string, std::string>& nary_ops() {
  static const std::map<std::string, std::string> m = {
      {"Sequence", "sequence"}, {"Or", "or"}, {"Xor", "xor"}, {"And", "and"}, {"Concurrent", "concurrent"}};
  return m;
}

const std::set<std::string>& role_tags() {
  static const std::set<std::string> s = {"event", "time", "fluent", "interval", "parameter", "side", "value"};
  return s;
}

std::string local_name(const std::string& n) {
  auto p = n.rfind(':');
  return p == std::string::npos ? n : n.substr(p + 1);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<Term> number_from(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ec == std::errc{} && p == s.data() + s.size()) return Term::integer(i);
  if (s.find_first_of(".eE") == std::string::npos) return std::nullopt;
  double d = 0;
  auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec2 == std::errc{} && p2 == s.data() + s.size()) return Term::real(d);
  return std::nullopt;
}

struct Elem {
  std::string name;
  const Node* node;
  std::string path;
};

std::vector<Elem> children_of(const Node& n, const std::string& path) {
  std::vector<Elem> out;
  std::map<std::string, int> seen;
  for (const auto& [key, child] : n) {
    if (key == "<xmlattr>" || key == "<xmlcomment>" || key == "<xmltext>") continue;
    std::string name = local_name(key);
    int k = ++seen[name];
    out.push_back(Elem{name, &child, path + "/" + name + (k > 1 ? "[" + std::to_string(k) + "]" : "")});
  }
  return out;
}

std::string attr(const Node& n, const char* name) {
  auto a = n.get_child_optional("<xmlattr>");
  if (!a) return {};
  for (const auto& [key, v] : *a) {
    if (local_name(key) == name) return trim(v.data());
  }
  return {};
}

// Variables of t in first-occurrence order.
void collect_vars(const Term& t, std::vector<Term>& out, std::set<std::string>& seen) {
  if (t.is_variable()) {
    if (seen.insert(t.name()).second) out.push_back(Term::variable(t.name()));
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out, seen);
}

Term rename_vars(const Term& t, const std::map<std::string, Term>& m) {
  if (t.is_variable()) {
    auto it = m.find(t.name());
    return it == m.end() ? t : it->second;
  }
  if (t.is_compound() || t.is_list()) {
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(rename_vars(a, m));
    Term out = t.is_list() ? Term::list(std::move(args)) : Term::compound(t.name(), std::move(args));
    if (!t.type_tag().empty() || t.mode() != Mode::any) out = out.annotated(t.type_tag(), t.mode());
    return out;
  }
  return t;
}

bool is_placeholder(const std::string& name) {
  return name.size() > 1 && name[0] == '_' && name.find_first_not_of("0123456789", 1) == std::string::npos;
}

// Clause terms to update text plus the argument list filling its placeholders.
std::pair<std::string, std::vector<Term>> update_text(const std::vector<Term>& clauses) {
  std::vector<Term> vars;
  std::set<std::string> seen;
  for (const auto& c : clauses) collect_vars(c, vars, seen);
  std::map<std::string, Term> m;
  for (std::size_t i = 0; i < vars.size(); ++i) m[vars[i].name()] = Term::variable("_" + std::to_string(i));
  std::string text;
  for (const auto& c : clauses) {
    if (!text.empty()) text += " ";
    text += write_term(rename_vars(c, m)) + ".";
  }
  return {text, vars};
}

// ---------------------------------------------------------------------------
// Reading

class Reader {
 public:
  explicit Reader(bool collect) : collect_(collect) {}

  std::vector<Diagnostic> diagnostics;

  Document document(const Node& tree) {
    Document doc;
    auto top = children_of(tree, "");
    if (top.size() != 1) {
      fail("/", "expected exactly one root element");
      return doc;
    }
    const Elem& root = top[0];
    std::vector<Elem> items;
    if (root.name == "RuleML" || root.name == "Rulebase") {
      for (auto& c : children_of(*root.node, root.path)) {
        if (c.name == "Rulebase") {
          for (auto& cc : children_of(*c.node, c.path)) items.push_back(cc);
        } else {
          items.push_back(c);
        }
      }
    } else {
      items.push_back(root);
    }
    for (const auto& e : items) {
      if (e.name == "ECA") {
        doc.eca_rules.push_back(eca(e));
      } else if (e.name == "Implies") {
        doc.clauses.push_back(implies(e));
      } else {
        Term t = term(e);
        if (!(t.is_constant() || t.is_compound())) {
          fail(e.path, "a fact must be an atom or compound term");
          continue;
        }
        doc.clauses.push_back(Clause{t, {}});
      }
    }
    return doc;
  }

 private:
  bool collect_;
  int anon_ = 0;

  Term fail(const std::string& path, std::string message) {
    Diagnostic d{path, std::move(message)};
    if (!collect_) throw RuleMLError(d);
    diagnostics.push_back(std::move(d));
    return Term::constant("?");
  }

  static Term annotate(const Term& t, const Node& n) {
    std::string type = attr(n, "type");
    std::string mode = attr(n, "mode");
    Mode m = mode.empty() ? Mode::any : mode_from_char(mode[0]);
    if (type.empty() && m == Mode::any) return t;
    return t.annotated(type, m);
  }

  std::vector<Elem> kids(const Elem& e) { return children_of(*e.node, e.path); }

  // Unwraps a role tag (`<event>x</event>`) around a term element.
  Term child_term(const Elem& e) {
    if (role_tags().count(e.name) != 0) {
      auto k = kids(e);
      if (k.size() != 1) return fail(e.path, "role <" + e.name + "> needs exactly one child");
      return term(k[0]);
    }
    return term(e);
  }

  Term interval_term(const Elem& e) {
    Elem x = e;
    if (role_tags().count(e.name) != 0) {
      auto k = kids(e);
      if (k.size() != 1) return fail(e.path, "role <" + e.name + "> needs exactly one child");
      x = k[0];
    }
    if (x.name != "Interval" && x.name != "Plex" && x.name != "Var") {
      return fail(x.path, "expected Interval, Plex or Var, found <" + x.name + ">");
    }
    return term(x);
  }

  Term var(const Elem& e) {
    std::string name = trim(e.node->data());
    if (name.empty() || name == "_") name = "_G" + std::to_string(anon_++);
    return annotate(Term::variable(name), *e.node);
  }

  Term ind(const Elem& e) {
    std::string text = trim(e.node->data());
    if (text.empty()) return fail(e.path, "empty <Ind>");
    if (auto n = number_from(text)) return annotate(*n, *e.node);
    return annotate(Term::constant(text), *e.node);
  }

  Term data(const Elem& e) {
    std::string text = trim(e.node->data());
    std::string type = attr(*e.node, "type");
    std::string mode = attr(*e.node, "mode");
    Mode m = mode.empty() ? Mode::any : mode_from_char(mode[0]);
    std::string xs = type.rfind("xs:", 0) == 0 || type.rfind("xsd:", 0) == 0 ? type.substr(type.find(':') + 1) : "";
    Term value;
    bool consumed = true;
    if (xs == "dateTime") {
      auto tp = parse_iso8601(text);
      if (!tp) return fail(e.path, "bad xs:dateTime '" + text + "'");
      value = Term::datetime(*tp);
    } else if (xs == "string") {
      value = Term::string(e.node->data());
    } else if (xs == "integer" || xs == "int" || xs == "long" || xs == "decimal" || xs == "double" ||
               xs == "float") {
      auto n = number_from(text);
      if (!n) return fail(e.path, "bad number '" + text + "'");
      value = *n;
    } else {
      consumed = false;
      auto n = number_from(text);
      value = n ? *n : Term::string(text);
    }
    if (consumed) type.clear();
    if (type.empty() && m == Mode::any) return value;
    return value.annotated(type, m);
  }

  Term list(const Elem& e) {
    std::vector<Term> items;
    for (const auto& k : kids(e)) items.push_back(term(k));
    return annotate(Term::list(std::move(items)), *e.node);
  }

  // Cterm and Atom: a constructor (Ctor, Rel, Attachment, op) followed by arguments.
  Term complex(const Elem& e) {
    auto k = kids(e);
    if (k.empty()) return fail(e.path, "<" + e.name + "> needs a constructor");
    Elem head = k[0];
    if (head.name == "op") {
      auto hk = kids(head);
      if (hk.size() != 1) return fail(head.path, "<op> needs exactly one child");
      head = hk[0];
    }
    std::string functor;
    if (head.name == "Ctor" || head.name == "Rel") {
      functor = trim(head.node->data());
      if (functor.empty()) return fail(head.path, "empty <" + head.name + ">");
    } else if (head.name == "Attachment") {
      auto ak = kids(head);
      if (ak.size() != 2) return fail(head.path, "<Attachment> needs a class and a method");
      for (const auto& a : ak) {
        if (a.name != "Ind") return fail(a.path, "attachment parts must be <Ind>");
      }
      std::string cls = trim(ak[0].node->data());
      std::string method = trim(ak[1].node->data());
      if (cls.empty() || method.empty()) return fail(head.path, "empty attachment class or method");
      functor = cls + "." + method;
    } else {
      return fail(head.path, "<" + e.name + "> must start with Ctor, Rel or Attachment");
    }
    std::vector<Term> args;
    for (std::size_t i = 1; i < k.size(); ++i) args.push_back(term(k[i]));
    Term t = args.empty() ? Term::constant(functor) : Term::compound(functor, std::move(args));
    return annotate(t, *e.node);
  }

  Term unary(const Elem& e, const char* functor) {
    auto k = kids(e);
    if (k.size() != 1) return fail(e.path, "<" + e.name + "> needs exactly one child");
    return annotate(Term::compound(functor, {term(k[0])}), *e.node);
  }

  Term ec(const Elem& e, const EcForm& f) {
    auto k = kids(e);
    if (k.size() != f.roles.size()) {
      return fail(e.path, "<" + e.name + "> needs " + std::to_string(f.roles.size()) + " children");
    }
    std::vector<Term> args;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i].name == "Interval") {
        args.push_back(interval_term(k[i]));
      } else {
        args.push_back(child_term(k[i]));
      }
    }
    return annotate(Term::compound(f.functor, std::move(args)), *e.node);
  }

  Term windowed(const Elem& e, const char* functor) {
    auto k = kids(e);
    if (k.size() != 2) return fail(e.path, "<" + e.name + "> needs an event and an interval");
    Term first = k[0].name == "Interval" ? fail(k[0].path, "<" + e.name + "> must start with an event") : term(k[0]);
    return annotate(Term::compound(functor, {first, interval_term(k[1])}), *e.node);
  }

  Term any(const Elem& e) {
    auto k = kids(e);
    if (k.size() != 2) return fail(e.path, "<Any> needs a count and an event");
    if (k[0].name != "Ind" && k[0].name != "Data" && k[0].name != "Var") {
      return fail(k[0].path, "<Any> count must be Ind, Data or Var");
    }
    return annotate(Term::compound("any", {term(k[0]), term(k[1])}), *e.node);
  }

  Term equal(const Elem& e) {
    auto k = kids(e);
    if (k.size() != 2) return fail(e.path, "<Equal> needs two sides");
    return annotate(Term::compound("=", {child_term(k[0]), child_term(k[1])}), *e.node);
  }

  // Update content: clause terms, plus the oid when present.
  struct Content {
    std::optional<Term> oid;
    std::vector<Term> clauses;
  };

  Content content(const Elem& e) {
    Content c;
    auto k = kids(e);
    std::vector<Elem> items = k;
    if (k.size() == 1 && k[0].name == "And") items = kids(k[0]);
    for (const auto& it : items) {
      if (it.name == "oid") {
        if (c.oid) fail(it.path, "duplicate <oid>");
        auto ok = kids(it);
        if (ok.size() != 1) {
          fail(it.path, "<oid> needs exactly one child");
          continue;
        }
        c.oid = term(ok[0]);
      } else if (it.name == "Implies") {
        c.clauses.push_back(implies(it).to_term());
      } else {
        c.clauses.push_back(term(it));
      }
    }
    return c;
  }

  Term assert_(const Elem& e) {
    Content c = content(e);
    if (!c.oid) {
      if (c.clauses.empty()) return fail(e.path, "<Assert> needs content or an oid");
      return Term::compound("add", {Term::list(c.clauses)});
    }
    if (c.clauses.empty()) return Term::compound("add", {*c.oid});
    auto [text, vars] = update_text(c.clauses);
    if (vars.empty()) return Term::compound("add", {*c.oid, Term::string(text)});
    return Term::compound("add", {*c.oid, Term::string(text), Term::list(vars)});
  }

  Term retract(const Elem& e, bool all) {
    Content c = content(e);
    if (all) {
      if (c.oid || c.clauses.size() != 1) return fail(e.path, "<RetractAll> needs exactly one atom");
      return Term::compound("retractall", {c.clauses[0]});
    }
    if (c.oid) {
      if (!c.clauses.empty()) return fail(e.path, "<Retract> takes either an oid or an atom");
      return Term::compound("remove", {*c.oid});
    }
    if (c.clauses.size() != 1) return fail(e.path, "<Retract> needs exactly one atom");
    return Term::compound("retract", {c.clauses[0]});
  }

 public:
  Term term(const Elem& e) {
    const std::string& n = e.name;
    if (n == "Var") return var(e);
    if (n == "Ind") return ind(e);
    if (n == "Data") return data(e);
    if (n == "Plex") return list(e);
    if (n == "Interval") {
      if (kids(e).size() != 2) return fail(e.path, "<Interval> needs exactly two children");
      return list(e);
    }
    if (n == "Cterm" || n == "Atom") return complex(e);
    if (n == "Naf") return unary(e, "not");
    if (n == "Neg") return unary(e, "neg");
    if (n == "Equal") return equal(e);
    if (const EcForm* f = ec_form_by_element(n)) return ec(e, *f);
    if (auto it = nary_ops().find(n); it != nary_ops().end()) {
      auto k = kids(e);
      if (k.empty()) return fail(e.path, "<" + n + "> needs at least one operand");
      std::vector<Term> args;
      for (const auto& c : k) args.push_back(term(c));
      return annotate(Term::compound(it->second, std::move(args)), *e.node);
    }
    if (n == "Not") return windowed(e, "neg");
    if (n == "Aperiodic") return windowed(e, "aperiodic");
    if (n == "Periodic") return windowed(e, "periodic");
    if (n == "Any") return any(e);
    if (n == "Assert") return assert_(e);
    if (n == "Retract") return retract(e, false);
    if (n == "RetractAll") return retract(e, true);
    return fail(e.path, "unknown element <" + n + ">");
  }

  Clause implies(const Elem& e) {
    auto k = kids(e);
    if (k.size() != 2) {
      fail(e.path, "<Implies> needs a body and a head");
      return Clause{Term::constant("?"), {}};
    }
    const Elem* body = &k[0];
    const Elem* head = &k[1];
    if (k[0].name == "then" || k[0].name == "head") std::swap(body, head);
    auto unwrap = [&](const Elem& r) -> Elem {
      if (r.name == "if" || r.name == "then" || r.name == "head" || r.name == "body") {
        auto rk = kids(r);
        if (rk.size() != 1) {
          fail(r.path, "role <" + r.name + "> needs exactly one child");
          return Elem{"Ind", r.node, r.path};
        }
        return rk[0];
      }
      return r;
    };
    Elem b = unwrap(*body);
    Elem h = unwrap(*head);
    Clause c;
    c.head = term(h);
    if (!(c.head.is_constant() || c.head.is_compound())) fail(h.path, "rule head must be an atom");
    if (b.name == "And") {
      for (const auto& g : kids(b)) c.body.push_back(term(g));
    } else {
      c.body.push_back(term(b));
    }
    return c;
  }

  EcaRule eca(const Elem& e) {
    static const std::vector<std::string> order = {"oid", "time", "event", "condition", "action", "postcondition",
                                                   "else"};
    EcaRule r;
    std::set<std::string> seen;
    std::size_t last = 0;
    for (const auto& part : kids(e)) {
      auto pos = std::find(order.begin(), order.end(), part.name);
      if (pos == order.end()) {
        fail(part.path, "unexpected <" + part.name + "> in <ECA>");
        continue;
      }
      if (!seen.insert(part.name).second) {
        fail(part.path, "duplicate <" + part.name + ">");
        continue;
      }
      auto idx = static_cast<std::size_t>(pos - order.begin());
      if (idx < last) fail(part.path, "<" + part.name + "> out of order");
      last = idx;
      auto pk = kids(part);
      if (pk.size() != 1) {
        fail(part.path, "<" + part.name + "> needs exactly one child");
        continue;
      }
      if (part.name == "oid") {
        Term id = term(pk[0]);
        r.oid = id.is_literal() || id.is_constant() ? symbol_text(id) : write_term(id);
        continue;
      }
      Term t = term(pk[0]);
      if (part.name == "time") r.time = t;
      if (part.name == "event") r.event = t;
      if (part.name == "condition") r.condition = t;
      if (part.name == "postcondition") r.post = t;
      if (part.name == "else") r.else_action = t;
      if (part.name == "action") {
        r.action = t;
        if (attr(*part.node, "safety") == "transactional" || attr(*pk[0].node, "safety") == "transactional") {
          r.transactional = true;
        }
      }
    }
    if (!r.action) fail(e.path, "<ECA> needs an <action>");
    if (r.action && (r.action->has_functor("transaction", 1) || r.action->has_functor("transaction", 2))) {
      r.transactional = true;
      r.action = r.action->arg(0);
    }
    return r;
  }
};

Node read_tree(std::string_view xml) {
  std::istringstream in{std::string(xml)};
  Node tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw RuleMLError(Diagnostic{"line " + std::to_string(e.line()), e.message()});
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Writing

class Writer {
 public:
  Node document(const Document& doc) {
    Node root;
    for (const auto& r : doc.eca_rules) root.push_back({"ECA", eca(r)});
    for (const auto& c : doc.clauses) {
      if (c.is_fact()) {
        root.push_back(term(c.head, true));
      } else {
        root.push_back({"Implies", implies(c)});
      }
    }
    return root;
  }

 private:
  using Item = std::pair<std::string, Node>;

  static Node leaf(const std::string& text) { return Node(text); }

  static void annotate(Node& n, const Term& t) {
    if (!t.type_tag().empty()) n.put("<xmlattr>.type", t.type_tag());
    if (t.mode() != Mode::any) n.put("<xmlattr>.mode", std::string(1, mode_char(t.mode())));
  }

  static Node role(const Item& child) {
    Node r;
    r.push_back(child);
    return r;
  }

  Item interval(const Term& t) {
    if (t.is_list() && t.arity() == 2 && t.type_tag().empty() && t.mode() == Mode::any) {
      Node n;
      for (const auto& a : t.args()) n.push_back(term(a, false));
      return {"Interval", n};
    }
    return term(t, false);
  }

  Item literal(const Term& t) {
    Node n;
    const Scalar& v = t.value();
    if (const auto* s = std::get_if<std::string>(&v)) {
      n = leaf(*s);
      if ((number_from(trim(*s)) || trim(*s) != *s) && t.type_tag().empty()) n.put("<xmlattr>.type", "xs:string");
    } else if (const auto* tp = std::get_if<TimePoint>(&v)) {
      n = leaf(format_iso8601(*tp));
      if (t.type_tag().empty()) n.put("<xmlattr>.type", "xs:dateTime");
    } else {
      n = leaf(write_term(Term::literal(v)));
    }
    annotate(n, t);
    return {"Data", n};
  }

  std::optional<Item> update(const Term& t) {
    if (t.has_functor("add", 1) && !t.arg(0).is_list()) {
      Node a;
      a.push_back({"oid", role(term(t.arg(0), false))});
      return Item{"Assert", role({"And", a})};
    }
    if (t.has_functor("add", 1)) {
      Node n;
      for (const auto& c : t.arg(0).args()) {
        Clause cl;
        try {
          cl = clause_from_term(c);
        } catch (const std::invalid_argument&) {
          return std::nullopt;
        }
        n.push_back(clause_item(cl));
      }
      if (n.empty()) return std::nullopt;
      return Item{"Assert", n};
    }
    if (t.has_functor("add", 2) || t.has_functor("add", 3)) {
      const Term& content = t.arg(1);
      if (!content.is_literal() || !std::holds_alternative<std::string>(content.value())) return std::nullopt;
      std::vector<Term> args;
      if (t.arity() == 3) {
        if (!t.arg(2).is_list()) return std::nullopt;
        args.assign(t.arg(2).args().begin(), t.arg(2).args().end());
      }
      std::vector<Term> parsed;
      try {
        parsed = parse_clauses(std::get<std::string>(content.value()));
      } catch (const std::exception&) {
        return std::nullopt;
      }
      // Variables that are not placeholders would be captured on re-reading.
      std::vector<Term> vars;
      std::set<std::string> seen;
      for (const auto& c : parsed) collect_vars(c, vars, seen);
      for (const auto& v : vars) {
        if (!is_placeholder(v.name())) return std::nullopt;
      }
      if (parsed.empty()) return std::nullopt;
      Node a;
      a.push_back({"oid", role(term(t.arg(0), false))});
      for (const auto& c : parsed) {
        Clause cl;
        try {
          cl = clause_from_term(fill_placeholders(c, args));
        } catch (const std::invalid_argument&) {
          return std::nullopt;
        }
        a.push_back(clause_item(cl));
      }
      return Item{"Assert", role({"And", a})};
    }
    if (t.has_functor("remove", 1)) {
      Node a;
      a.push_back({"oid", role(term(t.arg(0), false))});
      return Item{"Retract", role({"And", a})};
    }
    if ((t.has_functor("retract", 1) || t.has_functor("retractall", 1)) &&
        (t.arg(0).is_compound() || t.arg(0).is_constant()) && !t.arg(0).has_functor(":-", 2)) {
      return Item{t.name() == "retract" ? "Retract" : "RetractAll", role(term(t.arg(0), true))};
    }
    return std::nullopt;
  }

  Item clause_item(const Clause& c) {
    if (c.is_fact()) return term(c.head, true);
    return {"Implies", implies(c)};
  }

 public:
  // atom_style: compounds as <Atom><Rel>, otherwise <Cterm><Ctor>.
  Item term(const Term& t, bool atom_style) {
    if (t.is_variable()) {
      Node n = leaf(t.name());
      annotate(n, t);
      return {"Var", n};
    }
    if (t.is_constant()) {
      Node n = leaf(t.name());
      annotate(n, t);
      return {"Ind", n};
    }
    if (t.is_literal()) return literal(t);
    if (t.is_list()) {
      Node n;
      for (const auto& a : t.args()) n.push_back(term(a, false));
      annotate(n, t);
      return {"Plex", n};
    }
    bool plain = t.type_tag().empty() && t.mode() == Mode::any;
    Node n;
    std::string name;
    if (t.has_functor("not", 1)) {
      name = "Naf";
      n.push_back(term(t.arg(0), atom_style));
    } else if (t.has_functor("neg", 1)) {
      name = "Neg";
      n.push_back(term(t.arg(0), atom_style));
    } else if (t.has_functor("=", 2)) {
      name = "Equal";
      n.push_back({"side", role(term(t.arg(0), false))});
      n.push_back({"side", role(term(t.arg(1), false))});
    } else if (const EcForm* f = ec_form_by_term(t)) {
      name = f->element;
      for (std::size_t i = 0; i < f->roles.size(); ++i) {
        std::string r = f->roles[i];
        bool window = r == "interval" || (std::string(f->element) == "HoldsInterval");
        Item child = window ? interval(t.arg(i)) : term(t.arg(i), false);
        if (r.empty()) {
          n.push_back(child);
        } else {
          n.push_back({r, role(child)});
        }
      }
    } else if (auto op = nary_element(t)) {
      name = *op;
      for (const auto& a : t.args()) n.push_back(term(a, false));
    } else if (t.has_functor("neg", 2) || t.has_functor("aperiodic", 2) || t.has_functor("periodic", 2)) {
      name = t.name() == "neg" ? "Not" : t.name() == "aperiodic" ? "Aperiodic" : "Periodic";
      n.push_back(term(t.arg(0), false));
      n.push_back(interval(t.arg(1)));
    } else if (t.has_functor("any", 2)) {
      name = "Any";
      n.push_back(term(t.arg(0), false));
      n.push_back(term(t.arg(1), false));
    } else if (auto u = plain ? update(t) : std::nullopt) {
      return *u;
    } else {
      auto dot = t.name().rfind('.');
      if (t.is_compound() && dot != std::string::npos && dot > 0 && dot + 1 < t.name().size()) {
        Node a;
        a.push_back({"Ind", leaf(t.name().substr(0, dot))});
        a.push_back({"Ind", leaf(t.name().substr(dot + 1))});
        name = "Cterm";
        n.push_back({"Attachment", a});
      } else {
        name = atom_style ? "Atom" : "Cterm";
        n.push_back({atom_style ? "Rel" : "Ctor", leaf(t.name())});
      }
      for (const auto& a : t.args()) n.push_back(term(a, false));
    }
    annotate(n, t);
    return {name, n};
  }

  Node implies(const Clause& c) {
    Node n;
    bool wrap = c.body.size() != 1 || c.body[0].has_functor("and", c.body[0].arity());
    if (wrap) {
      Node a;
      for (const auto& g : c.body) a.push_back(term(g, true));
      n.push_back({"And", a});
    } else {
      n.push_back(term(c.body[0], true));
    }
    n.push_back(term(c.head, true));
    return n;
  }

  Node eca(const EcaRule& r) {
    Node n;
    if (!r.oid.empty()) n.push_back({"oid", role({"Ind", leaf(r.oid)})});
    auto part = [&](const char* name, const std::optional<Term>& t) {
      if (t) n.push_back({name, role(term(*t, false))});
    };
    part("time", r.time);
    part("event", r.event);
    part("condition", r.condition);
    if (r.action) {
      Item a = term(*r.action, false);
      Node act;
      if (r.transactional) {
        if (a.first == "Assert") {
          a.second.put("<xmlattr>.safety", "transactional");
        } else {
          act.put("<xmlattr>.safety", "transactional");
        }
      }
      act.push_back(a);
      n.push_back({"action", act});
    }
    part("postcondition", r.post);
    part("else", r.else_action);
    return n;
  }

 private:
  static std::optional<std::string> nary_element(const Term& t) {
    if (!t.is_compound()) return std::nullopt;
    for (const auto& [element, functor] : nary_ops()) {
      if (t.name() == functor) return element;
    }
    return std::nullopt;
  }
};

}  // namespace

Document parse(std::string_view xml) {
  Node tree = read_tree(xml);
  Reader r(false);
  return r.document(tree);
}

Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuleMLError(Diagnostic{path, "cannot read file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const RuleMLError& e) {
    throw RuleMLError(Diagnostic{path + ":" + e.diagnostic().location, e.diagnostic().message});
  }
}

std::string serialize(const Document& doc) {
  Writer w;
  Node root;
  root.push_back({"RuleML", w.document(doc)});
  std::ostringstream out;
  pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

std::vector<Diagnostic> validate(std::string_view xml) {
  Node tree;
  try {
    tree = read_tree(xml);
  } catch (const RuleMLError& e) {
    return {e.diagnostic()};
  }
  Reader r(true);
  r.document(tree);
  return r.diagnostics;
}

std::vector<Diagnostic> validate(const Document& doc) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < doc.eca_rules.size(); ++i) {
    const auto& r = doc.eca_rules[i];
    std::string loc = "/RuleML/ECA[" + std::to_string(i + 1) + "]";
    if (!r.action) out.push_back({loc, "ECA rule has no action"});
    if (r.event && is_algebra_functor(*r.event)) {
      try {
        parse_event_expr(*r.event);
      } catch (const std::invalid_argument& e) {
        out.push_back({loc + "/event", e.what()});
      }
    }
  }
  for (std::size_t i = 0; i < doc.clauses.size(); ++i) {
    const auto& c = doc.clauses[i];
    std::string loc = "/RuleML/clause[" + std::to_string(i + 1) + "]";
    if (!(c.head.is_constant() || c.head.is_compound())) out.push_back({loc, "head is not an atom"});
    for (const auto& g : c.body) {
      if (g.is_literal() || g.is_list()) out.push_back({loc, "body goal is not callable: " + write_term(g)});
    }
  }
  return out;
}

Document from_clause_text(std::string_view text) {
  Document doc;
  for (const auto& t : parse_clauses(text)) {
    if (t.has_functor(":-", 1)) throw std::invalid_argument("directives have no ECA-RuleML form: " + write_term(t));
    Clause c = clause_from_term(t);
    if (c.is_fact() && c.head.is_compound() && c.head.name() == "eca" && c.head.arity() <= 7) {
      std::string diag;
      auto r = normalize_rule(c.head, diag);
      if (!r) throw std::invalid_argument(diag);
      doc.eca_rules.push_back(std::move(*r));
      continue;
    }
    doc.clauses.push_back(std::move(c));
  }
  return doc;
}

namespace {

bool is_variable_name(const std::string& n) {
  if (n.empty() || !(std::isupper(static_cast<unsigned char>(n[0])) || n[0] == '_')) return false;
  return std::all_of(n.begin(), n.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// XML variables may carry names such as "Service Provider"; clause text needs identifiers.
Term with_writable_variables(const Term& t) {
  std::vector<Term> vars;
  std::set<std::string> seen;
  collect_vars(t, vars, seen);
  Substitution s;
  int fresh = 0;
  for (const auto& v : vars) {
    if (is_variable_name(v.name())) continue;
    std::string name;
    do name = "V_" + std::to_string(fresh++);
    while (seen.contains(name));
    s.bind(v.name(), Term::variable(name));
  }
  return s.empty() ? t : apply(s, t);
}

}  // namespace

std::string to_clause_text(const Document& doc) {
  std::string out;
  for (const auto& r : doc.eca_rules) out += write_term(with_writable_variables(r.to_term(!r.oid.empty()))) + ".\n";
  for (const auto& c : doc.clauses) out += write_term(with_writable_variables(c.to_term())) + ".\n";
  return out;
}

}  // namespace reactlog::ruleml
