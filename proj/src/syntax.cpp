#include "reactlog/syntax.hpp"

#include <cctype>
#include <charconv>
#include <cstring>
#include <map>
#include <optional>

namespace reactlog {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { name, qname, var, integer, real, string, datetime, timespan, punct, end, eof };

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  Scalar value;
  int line = 1;
  int column = 1;
  bool glued_paren = false;  // name immediately followed by '('
  bool space_before = false;
};

enum class OpType { xfx, xfy, yfx, fy, fx };

struct OpDef {
  int prec;
  OpType type;
};

const std::map<std::string, OpDef, std::less<>>& infix_ops() {
  static const std::map<std::string, OpDef, std::less<>> ops = {
      {":-", {1200, OpType::xfx}}, {",", {1000, OpType::xfy}},  {"=", {700, OpType::xfx}},
      {"\\=", {700, OpType::xfx}}, {"==", {700, OpType::xfx}},  {"\\==", {700, OpType::xfx}},
      {"<", {700, OpType::xfx}},   {">", {700, OpType::xfx}},   {"=<", {700, OpType::xfx}},
      {">=", {700, OpType::xfx}},  {"=:=", {700, OpType::xfx}}, {"=\\=", {700, OpType::xfx}},
      {"is", {700, OpType::xfx}},  {"+", {500, OpType::yfx}},   {"-", {500, OpType::yfx}},
      {"*", {400, OpType::yfx}},   {"/", {400, OpType::yfx}},   {"mod", {400, OpType::yfx}},
  };
  return ops;
}

const std::map<std::string, OpDef, std::less<>>& prefix_ops() {
  static const std::map<std::string, OpDef, std::less<>> ops = {
      {":-", {1200, OpType::fx}},
      {"-", {200, OpType::fy}},
  };
  return ops;
}

bool is_symbol_char(char c) { return std::strchr("+-*/\\^<>=~:.?@#&$", c) != nullptr && c != '\0'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    bool space = skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    t.space_before = space;
    if (pos_ >= src_.size()) {
      t.kind = Tok::eof;
      return t;
    }
    char c = src_[pos_];
    if (c == '.' && (pos_ + 1 >= src_.size() || std::isspace(static_cast<unsigned char>(src_[pos_ + 1])) ||
                     src_[pos_ + 1] == '%')) {
      advance(1);
      t.kind = Tok::end;
      t.text = ".";
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
      std::string word = identifier();
      if (auto dotted = dotted_tail(word)) {
        t.kind = Tok::name;
        t.text = *dotted;
      } else {
        t.kind = Tok::var;
        t.text = word;
      }
      t.glued_paren = pos_ < src_.size() && src_[pos_] == '(';
      return t;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string word = identifier();
      if (auto dotted = dotted_tail(word)) word = *dotted;
      t.kind = Tok::name;
      t.text = word;
      t.glued_paren = pos_ < src_.size() && src_[pos_] == '(';
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::qname;
      t.text = quoted('\'');
      t.glued_paren = pos_ < src_.size() && src_[pos_] == '(';
      return t;
    }
    if (c == '"') {
      t.kind = Tok::string;
      t.value = quoted('"');
      return t;
    }
    if (std::strchr("()[],|{}", c) != nullptr) {
      advance(1);
      t.kind = Tok::punct;
      t.text = std::string(1, c);
      return t;
    }
    if (c == '!' || c == ';') {
      advance(1);
      t.kind = Tok::name;
      t.text = std::string(1, c);
      t.glued_paren = pos_ < src_.size() && src_[pos_] == '(';
      return t;
    }
    if (is_symbol_char(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_symbol_char(src_[pos_])) {
        // A '.' followed by layout ends the clause rather than extending the symbol.
        if (src_[pos_] == '.' && (pos_ + 1 >= src_.size() || std::isspace(static_cast<unsigned char>(src_[pos_ + 1])))) {
          break;
        }
        advance(1);
      }
      t.kind = Tok::name;
      t.text = std::string(src_.substr(start, pos_ - start));
      t.glued_paren = pos_ < src_.size() && src_[pos_] == '(';
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  bool skip_space() {
    bool any = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
        any = true;
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
        any = true;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        int l = line_, co = col_;
        advance(2);
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance(1);
        if (pos_ + 1 >= src_.size()) throw ParseError("unterminated block comment", l, co);
        advance(2);
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_alnum(src_[pos_])) advance(1);
    return std::string(src_.substr(start, pos_ - start));
  }

  // `Ns.sub.fn(` is read as one host-function name.
  std::optional<std::string> dotted_tail(const std::string& head) {
    std::size_t p = pos_;
    std::string name = head;
    bool dotted = false;
    while (p + 1 < src_.size() && src_[p] == '.' && std::isalpha(static_cast<unsigned char>(src_[p + 1]))) {
      std::size_t q = p + 1;
      while (q < src_.size() && is_alnum(src_[q])) ++q;
      name += std::string(src_.substr(p, q - p));
      p = q;
      dotted = true;
    }
    if (!dotted || p >= src_.size() || src_[p] != '(') return std::nullopt;
    advance(p - pos_);
    return name;
  }

  std::string quoted(char q) {
    int l = line_, c = col_;
    advance(1);
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) throw ParseError("unterminated quoted text", l, c);
      char ch = src_[pos_];
      if (ch == q) {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == q) {
          out += q;
          advance(2);
          continue;
        }
        advance(1);
        break;
      }
      if (ch == '\\' && pos_ + 1 < src_.size()) {
        char e = src_[pos_ + 1];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case 'r':
            out += '\r';
            break;
          case '0':
            out += '\0';
            break;
          default:
            out += e;
        }
        advance(2);
        continue;
      }
      out += ch;
      advance(1);
    }
    return out;
  }

  Token number(Token t) {
    std::size_t start = pos_;
    // ISO 8601 datetime literal: YYYY-MM-DDT...
    if (pos_ + 10 < src_.size() && src_[pos_ + 4] == '-' && src_[pos_ + 7] == '-' &&
        (src_[pos_ + 10] == 'T' || src_[pos_ + 10] == 't')) {
      std::size_t p = pos_;
      while (p < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[p])) || std::strchr(":.+-", src_[p]) != nullptr)) {
        if (src_[p] == '.' && (p + 1 >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[p + 1])))) break;
        ++p;
      }
      auto text = src_.substr(pos_, p - pos_);
      auto tp = parse_iso8601(text);
      if (!tp) fail("malformed datetime literal '" + std::string(text) + "'");
      advance(p - pos_);
      t.kind = Tok::datetime;
      t.value = *tp;
      return t;
    }
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    bool real = false;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      real = true;
      advance(1);
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        real = true;
        advance(p - pos_);
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
      }
    }
    auto digits = src_.substr(start, pos_ - start);
    if (!real) {
      // Timespan suffix: 250ms, 10s, 5m, 2h, 1d.
      for (std::string_view unit : {"ms", "s", "m", "h", "d"}) {
        if (src_.substr(pos_, unit.size()) == unit &&
            (pos_ + unit.size() >= src_.size() || !is_alnum(src_[pos_ + unit.size()]))) {
          advance(unit.size());
          t.kind = Tok::timespan;
          t.text = std::string(digits) + std::string(unit);
          return t;
        }
      }
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc{}) fail("integer out of range");
      t.kind = Tok::integer;
      t.value = v;
      return t;
    }
    t.kind = Tok::real;
    t.value = std::stod(std::string(digits));
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

  bool at_eof() const { return tok_.kind == Tok::eof; }

  Term clause() {
    vars_.clear();
    Term t = parse(1200);
    if (tok_.kind != Tok::end) fail("expected '.' after clause");
    tok_ = lex_.next();
    return t;
  }

  Term single() {
    vars_.clear();
    Term t = parse(1200);
    if (tok_.kind == Tok::end) tok_ = lex_.next();
    if (tok_.kind != Tok::eof) fail("unexpected text after term");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_.line, tok_.column); }

  void consume_punct(const char* p) {
    if (tok_.kind != Tok::punct || tok_.text != p) fail(std::string("expected '") + p + "'");
    tok_ = lex_.next();
  }

  bool is_punct(const char* p) const { return tok_.kind == Tok::punct && tok_.text == p; }

  bool starts_term() const {
    switch (tok_.kind) {
      case Tok::end:
      case Tok::eof:
        return false;
      case Tok::punct:
        return tok_.text == "(" || tok_.text == "[";
      case Tok::name:
        return !infix_ops().contains(tok_.text) || prefix_ops().contains(tok_.text) || tok_.glued_paren;
      default:
        return true;
    }
  }

  std::optional<OpDef> infix_here() const {
    if (tok_.kind == Tok::punct && tok_.text == ",") return infix_ops().at(",");
    if (tok_.kind != Tok::name) return std::nullopt;
    auto it = infix_ops().find(tok_.text);
    if (it == infix_ops().end()) return std::nullopt;
    return it->second;
  }

  Term parse(int max_prec) {
    auto [left, left_prec] = primary(max_prec);
    while (true) {
      auto op = infix_here();
      if (!op || op->prec > max_prec) break;
      int left_max = op->type == OpType::yfx ? op->prec : op->prec - 1;
      int right_max = op->type == OpType::xfy ? op->prec : op->prec - 1;
      if (left_prec > left_max) break;
      std::string name = tok_.text;
      tok_ = lex_.next();
      Term right = parse(right_max);
      left = Term::compound(name, {left, right});
      left_prec = op->prec;
    }
    return left;
  }

  std::pair<Term, int> primary(int max_prec) {
    Token t = tok_;
    switch (t.kind) {
      case Tok::integer:
      case Tok::real:
      case Tok::string:
      case Tok::datetime:
        tok_ = lex_.next();
        return {Term::literal(t.value), 0};
      case Tok::timespan:
        tok_ = lex_.next();
        return {timespan_term(Timespan::parse(t.text)), 0};
      case Tok::var: {
        tok_ = lex_.next();
        if (t.text == "_") return {Term::variable("__" + std::to_string(anon_++)), 0};
        return {Term::variable(t.text), 0};
      }
      case Tok::punct:
        if (t.text == "(") {
          tok_ = lex_.next();
          Term inner = parse(1200);
          consume_punct(")");
          return {inner, 0};
        }
        if (t.text == "[") {
          tok_ = lex_.next();
          std::vector<Term> items;
          if (!is_punct("]")) {
            items.push_back(parse(999));
            while (is_punct(",")) {
              tok_ = lex_.next();
              items.push_back(parse(999));
            }
            if (is_punct("|")) fail("partial lists '[H|T]' are not supported");
          }
          consume_punct("]");
          return {Term::list(std::move(items)), 0};
        }
        fail("unexpected '" + t.text + "'");
      case Tok::name:
      case Tok::qname: {
        tok_ = lex_.next();
        if (t.glued_paren) {
          consume_punct("(");
          std::vector<Term> args;
          args.push_back(parse(999));
          while (is_punct(",")) {
            tok_ = lex_.next();
            args.push_back(parse(999));
          }
          consume_punct(")");
          return {Term::compound(t.text, std::move(args)), 0};
        }
        if (t.kind == Tok::name) {
          if (auto it = prefix_ops().find(t.text); it != prefix_ops().end() && starts_term()) {
            if (t.text == "-" && (tok_.kind == Tok::integer || tok_.kind == Tok::real) && !tok_.space_before) {
              Token n = tok_;
              tok_ = lex_.next();
              if (n.kind == Tok::integer) return {Term::integer(-std::get<std::int64_t>(n.value)), 0};
              return {Term::real(-std::get<double>(n.value)), 0};
            }
            int prec = it->second.prec;
            if (prec > max_prec) prec = 999;
            int arg_max = it->second.type == OpType::fy ? prec : prec - 1;
            Term arg = parse(arg_max);
            return {Term::compound(t.text, {arg}), prec};
          }
          int prec = infix_ops().contains(t.text) ? std::min(infix_ops().at(t.text).prec, 1201) : 0;
          return {Term::constant(t.text), prec > max_prec ? 0 : prec};
        }
        return {Term::constant(t.text), 0};
      }
      case Tok::end:
        fail("unexpected end of clause");
      case Tok::eof:
        fail("unexpected end of input");
    }
    fail("unexpected token");
  }

  Lexer lex_;
  Token tok_;
  std::map<std::string, Term> vars_;
  int anon_ = 0;
};

// ---------------------------------------------------------------------------
// Writer

bool plain_atom(const std::string& s) {
  if (s.empty()) return false;
  if (std::islower(static_cast<unsigned char>(s[0]))) {
    for (char c : s) {
      if (!is_alnum(c)) return false;
    }
    return true;
  }
  if (s == "!" || s == ";" || s == "[]") return true;
  for (char c : s) {
    if (!is_symbol_char(c)) return false;
  }
  return true;
}

bool dotted_name(const std::string& s) {
  if (s.find('.') == std::string::npos) return false;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t dot = s.find('.', start);
    std::string part = s.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || !std::isalpha(static_cast<unsigned char>(part[0]))) return false;
    for (char c : part) {
      if (!is_alnum(c)) return false;
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return true;
}

std::string quote(const std::string& s, char q) {
  std::string out(1, q);
  for (char c : s) {
    if (c == q || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  out += q;
  return out;
}

std::string atom_text(const std::string& s) { return plain_atom(s) ? s : quote(s, '\''); }

std::string real_text(double d) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) {
    s += ".0";
  } else if (s.find('.') == std::string::npos && s.find_first_of("eE") != std::string::npos) {
    s.insert(s.find_first_of("eE"), ".0");
  }
  return s;
}

void write(const Term& t, int max_prec, std::string& out);

void write_args(std::span<const Term> args, std::string& out) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ", ";
    write(args[i], 999, out);
  }
}

void write(const Term& t, int max_prec, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::variable:
      out += t.name();
      return;
    case Term::Kind::constant: {
      const std::string& n = t.name();
      bool op = infix_ops().contains(n) || prefix_ops().contains(n);
      if (op && max_prec < 1200) {
        out += "(" + atom_text(n) + ")";
      } else {
        out += atom_text(n);
      }
      return;
    }
    case Term::Kind::literal:
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::int64_t>) {
              out += std::to_string(v);
            } else if constexpr (std::is_same_v<V, double>) {
              out += real_text(v);
            } else if constexpr (std::is_same_v<V, std::string>) {
              out += quote(v, '"');
            } else {
              out += format_iso8601(v);
            }
          },
          t.value());
      return;
    case Term::Kind::list:
      out += "[";
      write_args(t.args(), out);
      out += "]";
      return;
    case Term::Kind::compound:
      break;
  }
  const std::string& f = t.name();
  if (t.arity() == 2) {
    if (auto it = infix_ops().find(f); it != infix_ops().end()) {
      const OpDef& op = it->second;
      int left_max = op.type == OpType::yfx ? op.prec : op.prec - 1;
      int right_max = op.type == OpType::xfy ? op.prec : op.prec - 1;
      bool paren = op.prec > max_prec;
      if (paren) out += "(";
      write(t.arg(0), left_max, out);
      if (f == ",") {
        out += ", ";
      } else if (f == ":-") {
        out += " :- ";
      } else {
        out += " " + f + " ";
      }
      write(t.arg(1), right_max, out);
      if (paren) out += ")";
      return;
    }
  }
  if (t.arity() == 1 && f == ":-") {
    bool paren = 1200 > max_prec;
    if (paren) out += "(";
    out += ":- ";
    write(t.arg(0), 1199, out);
    if (paren) out += ")";
    return;
  }
  out += (dotted_name(f) ? f : atom_text(f));
  out += "(";
  write_args(t.args(), out);
  out += ")";
}

}  // namespace

Term parse_term(std::string_view text) {
  Parser p(text);
  return p.single();
}

std::vector<Term> parse_clauses(std::string_view text) {
  Parser p(text);
  std::vector<Term> out;
  while (!p.at_eof()) out.push_back(p.clause());
  return out;
}

Term fill_placeholders(const Term& t, const std::vector<Term>& args) {
  Substitution s;
  for (std::size_t i = 0; i < args.size(); ++i) s.bind("_" + std::to_string(i), args[i]);
  return apply(s, t);
}

std::string write_term(const Term& t) {
  std::string out;
  write(t, 1200, out);
  return out;
}

std::vector<Term> conjuncts(const Term& body) {
  std::vector<Term> out;
  Term cur = body;
  while (cur.has_functor(",", 2)) {
    auto left = conjuncts(cur.arg(0));
    out.insert(out.end(), left.begin(), left.end());
    cur = cur.arg(1);
  }
  if (!cur.has_functor("true", 0)) out.push_back(cur);
  return out;
}

Term make_conjunction(const std::vector<Term>& goals) {
  if (goals.empty()) return Term::constant("true");
  Term out = goals.back();
  for (std::size_t i = goals.size() - 1; i-- > 0;) out = Term::compound(",", {goals[i], out});
  return out;
}

}  // namespace reactlog
