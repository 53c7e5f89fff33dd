#pragma once

// Brute-force reference evaluator for event algebra expressions over ground
// atoms. It works on a plain vector of (symbol, time) occurrences and knows
// nothing about the knowledge base or the solver.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Occ {
  char sym;
  std::int64_t t;
};

using Eis = std::vector<Occ>;

struct Det {
  std::int64_t start;
  std::int64_t end;
  std::set<std::size_t> from;  // indices into the EIS

  friend bool operator<(const Det& a, const Det& b) {
    if (a.end != b.end) return a.end < b.end;
    if (a.start != b.start) return a.start < b.start;
    return a.from < b.from;
  }
  friend bool operator==(const Det& a, const Det& b) {
    return a.start == b.start && a.end == b.end && a.from == b.from;
  }
};

struct Expr {
  enum Op { atom, seq, or_, xor_, and_, conc, neg, any, aper };
  Op op = atom;
  char sym = 0;
  std::vector<Expr> items;    // neg: {A, C}; aper: {E, A, C}; any: {E}
  std::vector<char> forbid;   // neg only
  int n = 0;                  // any only

  std::string text() const {
    auto join = [&](std::size_t from) {
      std::string s;
      for (std::size_t i = from; i < items.size(); ++i) s += (i > from ? "," : "") + items[i].text();
      return s;
    };
    switch (op) {
      case atom: return std::string(1, sym);
      case seq: return "sequence(" + join(0) + ")";
      case or_: return "or(" + join(0) + ")";
      case xor_: return "xor(" + join(0) + ")";
      case and_: return "and(" + join(0) + ")";
      case conc: return "concurrent(" + join(0) + ")";
      case neg: {
        std::string f;
        for (std::size_t i = 0; i < forbid.size(); ++i) f += (i ? "," : "") + std::string(1, forbid[i]);
        return "neg([" + f + "],[" + items[0].text() + "," + items[1].text() + "])";
      }
      case any: return "any(" + std::to_string(n) + "," + items[0].text() + ")";
      case aper: return "aperiodic(" + items[0].text() + ",[" + items[1].text() + "," + items[2].text() + "])";
    }
    return {};
  }
};

inline Expr A(char c) { Expr e; e.sym = c; return e; }
inline Expr make(Expr::Op op, std::vector<Expr> items) { Expr e; e.op = op; e.items = std::move(items); return e; }
inline Expr Seq(std::vector<Expr> i) { return make(Expr::seq, std::move(i)); }
inline Expr Or(std::vector<Expr> i) { return make(Expr::or_, std::move(i)); }
inline Expr Xor(std::vector<Expr> i) { return make(Expr::xor_, std::move(i)); }
inline Expr And(std::vector<Expr> i) { return make(Expr::and_, std::move(i)); }
inline Expr Conc(std::vector<Expr> i) { return make(Expr::conc, std::move(i)); }
inline Expr Neg(std::vector<char> f, Expr a, Expr c) {
  Expr e = make(Expr::neg, {std::move(a), std::move(c)});
  e.forbid = std::move(f);
  return e;
}
inline Expr Any(int n, Expr x) { Expr e = make(Expr::any, {std::move(x)}); e.n = n; return e; }
inline Expr Aper(Expr x, Expr a, Expr c) { return make(Expr::aper, {std::move(x), std::move(a), std::move(c)}); }

inline void symbols(const Expr& e, std::set<char>& out) {
  if (e.op == Expr::atom) out.insert(e.sym);
  for (char f : e.forbid) out.insert(f);
  for (const auto& i : e.items) symbols(i, out);
}

// Some occurrence of a symbol in `syms` lies strictly inside (lo, hi).
inline bool broken(const Eis& eis, std::int64_t lo, std::int64_t hi, const std::set<char>& syms) {
  for (const auto& o : eis) {
    if (syms.count(o.sym) && lo < o.t && o.t < hi) return true;
  }
  return false;
}

// a precedes-or-meets b, and they are not one and the same occurrence.
inline bool chainable(const Det& a, const Det& b) {
  if (a.from.size() == 1 && a.from == b.from) return false;
  return a.end <= b.start;
}

inline Det merge(const std::vector<const Det*>& parts) {
  Det d{parts[0]->start, parts[0]->end, {}};
  for (const Det* p : parts) {
    d.start = std::min(d.start, p->start);
    d.end = std::max(d.end, p->end);
    d.from.insert(p->from.begin(), p->from.end());
  }
  return d;
}

inline void flatten(const std::vector<Expr>& items, std::vector<Expr>& out) {
  for (const auto& i : items) {
    if (i.op == Expr::seq) flatten(i.items, out);
    else out.push_back(i);
  }
}

// Every combination of one detection per list, in nested order.
template <class F>
void product(const std::vector<std::vector<Det>>& lists, F&& f) {
  std::vector<const Det*> pick(lists.size());
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == lists.size()) {
      f(pick);
      return;
    }
    for (const auto& d : lists[i]) {
      pick[i] = &d;
      self(self, i + 1);
    }
  };
  if (!lists.empty()) rec(rec, 0);
}

// Detections in generation order (not yet sorted).
inline std::vector<Det> eval(const Expr& e, const Eis& eis, bool strict) {
  std::vector<Det> out;
  switch (e.op) {
    case Expr::atom:
      for (std::size_t i = 0; i < eis.size(); ++i) {
        if (eis[i].sym == e.sym) out.push_back({eis[i].t, eis[i].t, {i}});
      }
      break;

    case Expr::seq: {
      std::vector<Expr> items;
      flatten(e.items, items);
      std::vector<std::vector<Det>> lists;
      for (const auto& i : items) lists.push_back(eval(i, eis, strict));
      // terminators per adjacent pair
      std::vector<std::set<char>> term(items.size());
      for (std::size_t p = 0; p + 1 < items.size(); ++p) {
        if (strict) {
          for (const auto& i : items) symbols(i, term[p]);
        } else {
          std::set<char> pair, other;
          symbols(items[p], pair);
          symbols(items[p + 1], pair);
          for (std::size_t k = 0; k < items.size(); ++k) {
            if (k != p && k != p + 1) symbols(items[k], other);
          }
          for (char c : other) {
            if (!pair.count(c)) term[p].insert(c);
          }
        }
      }
      product(lists, [&](const std::vector<const Det*>& pick) {
        for (std::size_t p = 0; p + 1 < pick.size(); ++p) {
          if (!chainable(*pick[p], *pick[p + 1])) return;
          if (broken(eis, pick[p]->end, pick[p + 1]->start, term[p])) return;
        }
        Det d = merge(pick);
        d.start = pick.front()->start;
        d.end = pick.back()->end;
        out.push_back(d);
      });
      break;
    }

    case Expr::or_:
      for (const auto& i : e.items) {
        auto ds = eval(i, eis, strict);
        out.insert(out.end(), ds.begin(), ds.end());
      }
      break;

    case Expr::xor_: {
      std::vector<std::vector<Det>> lists;
      for (const auto& i : e.items) lists.push_back(eval(i, eis, strict));
      for (std::size_t i = 0; i < lists.size(); ++i) {
        bool others = false;
        for (std::size_t j = 0; j < lists.size(); ++j) {
          if (j != i && !lists[j].empty()) others = true;
        }
        if (!others) out.insert(out.end(), lists[i].begin(), lists[i].end());
      }
      break;
    }

    case Expr::and_:
    case Expr::conc: {
      std::vector<std::vector<Det>> lists;
      for (const auto& i : e.items) lists.push_back(eval(i, eis, strict));
      product(lists, [&](const std::vector<const Det*>& pick) {
        if (e.op == Expr::conc) {
          for (const Det* p : pick) {
            if (p->start != pick[0]->start || p->end != pick[0]->end) return;
          }
        }
        out.push_back(merge(pick));
      });
      break;
    }

    case Expr::neg: {
      auto as = eval(e.items[0], eis, strict);
      auto cs = eval(e.items[1], eis, strict);
      std::set<char> f(e.forbid.begin(), e.forbid.end());
      for (const auto& a : as) {
        for (const auto& c : cs) {
          if (!chainable(a, c) || broken(eis, a.end, c.start, f)) continue;
          Det d = merge({&a, &c});
          d.start = a.start;
          d.end = c.end;
          out.push_back(d);
        }
      }
      break;
    }

    case Expr::any: {
      auto xs = eval(e.items[0], eis, strict);
      std::stable_sort(xs.begin(), xs.end(), [](const Det& a, const Det& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
      });
      for (std::size_t k = 0; k + e.n <= xs.size(); k += e.n) {
        std::vector<const Det*> parts;
        for (std::size_t x = k; x < k + e.n; ++x) parts.push_back(&xs[x]);
        out.push_back(merge(parts));
      }
      break;
    }

    case Expr::aper: {
      auto xs = eval(e.items[0], eis, strict);
      auto as = eval(e.items[1], eis, strict);
      auto cs = eval(e.items[2], eis, strict);
      std::set<char> delim;
      symbols(e.items[1], delim);
      symbols(e.items[2], delim);
      for (const auto& a : as) {
        for (const auto& c : cs) {
          if (!chainable(a, c) || broken(eis, a.end, c.start, delim)) continue;
          for (const auto& x : xs) {
            if (a.start < x.start && x.end < c.end) out.push_back(x);
          }
        }
      }
      break;
    }
  }
  return out;
}

inline std::vector<Det> detect(const Expr& e, const Eis& eis, bool strict) {
  auto out = eval(e, eis, strict);
  std::sort(out.begin(), out.end());
  return out;
}

// All traces of the given length over `alphabet`; with `ties`, consecutive
// occurrences are 0 or 1 time units apart, otherwise exactly 1.
template <class F>
void for_each_eis(std::size_t length, const std::string& alphabet, bool ties, F&& f) {
  Eis eis(length);
  auto rec = [&](auto&& self, std::size_t i, std::int64_t t) -> void {
    if (i == length) {
      f(static_cast<const Eis&>(eis));
      return;
    }
    for (char c : alphabet) {
      if (!ties || i == 0) {
        eis[i] = {c, i == 0 ? 1 : t + 1};
        self(self, i + 1, eis[i].t);
      } else {
        for (int gap = 0; gap <= 1; ++gap) {
          eis[i] = {c, t + gap};
          self(self, i + 1, eis[i].t);
        }
      }
    }
  };
  rec(rec, 0, 0);
}

// Operator shapes covered by the equivalence suite.
inline std::vector<Expr> operator_shapes() {
  auto a = A('a'), b = A('b'), c = A('c');
  return {
      Seq({a, b}),
      Seq({a, b, c}),
      Seq({a, Seq({b, c})}),
      Seq({b, Seq({a, c})}),
      Seq({a, a}),
      Seq({a, b, a}),
      Seq({a, Or({b, c})}),
      Seq({And({a, b}), c}),
      Or({a, b}),
      Or({a, b, c}),
      Xor({a, b}),
      Xor({a, b, c}),
      Xor({a, Seq({b, c})}),
      And({a, b}),
      And({a, b, c}),
      And({a, a}),
      Conc({a, b}),
      Conc({a, b, c}),
      Conc({a, And({b, c})}),
      Neg({'b'}, a, c),
      Neg({'c'}, a, b),
      Neg({'b', 'c'}, a, a),
      Neg({'a'}, a, b),
      Any(1, b),
      Any(2, a),
      Any(3, a),
      Any(2, Or({a, b})),
      Aper(b, a, c),
      Aper(a, a, c),
      Aper(c, a, b),
      Aper(Seq({b, b}), a, c),
      Seq({a, Neg({'b'}, a, c), Or({a, b})}),
  };
}

}  // namespace oracle
