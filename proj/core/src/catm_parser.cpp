// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "atq/catm.hpp"
#include "atq/error.hpp"

namespace atq {

// ---------------------------------------------------------------------------
// Truth values

double numeric(Truth t) noexcept {
  switch (t) {
    case Truth::False:
      return 0.0;
    case Truth::Maybe:
      return 0.5;
    case Truth::True:
      return 1.0;
  }
  return 0.0;
}

std::string_view to_string(Truth t) noexcept {
  switch (t) {
    case Truth::False:
      return "FALSE";
    case Truth::Maybe:
      return "MAYBE";
    case Truth::True:
      return "TRUE";
  }
  return "FALSE";
}

Truth kleene_not(Truth t) noexcept {
  if (t == Truth::True) return Truth::False;
  if (t == Truth::False) return Truth::True;
  return Truth::Maybe;
}

Truth kleene_and(Truth a, Truth b) noexcept { return numeric(a) < numeric(b) ? a : b; }

// ---------------------------------------------------------------------------
// Builders

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  auto same = [](const FormulaPtr& x, const FormulaPtr& y) {
    if (!x || !y) return !x && !y;
    return *x == *y;
  };
  if (!same(a.lhs, b.lhs) || !same(a.rhs, b.rhs)) return false;
  if (a.kind == Formula::Kind::MetricLeq && a.threshold != b.threshold) return false;
  if (a.kind == Formula::Kind::Assign && !(a.bounds == b.bounds)) return false;
  return true;
}

namespace catm {

FormulaPtr atom(std::string id, std::size_t position) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->name = std::move(id);
  f->position = position;
  return f;
}

FormulaPtr neg(FormulaPtr g) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->position = g->position;
  f->lhs = std::move(g);
  return f;
}

FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::And;
  f->position = a->position;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return neg(conj(neg(std::move(a)), neg(std::move(b)))); }

FormulaPtr implies(FormulaPtr a, FormulaPtr b) { return neg(conj(std::move(a), neg(std::move(b)))); }

FormulaPtr iff(FormulaPtr a, FormulaPtr b) { return conj(implies(a, b), implies(b, a)); }

FormulaPtr xiff(FormulaPtr a, FormulaPtr b) { return neg(iff(std::move(a), std::move(b))); }

FormulaPtr metric_leq(std::string load, FormulaPtr phi, double threshold) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::MetricLeq;
  f->name = std::move(load);
  f->position = phi->position;
  f->lhs = std::move(phi);
  f->threshold = threshold;
  return f;
}

FormulaPtr assign(FormulaPtr body, std::string target, Interval bounds) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Assign;
  f->name = std::move(target);
  f->position = body->position;
  f->lhs = std::move(body);
  f->bounds = bounds;
  return f;
}

}  // namespace catm

bool is_layer2(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      return false;
    case Formula::Kind::Not:
      return is_layer2(*f.lhs);
    case Formula::Kind::And:
      return is_layer2(*f.lhs) || is_layer2(*f.rhs);
    case Formula::Kind::MetricLeq:
    case Formula::Kind::Assign:
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

enum class Tok {
  Ident, Not, And, Or, Implies, Iff, Xor, LParen, RParen, LBracket, RBracket,
  Comma, Leq, Eq, End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '@' ||
         c == '-';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto emit = [&](Tok k, std::size_t len) {
      out.push_back({k, std::string(s.substr(start, len)), start});
      i += len;
    };
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      emit(Tok::Ident, j - i);
    } else if (s.substr(i, 3) == "<=>") {
      emit(Tok::Iff, 3);
    } else if (s.substr(i, 2) == "<=") {
      emit(Tok::Leq, 2);
    } else if (s.substr(i, 2) == "=>") {
      emit(Tok::Implies, 2);
    } else {
      switch (c) {
        case '!': emit(Tok::Not, 1); break;
        case '&': emit(Tok::And, 1); break;
        case '|': emit(Tok::Or, 1); break;
        case '^': emit(Tok::Xor, 1); break;
        case '(': emit(Tok::LParen, 1); break;
        case ')': emit(Tok::RParen, 1); break;
        case '[': emit(Tok::LBracket, 1); break;
        case ']': emit(Tok::RBracket, 1); break;
        case ',': emit(Tok::Comma, 1); break;
        case '=': emit(Tok::Eq, 1); break;
        default:
          throw FormulaError(std::string("unexpected character '") + c + "'", i);
      }
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& s) { return s == "metric" || s == "set" || s == "in"; }

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {
    for (const auto& t : tokens_) {
      if (t.kind == Tok::Ident && (t.text == "metric" || t.text == "set")) layer2_ = true;
    }
  }

  FormulaPtr run() {
    auto f = expr(layer2_ ? 2 : 1);
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[i_]; }
  const Token& next() { return tokens_[i_++]; }
  [[noreturn]] void fail(const std::string& what) const { throw FormulaError(what, peek().pos); }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + what +
           (peek().kind == Tok::End ? " at end of input" : ", found '" + peek().text + "'"));
    }
    return next();
  }

  FormulaPtr expr(int layer) {
    auto lhs = implication(layer);
    while (peek().kind == Tok::Iff || peek().kind == Tok::Xor) {
      bool exclusive = next().kind == Tok::Xor;
      auto rhs = implication(layer);
      lhs = exclusive ? catm::xiff(lhs, rhs) : catm::iff(lhs, rhs);
    }
    return lhs;
  }

  FormulaPtr implication(int layer) {
    auto lhs = disjunction(layer);
    if (peek().kind == Tok::Implies) {
      next();
      return catm::implies(lhs, implication(layer));
    }
    return lhs;
  }

  FormulaPtr disjunction(int layer) {
    auto lhs = conjunction(layer);
    while (peek().kind == Tok::Or) {
      next();
      lhs = catm::disj(lhs, conjunction(layer));
    }
    return lhs;
  }

  FormulaPtr conjunction(int layer) {
    auto lhs = unary(layer);
    while (peek().kind == Tok::And) {
      next();
      lhs = catm::conj(lhs, unary(layer));
    }
    return lhs;
  }

  FormulaPtr unary(int layer) {
    if (peek().kind == Tok::Not) {
      next();
      return catm::neg(unary(layer));
    }
    return primary(layer);
  }

  FormulaPtr primary(int layer) {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      next();
      auto f = expr(layer);
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind != Tok::Ident) {
      fail(t.kind == Tok::End ? "unexpected end of formula" : "unexpected '" + t.text + "'");
    }
    if (t.text == "metric") {
      if (layer == 1) fail("metric() is not allowed inside a layer-1 formula");
      return metric();
    }
    if (t.text == "set") {
      if (layer == 1) fail("set is not allowed inside a layer-1 formula");
      return assignment();
    }
    if (t.text == "in") fail("unexpected keyword 'in'");
    if (layer == 2) fail("atom '" + t.text + "' outside metric() in a layer-2 formula");
    next();
    return catm::atom(t.text, t.pos);
  }

  double number(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) expect(Tok::Ident, what);
    std::string text = t.text;
    double x = 0;
    if (text == "inf" || text == "infinity") {
      x = kInfinity;
    } else {
      char* end = nullptr;
      x = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size() || text.empty()) fail(std::string("expected ") + what);
    }
    next();
    return x;
  }

  FormulaPtr metric() {
    const std::size_t at = next().pos;
    expect(Tok::LParen, "'(' after metric");
    const Token& load_tok = expect(Tok::Ident, "a load name");
    const Load* load = nullptr;
    try {
      load = &load_by_name(load_tok.text);
    } catch (const UnknownEntityError&) {
      throw FormulaError("unknown load '" + load_tok.text + "'", load_tok.pos);
    }
    expect(Tok::Comma, "','");
    auto phi = expr(1);
    expect(Tok::RParen, "')'");
    expect(Tok::Leq, "'<='");
    const std::size_t m_pos = peek().pos;
    double m = number("a threshold");
    if (!load->in_domain(m)) {
      throw FormulaError("threshold outside the domain of " + load->name, m_pos);
    }
    auto f = catm::metric_leq(load->name, phi, m);
    std::const_pointer_cast<Formula>(f)->position = at;
    return f;
  }

  FormulaPtr assignment() {
    const std::size_t at = next().pos;
    const Token& target = expect(Tok::Ident, "an assignment target");
    if (is_keyword(target.text)) throw FormulaError("keyword used as target", target.pos);
    expect(Tok::Eq, "'='");
    expect(Tok::LBracket, "'['");
    const std::size_t lo_pos = peek().pos;
    double lo = number("a lower bound");
    expect(Tok::Comma, "','");
    double hi = number("an upper bound");
    expect(Tok::RBracket, "']'");
    if (!(lo <= hi)) throw FormulaError("interval lower bound exceeds upper bound", lo_pos);
    const Token& in = expect(Tok::Ident, "'in'");
    if (in.text != "in") throw FormulaError("expected 'in'", in.pos);
    auto body = expr(2);
    auto f = catm::assign(body, target.text, {lo, hi});
    auto mut = std::const_pointer_cast<Formula>(f);
    mut->position = at;
    return f;
  }

  std::vector<Token> tokens_;
  std::size_t i_ = 0;
  bool layer2_ = false;
};

std::string number_text(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  if (std::strtod(buf, nullptr) != x) std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void print(const Formula& f, std::string& out) {
  auto wrapped = [&](const Formula& g, bool parens) {
    if (parens) out += '(';
    print(g, out);
    if (parens) out += ')';
  };
  switch (f.kind) {
    case Formula::Kind::Atom:
      out += f.name;
      break;
    case Formula::Kind::Not:
      out += '!';
      wrapped(*f.lhs, f.lhs->kind == Formula::Kind::And || f.lhs->kind == Formula::Kind::Assign ||
                          f.lhs->kind == Formula::Kind::MetricLeq);
      break;
    case Formula::Kind::And:
      wrapped(*f.lhs, f.lhs->kind == Formula::Kind::Assign);
      out += " & ";
      wrapped(*f.rhs, f.rhs->kind == Formula::Kind::And || f.rhs->kind == Formula::Kind::Assign);
      break;
    case Formula::Kind::MetricLeq:
      out += "metric(" + f.name + ", ";
      print(*f.lhs, out);
      out += ") <= " + number_text(f.threshold);
      break;
    case Formula::Kind::Assign:
      out += "set " + f.name + " = [" + number_text(f.bounds.lo) + ", " +
             number_text(f.bounds.hi) + "] in ";
      print(*f.lhs, out);
      break;
  }
}

}  // namespace

FormulaPtr parse_formula(std::string_view text) { return Parser(text).run(); }

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::set<NodeId> atoms(const Formula& f) {
  std::set<NodeId> out;
  auto walk = [&](auto&& self, const Formula& g) -> void {
    if (g.kind == Formula::Kind::Atom) out.insert(g.name);
    if (g.lhs) self(self, *g.lhs);
    if (g.rhs) self(self, *g.rhs);
  };
  walk(walk, f);
  return out;
}

}  // namespace atq
