#pragma once

// Tiny arithmetic grammar for inline sequences and kernels:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | '(' expr ')'
//
// Variables are k, l, m, n (indices) and r, s, t, u (B parameters).
// Exponents must evaluate to integers.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsum/matrix4d.hpp"
#include "dsum/seqcore.hpp"

namespace dsum {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line_(line), column_(column) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_, column_;
};

struct ExprEnv {
  Scalar k = 0, l = 0, m = 0, n = 0;
  Scalar r = 0, s = 0, t = 0, u = 0;
};

class Expr {
 public:
  enum class Op { num, var, neg, add, sub, mul, div, pow };

  [[nodiscard]] Scalar eval(const ExprEnv& env) const {
    switch (op_) {
      case Op::num: return value_;
      case Op::var: return lookup(env);
      case Op::neg: return -lhs_->eval(env);
      case Op::add: return lhs_->eval(env) + rhs_->eval(env);
      case Op::sub: return lhs_->eval(env) - rhs_->eval(env);
      case Op::mul: return lhs_->eval(env) * rhs_->eval(env);
      case Op::div: return lhs_->eval(env) / rhs_->eval(env);
      case Op::pow: return int_pow(lhs_->eval(env), rhs_->eval(env));
    }
    return 0.0;
  }

  /// True if the variable appears anywhere in the tree.
  [[nodiscard]] bool uses(char v) const {
    if (op_ == Op::var) return var_ == v;
    return (lhs_ && lhs_->uses(v)) || (rhs_ && rhs_->uses(v));
  }

  static std::shared_ptr<Expr> number(Scalar v) {
    auto e = std::make_shared<Expr>();
    e->op_ = Op::num;
    e->value_ = v;
    return e;
  }
  static std::shared_ptr<Expr> variable(char v) {
    auto e = std::make_shared<Expr>();
    e->op_ = Op::var;
    e->var_ = v;
    return e;
  }
  static std::shared_ptr<Expr> node(Op op, std::shared_ptr<Expr> a, std::shared_ptr<Expr> b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->op_ = op;
    e->lhs_ = std::move(a);
    e->rhs_ = std::move(b);
    return e;
  }

 private:
  Scalar lookup(const ExprEnv& env) const {
    switch (var_) {
      case 'k': return env.k;
      case 'l': return env.l;
      case 'm': return env.m;
      case 'n': return env.n;
      case 'r': return env.r;
      case 's': return env.s;
      case 't': return env.t;
      case 'u': return env.u;
    }
    return 0.0;
  }

  static Scalar int_pow(Scalar base, Scalar e) {
    const Scalar re = std::round(e);
    if (std::abs(e - re) > 1e-12 || std::abs(re) > 1e6) throw Error("expression: exponent must be an integer");
    const auto n = static_cast<long long>(std::abs(re));
    Scalar r = 1.0;
    for (long long i = 0; i < n; ++i) r *= base;
    return re < 0 ? 1.0 / r : r;
  }

  Op op_ = Op::num;
  Scalar value_ = 0.0;
  char var_ = 0;
  std::shared_ptr<Expr> lhs_, rhs_;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(const std::string& text, std::size_t line, std::size_t col0) : s_(text), line_(line), col0_(col0) {}

  std::shared_ptr<Expr> parse() {
    auto e = expr();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col0_ + i_); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool accept(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  std::shared_ptr<Expr> expr() {
    auto e = term();
    for (;;) {
      if (accept('+')) e = Expr::node(Expr::Op::add, e, term());
      else if (accept('-')) e = Expr::node(Expr::Op::sub, e, term());
      else return e;
    }
  }
  std::shared_ptr<Expr> term() {
    auto e = unary();
    for (;;) {
      if (accept('*')) e = Expr::node(Expr::Op::mul, e, unary());
      else if (accept('/')) e = Expr::node(Expr::Op::div, e, unary());
      else return e;
    }
  }
  std::shared_ptr<Expr> unary() {
    if (accept('-')) return Expr::node(Expr::Op::neg, unary());
    return power();
  }
  std::shared_ptr<Expr> power() {
    auto b = primary();
    if (accept('^')) return Expr::node(Expr::Op::pow, b, unary());
    return b;
  }
  std::shared_ptr<Expr> primary() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      auto e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = i_;
      std::size_t used = 0;
      Scalar v = 0.0;
      try {
        v = std::stod(s_.substr(start), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      i_ = start + used;
      return Expr::number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      const std::string id = s_.substr(start, i_ - start);
      if (id.size() == 1 && std::string("klmnrstu").find(id[0]) != std::string::npos) return Expr::variable(id[0]);
      i_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t line_, col0_;
  std::size_t i_ = 0;
};

inline ExprEnv params_env(const std::optional<BParams>& p) {
  ExprEnv env;
  if (p) {
    env.r = p->r();
    env.s = p->s();
    env.t = p->t();
    env.u = p->u();
  }
  return env;
}

inline void require_params(const Expr& e, const std::optional<BParams>& p) {
  if (!p && (e.uses('r') || e.uses('s') || e.uses('t') || e.uses('u')))
    throw Error("expression uses r, s, t or u but no B parameters were given");
}

}  // namespace detail

/// Parses text; line and first_column locate it in an enclosing file.
inline std::shared_ptr<Expr> parse_expr(const std::string& text, std::size_t line = 1, std::size_t first_column = 1) {
  return detail::ExprParser(text, line, first_column).parse();
}

/// x_{kl} from an expression in k, l (and r, s, t, u).
inline DoubleSequence expr_sequence(const std::string& text, const std::optional<BParams>& p = std::nullopt,
                                    std::size_t line = 1, std::size_t first_column = 1) {
  auto e = parse_expr(text, line, first_column);
  if (e->uses('m') || e->uses('n')) throw ParseError("sequence expressions take only k and l", line, first_column);
  detail::require_params(*e, p);
  const ExprEnv base = detail::params_env(p);
  return DoubleSequence(
      [e, base](std::size_t k, std::size_t l) {
        ExprEnv env = base;
        env.k = static_cast<Scalar>(k);
        env.l = static_cast<Scalar>(l);
        return e->eval(env);
      },
      text);
}

/// a_{mnkl} from an expression in m, n, k, l (and r, s, t, u).
inline FourDimMatrix expr_kernel(const std::string& text, bool triangular, const std::optional<BParams>& p = std::nullopt,
                                 std::size_t line = 1, std::size_t first_column = 1) {
  auto e = parse_expr(text, line, first_column);
  detail::require_params(*e, p);
  const ExprEnv base = detail::params_env(p);
  return FourDimMatrix(
      [e, base](std::size_t m, std::size_t n, std::size_t k, std::size_t l) {
        ExprEnv env = base;
        env.m = static_cast<Scalar>(m);
        env.n = static_cast<Scalar>(n);
        env.k = static_cast<Scalar>(k);
        env.l = static_cast<Scalar>(l);
        return e->eval(env);
      },
      triangular, text);
}

}  // namespace dsum
