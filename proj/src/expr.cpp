#include "cvxquad/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <system_error>

namespace cvxquad::expr {

struct Expression::Node {
  Op op;
  double value = 0.0;
  std::optional<Expression> lhs;
  std::optional<Expression> rhs;
  bool constant = true;
};

namespace {

bool is_unary(Op op) {
  return op == Op::neg || op == Op::exp || op == Op::log || op == Op::sqrt || op == Op::abs;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::max: return "max";
    default: return "";
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------- tree

Expression Expression::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return Expression(std::move(n));
}

Expression Expression::variable() {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->constant = false;
  return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression operand) {
  if (!is_unary(op)) throw PreconditionError("not a unary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = operand.is_constant();
  n->lhs = std::move(operand);
  return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  if (op == Op::constant || op == Op::variable || is_unary(op)) {
    throw PreconditionError("not a binary operator");
  }
  if (op == Op::pow && !rhs.is_constant()) {
    throw PreconditionError("exponents must not depend on the variable");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->constant = lhs.is_constant() && rhs.is_constant();
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expression(std::move(n));
}

Op Expression::op() const noexcept { return node_->op; }
double Expression::value() const noexcept { return node_->value; }

const Expression& Expression::lhs() const {
  if (!node_->lhs) throw PreconditionError("leaf expression has no operand");
  return *node_->lhs;
}

const Expression& Expression::rhs() const {
  if (!node_->rhs) throw PreconditionError("expression has no right operand");
  return *node_->rhs;
}

bool Expression::is_constant() const noexcept { return node_->constant; }

bool Expression::contains(Op op) const noexcept {
  if (node_->op == op) return true;
  return (node_->lhs && node_->lhs->contains(op)) || (node_->rhs && node_->rhs->contains(op));
}

bool operator==(const Expression& x, const Expression& y) {
  if (x.node_ == y.node_) return true;
  const auto& a = *x.node_;
  const auto& b = *y.node_;
  if (a.op != b.op) return false;
  if (a.op == Op::constant) return a.value == b.value;
  return a.lhs == b.lhs && a.rhs == b.rhs;
}

// ---------------------------------------------------------------- tokenizer

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) {
    return k < src.size() && src[k] >= '0' && src[k] <= '9';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (digit(i) || (c == '.' && digit(i + 1))) {
      while (digit(i)) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (digit(i)) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t k = i + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (digit(k)) {
          i = k;
          while (digit(i)) ++i;
        }
      }
      out.push_back({Token::Kind::number, std::string(src.substr(start, i - start)), start + 1});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        ++i;
      }
      out.push_back(
          {Token::Kind::identifier, std::string(src.substr(start, i - start)), start + 1});
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({Token::Kind::op, std::string(1, c), start + 1});
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({Token::Kind::paren, std::string(1, c), start + 1});
      ++i;
    } else if (c == ',') {
      out.push_back({Token::Kind::comma, ",", start + 1});
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", start + 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, std::string_view variable)
      : tokens_(tokenize(src)), variable_(variable), end_(src.size() + 1) {}

  Expression parse() {
    if (tokens_.empty()) throw ParseError("empty expression", 1);
    Expression e = expression();
    if (pos_ < tokens_.size()) throw ParseError("unexpected '" + peek().text + "'", peek().position);
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool at_end() const { return pos_ >= tokens_.size(); }
  std::size_t position() const { return at_end() ? end_ : peek().position; }

  bool accept(Token::Kind kind, std::string_view text) {
    if (!at_end() && peek().kind == kind && peek().text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(Token::Kind kind, std::string_view text) {
    if (!accept(kind, text)) {
      throw ParseError("expected '" + std::string(text) + "'", position());
    }
  }

  Expression expression() {
    Expression e = term();
    while (true) {
      if (accept(Token::Kind::op, "+")) {
        e = Expression::binary(Op::add, e, term());
      } else if (accept(Token::Kind::op, "-")) {
        e = Expression::binary(Op::sub, e, term());
      } else {
        return e;
      }
    }
  }

  Expression term() {
    Expression e = unary();
    while (true) {
      if (accept(Token::Kind::op, "*")) {
        e = Expression::binary(Op::mul, e, unary());
      } else if (accept(Token::Kind::op, "/")) {
        e = Expression::binary(Op::div, e, unary());
      } else {
        return e;
      }
    }
  }

  Expression unary() {
    if (accept(Token::Kind::op, "-")) return Expression::unary(Op::neg, unary());
    return power();
  }

  Expression power() {
    Expression e = primary();
    while (!at_end() && peek().kind == Token::Kind::op && peek().text == "^") {
      const std::size_t at = peek().position;
      ++pos_;
      Expression exponent = exponent_operand();
      if (!exponent.is_constant()) throw ParseError("exponent must be constant", at);
      e = Expression::binary(Op::pow, e, exponent);
    }
    return e;
  }

  Expression exponent_operand() {
    if (accept(Token::Kind::op, "-")) return Expression::unary(Op::neg, exponent_operand());
    return primary();
  }

  Expression primary() {
    if (at_end()) throw ParseError("unexpected end of expression", end_);
    const Token tok = peek();
    switch (tok.kind) {
      case Token::Kind::number: {
        ++pos_;
        double v = 0.0;
        const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size()) {
          throw ParseError("malformed number '" + tok.text + "'", tok.position);
        }
        return Expression::constant(v);
      }
      case Token::Kind::identifier: {
        ++pos_;
        if (tok.text == variable_) return Expression::variable();
        if (tok.text == "pi") return Expression::constant(std::numbers::pi);
        return call(tok);
      }
      case Token::Kind::paren:
        if (tok.text == "(") {
          ++pos_;
          Expression e = expression();
          expect(Token::Kind::paren, ")");
          return e;
        }
        break;
      default:
        break;
    }
    throw ParseError("unexpected '" + tok.text + "'", tok.position);
  }

  Expression call(const Token& name) {
    Op op;
    if (name.text == "exp") {
      op = Op::exp;
    } else if (name.text == "log" || name.text == "ln") {
      op = Op::log;
    } else if (name.text == "sqrt") {
      op = Op::sqrt;
    } else if (name.text == "abs") {
      op = Op::abs;
    } else if (name.text == "max") {
      op = Op::max;
    } else {
      throw ParseError("unknown identifier '" + name.text + "'", name.position);
    }
    expect(Token::Kind::paren, "(");
    Expression first = expression();
    if (op == Op::max) {
      expect(Token::Kind::comma, ",");
      Expression second = expression();
      expect(Token::Kind::paren, ")");
      return Expression::binary(Op::max, first, second);
    }
    expect(Token::Kind::paren, ")");
    return Expression::unary(op, first);
  }

  std::vector<Token> tokens_;
  std::string variable_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view src, std::string_view variable) {
  return Parser(src, variable).parse();
}

// ---------------------------------------------------------------- printer

namespace {

int precedence(const Expression& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    default: return 5;
  }
}

void print(const Expression& e, std::string_view var, std::string& out);

void print_wrapped(const Expression& e, bool wrap, std::string_view var, std::string& out) {
  if (wrap) out += '(';
  print(e, var, out);
  if (wrap) out += ')';
}

void print(const Expression& e, std::string_view var, std::string& out) {
  switch (e.op()) {
    case Op::constant:
      if (std::signbit(e.value())) {
        out += '(' + format_number(e.value()) + ')';
      } else {
        out += format_number(e.value());
      }
      return;
    case Op::variable:
      out += var;
      return;
    case Op::neg:
      out += '-';
      print_wrapped(e.lhs(), precedence(e.lhs()) < 3, var, out);
      return;
    case Op::exp:
    case Op::log:
    case Op::sqrt:
    case Op::abs:
      out += function_name(e.op());
      print_wrapped(e.lhs(), true, var, out);
      return;
    case Op::max:
      out += "max(";
      print(e.lhs(), var, out);
      out += ", ";
      print(e.rhs(), var, out);
      out += ')';
      return;
    case Op::pow:
      print_wrapped(e.lhs(), precedence(e.lhs()) < 4, var, out);
      out += '^';
      print_wrapped(e.rhs(), precedence(e.rhs()) < 5 ||
                                 (e.rhs().op() == Op::constant && std::signbit(e.rhs().value())),
                    var, out);
      return;
    default: {
      const int p = precedence(e);
      print_wrapped(e.lhs(), precedence(e.lhs()) < p, var, out);
      switch (e.op()) {
        case Op::add: out += " + "; break;
        case Op::sub: out += " - "; break;
        case Op::mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_wrapped(e.rhs(), precedence(e.rhs()) <= p, var, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expression& e, std::string_view variable) {
  std::string out;
  print(e, variable, out);
  return out;
}

// ---------------------------------------------------------------- evaluation

namespace {

[[noreturn]] void singular(const Expression& e, const std::string& why, double t) {
  throw EvaluationError(why + " in " + to_string(e) + " at x = " + format_number(t));
}

double eval(const Expression& e, double t) {
  double r = 0.0;
  switch (e.op()) {
    case Op::constant: return e.value();
    case Op::variable: return t;
    case Op::neg: return -eval(e.lhs(), t);
    case Op::exp: r = std::exp(eval(e.lhs(), t)); break;
    case Op::log: {
      const double u = eval(e.lhs(), t);
      if (!(u > 0.0)) singular(e, "log of a nonpositive value", t);
      r = std::log(u);
      break;
    }
    case Op::sqrt: {
      const double u = eval(e.lhs(), t);
      if (u < 0.0) singular(e, "square root of a negative value", t);
      r = std::sqrt(u);
      break;
    }
    case Op::abs: return std::abs(eval(e.lhs(), t));
    case Op::add: r = eval(e.lhs(), t) + eval(e.rhs(), t); break;
    case Op::sub: r = eval(e.lhs(), t) - eval(e.rhs(), t); break;
    case Op::mul: r = eval(e.lhs(), t) * eval(e.rhs(), t); break;
    case Op::div: {
      const double num = eval(e.lhs(), t);
      const double den = eval(e.rhs(), t);
      if (den == 0.0) singular(e, "division by zero", t);
      r = num / den;
      break;
    }
    case Op::pow: r = std::pow(eval(e.lhs(), t), eval(e.rhs(), t)); break;
    case Op::max: r = std::max(eval(e.lhs(), t), eval(e.rhs(), t)); break;
  }
  if (!std::isfinite(r)) singular(e, "non-finite value", t);
  return r;
}

}  // namespace

double evaluate(const Expression& e, double t) { return eval(e, t); }

// ---------------------------------------------------------------- derivative

namespace {

bool is_value(const Expression& e, double v) {
  return e.op() == Op::constant && e.value() == v;
}

Expression fold(const Expression& e) { return Expression::constant(eval(e, 0.0)); }

Expression neg(const Expression& u) {
  if (u.op() == Op::constant) return Expression::constant(-u.value());
  if (u.op() == Op::neg) return u.lhs();
  return Expression::unary(Op::neg, u);
}

Expression add(const Expression& u, const Expression& v) {
  if (is_value(u, 0.0)) return v;
  if (is_value(v, 0.0)) return u;
  Expression e = Expression::binary(Op::add, u, v);
  return u.op() == Op::constant && v.op() == Op::constant ? fold(e) : e;
}

Expression sub(const Expression& u, const Expression& v) {
  if (is_value(v, 0.0)) return u;
  if (is_value(u, 0.0)) return neg(v);
  Expression e = Expression::binary(Op::sub, u, v);
  return u.op() == Op::constant && v.op() == Op::constant ? fold(e) : e;
}

Expression mul(const Expression& u, const Expression& v) {
  if (is_value(u, 0.0) || is_value(v, 0.0)) return Expression::constant(0.0);
  if (is_value(u, 1.0)) return v;
  if (is_value(v, 1.0)) return u;
  // u * (a / u) and (a / u) * u cancel to a
  if (v.op() == Op::div && v.rhs() == u) return v.lhs();
  if (u.op() == Op::div && u.rhs() == v) return u.lhs();
  Expression e = Expression::binary(Op::mul, u, v);
  return u.op() == Op::constant && v.op() == Op::constant ? fold(e) : e;
}

Expression div(const Expression& u, const Expression& v) {
  if (is_value(u, 0.0)) return Expression::constant(0.0);
  if (is_value(v, 1.0)) return u;
  if (u == v) return Expression::constant(1.0);
  if (v.op() == Op::constant && u.op() == Op::mul) {
    if (u.rhs() == v) return u.lhs();
    if (u.lhs() == v) return u.rhs();
  }
  Expression e = Expression::binary(Op::div, u, v);
  return u.op() == Op::constant && v.op() == Op::constant ? fold(e) : e;
}

Expression pow(const Expression& u, double c) {
  if (c == 0.0) return Expression::constant(1.0);
  if (c == 1.0) return u;
  return Expression::binary(Op::pow, u, Expression::constant(c));
}

// Sign of g over the sampled domain: +1, -1, or 0 when it switches or
// vanishes in the interior.
int branch_sign(const Expression& g, const Interval& domain, int samples) {
  bool pos = false;
  bool negative = false;
  bool interior_zero = false;
  for (int i = 0; i < samples; ++i) {
    const double t = i + 1 == samples
                         ? domain.b()
                         : domain.a() + domain.length() * static_cast<double>(i) / (samples - 1);
    double v = 0.0;
    try {
      v = eval(g, t);
    } catch (const EvaluationError&) {
      continue;
    }
    if (v > 0.0) pos = true;
    if (v < 0.0) negative = true;
    if (v == 0.0 && i > 0 && i + 1 < samples) interior_zero = true;
  }
  if (interior_zero || (pos && negative)) return 0;
  return negative ? -1 : 1;
}

struct Differentiator {
  const Interval* domain;
  int samples;

  [[noreturn]] void non_smooth(const Expression& e) const {
    throw NotDifferentiableError("no symbolic derivative for " + to_string(e) +
                                 " here; use finite differences");
  }

  Expression operator()(const Expression& e) const {
    switch (e.op()) {
      case Op::constant: return Expression::constant(0.0);
      case Op::variable: return Expression::constant(1.0);
      case Op::neg: return neg((*this)(e.lhs()));
      case Op::exp: return mul(e, (*this)(e.lhs()));
      case Op::log: return div((*this)(e.lhs()), e.lhs());
      case Op::sqrt:
        return div((*this)(e.lhs()), mul(Expression::constant(2.0), e));
      case Op::abs: {
        if (e.lhs().is_constant()) return Expression::constant(0.0);
        if (domain == nullptr) non_smooth(e);
        const int s = branch_sign(e.lhs(), *domain, samples);
        if (s == 0) non_smooth(e);
        return s > 0 ? (*this)(e.lhs()) : neg((*this)(e.lhs()));
      }
      case Op::max: {
        if (e.is_constant()) return Expression::constant(0.0);
        if (domain == nullptr) non_smooth(e);
        const int s = branch_sign(Expression::binary(Op::sub, e.lhs(), e.rhs()), *domain, samples);
        if (s == 0) non_smooth(e);
        return s > 0 ? (*this)(e.lhs()) : (*this)(e.rhs());
      }
      case Op::add: return add((*this)(e.lhs()), (*this)(e.rhs()));
      case Op::sub: return sub((*this)(e.lhs()), (*this)(e.rhs()));
      case Op::mul:
        return add(mul((*this)(e.lhs()), e.rhs()), mul(e.lhs(), (*this)(e.rhs())));
      case Op::div: {
        const Expression& u = e.lhs();
        const Expression& v = e.rhs();
        if (v.is_constant()) return div((*this)(u), v);
        return div(sub(mul((*this)(u), v), mul(u, (*this)(v))), pow(v, 2.0));
      }
      case Op::pow: {
        const double c = eval(e.rhs(), 0.0);
        return mul(mul(Expression::constant(c), pow(e.lhs(), c - 1.0)), (*this)(e.lhs()));
      }
    }
    non_smooth(e);
  }
};

}  // namespace

Expression derivative(const Expression& e) { return Differentiator{nullptr, 0}(e); }

Expression derivative(const Expression& e, const Interval& domain, int samples) {
  if (samples < 2) throw PreconditionError("derivative sampling needs at least 2 points");
  return Differentiator{&domain, samples}(e);
}

ConvexFunction to_function(const Expression& e, const Interval& domain, std::string label) {
  RealMap f = [e](double t) { return evaluate(e, t); };
  try {
    const Expression de = derivative(e, domain);
    RealMap df = [de](double t) { return evaluate(de, t); };
    return ConvexFunction(domain, f, df, df, std::move(label));
  } catch (const NotDifferentiableError&) {
    return ConvexFunction::from_values(domain, f, std::move(label));
  }
}

}  // namespace cvxquad::expr
