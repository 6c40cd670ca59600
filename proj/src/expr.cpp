#include "tsvar/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace tsvar {

struct Expr::Node {
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind;
  double value = 0;
  std::size_t var = 0;
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

constexpr std::pair<const char*, Func> kFunctions[] = {
    {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
    {"log", Func::Log}, {"sqrt", Func::Sqrt},
};

const char* func_name(Func f) {
  for (auto& [name, fn] : kFunctions) {
    if (fn == f) return name;
  }
  return "?";
}

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Num;
  n->value = v;
  return n;
}

NodePtr make_var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->var = index;
  return n;
}

NodePtr make_call(Func f, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->lhs = std::move(arg);
  return n;
}

std::string print(const Node& n, const std::vector<std::string>& vars) {
  switch (n.kind) {
    case Kind::Num:
      return n.value < 0 || std::signbit(n.value) ? fmt::format("(-{})", -n.value)
                                                  : fmt::format("{}", n.value);
    case Kind::Var:
      return vars[n.var];
    case Kind::Neg:
      return "(-" + print(*n.lhs, vars) + ")";
    case Kind::Call:
      return std::string(func_name(n.func)) + "(" + print(*n.lhs, vars) + ")";
    default:
      break;
  }
  char op = n.kind == Kind::Add   ? '+'
            : n.kind == Kind::Sub ? '-'
            : n.kind == Kind::Mul ? '*'
            : n.kind == Kind::Div ? '/'
                                  : '^';
  return "(" + print(*n.lhs, vars) + op + print(*n.rhs, vars) + ")";
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr run() {
    skip();
    if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
    auto root = sum();
    skip();
    if (pos_ != s_.size()) throw ParseError(fmt::format("unexpected '{}'", s_[pos_]), pos_);
    return root;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    auto lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::Add, lhs, product());
      } else if (accept('-')) {
        lhs = make(Kind::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ == s_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  NodePtr number() {
    auto start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      auto save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) throw ParseError("malformed number", start);
    return make_number(v);
  }

  NodePtr name() {
    auto start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    std::string id = s_.substr(start, pos_ - start);
    for (auto& [fname, f] : kFunctions) {
      if (id == fname) {
        if (!accept('(')) throw ParseError(fmt::format("expected '(' after {}", id), pos_);
        auto arg = sum();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return make_call(f, arg);
      }
    }
    auto it = std::find(vars_.begin(), vars_.end(), id);
    if (it == vars_.end()) throw ParseError(fmt::format("undeclared variable '{}'", id), start);
    return make_var(static_cast<std::size_t>(it - vars_.begin()));
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

struct Evaluator {
  std::span<const double> env;
  std::span<const double> seed;  // empty: value only
  const std::vector<std::string>& vars;

  [[noreturn]] void fail(const std::string& what, const Node& n) const {
    auto sub = print(n, vars);
    throw DomainError(fmt::format("{} in {}", what, sub), sub);
  }

  static double ipow(double x, long long n) {
    bool invert = n < 0;
    unsigned long long e = invert ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    double result = 1.0;
    while (e) {
      if (e & 1ULL) result *= x;
      x *= x;
      e >>= 1ULL;
    }
    return invert ? 1.0 / result : result;
  }

  Dual run(const Node& n) const {
    switch (n.kind) {
      case Kind::Num:
        return {n.value, 0.0};
      case Kind::Var:
        return {env[n.var], seed.empty() ? 0.0 : seed[n.var]};
      case Kind::Neg: {
        auto a = run(*n.lhs);
        return {-a.value, -a.deriv};
      }
      case Kind::Add: {
        auto a = run(*n.lhs), b = run(*n.rhs);
        return {a.value + b.value, a.deriv + b.deriv};
      }
      case Kind::Sub: {
        auto a = run(*n.lhs), b = run(*n.rhs);
        return {a.value - b.value, a.deriv - b.deriv};
      }
      case Kind::Mul: {
        auto a = run(*n.lhs), b = run(*n.rhs);
        return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
      }
      case Kind::Div: {
        auto a = run(*n.lhs), b = run(*n.rhs);
        if (b.value == 0.0) fail("division by zero", n);
        double q = a.value / b.value;
        return {q, (a.deriv - q * b.deriv) / b.value};
      }
      case Kind::Pow:
        return power(n);
      case Kind::Call:
        return call(n);
    }
    return {};
  }

  Dual power(const Node& n) const {
    auto a = run(*n.lhs), b = run(*n.rhs);
    bool integral = b.deriv == 0.0 && std::trunc(b.value) == b.value && std::abs(b.value) < 1e9;
    if (integral) {
      auto k = static_cast<long long>(b.value);
      if (k < 0 && a.value == 0.0) fail("zero raised to a negative power", n);
      double value = ipow(a.value, k);
      double deriv = k == 0 ? 0.0 : static_cast<double>(k) * ipow(a.value, k - 1) * a.deriv;
      return {value, deriv};
    }
    if (a.value <= 0.0) fail("non-integer power of a non-positive base", n);
    double log_a = std::log(a.value);
    double value = std::exp(b.value * log_a);
    return {value, value * (b.deriv * log_a + b.value * a.deriv / a.value)};
  }

  Dual call(const Node& n) const {
    auto a = run(*n.lhs);
    switch (n.func) {
      case Func::Sin:
        return {std::sin(a.value), std::cos(a.value) * a.deriv};
      case Func::Cos:
        return {std::cos(a.value), -std::sin(a.value) * a.deriv};
      case Func::Exp: {
        double e = std::exp(a.value);
        return {e, e * a.deriv};
      }
      case Func::Log:
        if (a.value <= 0.0) fail("log of a non-positive value", n);
        return {std::log(a.value), a.deriv / a.value};
      case Func::Sqrt: {
        if (a.value < 0.0) fail("sqrt of a negative value", n);
        double r = std::sqrt(a.value);
        if (r == 0.0) {
          if (a.deriv != 0.0) fail("sqrt is not differentiable at 0", n);
          return {0.0, 0.0};
        }
        return {r, a.deriv / (2 * r)};
      }
    }
    return {};
  }
};

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(fmt::format("syntax error at offset {}: {}", position, message)),
      position_(position) {}

DomainError::DomainError(const std::string& message, std::string subexpression)
    : std::runtime_error("domain error: " + message), subexpression_(std::move(subexpression)) {}

Expr Expr::parse(const std::string& text, std::vector<std::string> variables) {
  auto vars = std::make_shared<const std::vector<std::string>>(std::move(variables));
  Parser p(text, *vars);
  return Expr(p.run(), vars);
}

Expr Expr::constant(double value, std::vector<std::string> variables) {
  return Expr(make_number(value), std::make_shared<const std::vector<std::string>>(std::move(variables)));
}

Expr Expr::variable(const std::string& name, std::vector<std::string> variables) {
  auto vars = std::make_shared<const std::vector<std::string>>(std::move(variables));
  auto it = std::find(vars->begin(), vars->end(), name);
  if (it == vars->end()) throw std::invalid_argument(fmt::format("undeclared variable '{}'", name));
  return Expr(make_var(static_cast<std::size_t>(it - vars->begin())), vars);
}

Expr Expr::combine(char op, const Expr& rhs) const {
  if (*variables_ != *rhs.variables_) throw std::invalid_argument("variable lists differ");
  Kind k = op == '+'   ? Kind::Add
           : op == '-' ? Kind::Sub
           : op == '*' ? Kind::Mul
           : op == '/' ? Kind::Div
                       : Kind::Pow;
  return Expr(make(k, root_, rhs.root_), variables_);
}

Expr Expr::operator+(const Expr& rhs) const { return combine('+', rhs); }
Expr Expr::operator-(const Expr& rhs) const { return combine('-', rhs); }
Expr Expr::operator*(const Expr& rhs) const { return combine('*', rhs); }
Expr Expr::operator/(const Expr& rhs) const { return combine('/', rhs); }
Expr Expr::pow(const Expr& exponent) const { return combine('^', exponent); }
Expr Expr::operator-() const { return Expr(make(Kind::Neg, root_), variables_); }
Expr Expr::apply(Func f) const { return Expr(make_call(f, root_), variables_); }

std::size_t Expr::variable_index(const std::string& name) const {
  auto it = std::find(variables_->begin(), variables_->end(), name);
  if (it == variables_->end()) throw std::invalid_argument(fmt::format("undeclared variable '{}'", name));
  return static_cast<std::size_t>(it - variables_->begin());
}

std::vector<double> Expr::positional(const std::map<std::string, double>& env, bool seed) const {
  std::vector<double> out(variables_->size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto it = env.find((*variables_)[i]);
    if (it == env.end()) {
      throw std::invalid_argument(fmt::format("{} does not bind variable '{}'",
                                              seed ? "seed" : "environment", (*variables_)[i]));
    }
    out[i] = it->second;
  }
  return out;
}

double Expr::eval(std::span<const double> env) const {
  if (env.size() != variables_->size()) throw std::invalid_argument("environment size mismatch");
  return Evaluator{env, {}, *variables_}.run(*root_).value;
}

double Expr::eval(const std::map<std::string, double>& env) const {
  auto e = positional(env, false);
  return eval(e);
}

Dual Expr::directional(std::span<const double> env, std::span<const double> seed) const {
  if (env.size() != variables_->size() || seed.size() != variables_->size()) {
    throw std::invalid_argument("environment or seed size mismatch");
  }
  return Evaluator{env, seed, *variables_}.run(*root_);
}

Dual Expr::directional(const std::map<std::string, double>& env,
                       const std::map<std::string, double>& seed) const {
  auto e = positional(env, false);
  auto s = positional(seed, true);
  return directional(e, s);
}

double Expr::partial(std::size_t var, std::span<const double> env) const {
  if (var >= variables_->size()) throw std::out_of_range("variable index out of range");
  std::vector<double> seed(variables_->size(), 0.0);
  seed[var] = 1.0;
  return directional(env, seed).deriv;
}

double Expr::partial(const std::string& var, const std::map<std::string, double>& env) const {
  auto e = positional(env, false);
  return partial(variable_index(var), e);
}

std::string Expr::to_string() const { return print(*root_, *variables_); }

}  // namespace tsvar
