#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsvar {

/// Value and directional derivative carried together through evaluation.
struct Dual {
  double value = 0;
  double deriv = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& message, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Func { Sin, Cos, Exp, Log, Sqrt };

/// Parsed arithmetic expression over a fixed, ordered list of variables.
///
/// Grammar (whitespace ignored):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          right associative
///   primary := number | name | func '(' sum ')' | '(' sum ')'
///
/// Environments are positional and follow variables().
class Expr {
 public:
  struct Node;

  static Expr parse(const std::string& text, std::vector<std::string> variables);

  // Builders used by generators and tests.
  static Expr constant(double value, std::vector<std::string> variables);
  static Expr variable(const std::string& name, std::vector<std::string> variables);
  Expr operator+(const Expr& rhs) const;
  Expr operator-(const Expr& rhs) const;
  Expr operator*(const Expr& rhs) const;
  Expr operator/(const Expr& rhs) const;
  Expr operator-() const;
  Expr pow(const Expr& exponent) const;
  Expr apply(Func f) const;

  const std::vector<std::string>& variables() const { return *variables_; }
  std::size_t variable_index(const std::string& name) const;

  double eval(std::span<const double> env) const;
  double eval(const std::map<std::string, double>& env) const;
  /// Value and gradient-dot-seed in one forward pass.
  Dual directional(std::span<const double> env, std::span<const double> seed) const;
  Dual directional(const std::map<std::string, double>& env,
                   const std::map<std::string, double>& seed) const;
  double partial(std::size_t var, std::span<const double> env) const;
  double partial(const std::string& var, const std::map<std::string, double>& env) const;

  /// Fully parenthesised text that parses back to an equivalent tree.
  std::string to_string() const;

 private:
  Expr(std::shared_ptr<const Node> root, std::shared_ptr<const std::vector<std::string>> vars)
      : root_(std::move(root)), variables_(std::move(vars)) {}
  Expr combine(char op, const Expr& rhs) const;
  std::vector<double> positional(const std::map<std::string, double>& env, bool seed) const;

  std::shared_ptr<const Node> root_;
  std::shared_ptr<const std::vector<std::string>> variables_;
};

}  // namespace tsvar
