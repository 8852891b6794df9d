#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace anisolab::expr {

/// Functions admitted in expression source. The set is closed on purpose:
/// every weight, advection and candidate profile used by the lab is
/// expressible with it.
enum class Func { Exp, Log, Tanh, Cosh, Sinh, Sqrt, Abs, Sin, Cos };

enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Constant, Variable, Neg, Binary, Call };
  Kind kind = Kind::Constant;
  double value = 0.0;  // Kind::Constant
  int var = 0;         // Kind::Variable, 1-based
  BinOp op = BinOp::Add;
  Func fn = Func::Exp;
  NodePtr a, b;    // operands: a for Neg/Call, a/b for Binary
  int offset = -1; // byte offset in the source, -1 for synthesized nodes
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
  EvalError(const std::string& what, int offset)
      : std::runtime_error(offset >= 0 ? what + " (node at byte " + std::to_string(offset) + ")"
                                       : what + " (synthesized node)"),
        offset_(offset) {}
  int offset() const { return offset_; }

private:
  int offset_;
};

/// Immutable expression tree over variables x1..xd. Evaluation is pure and
/// deterministic; instances are safe to share across threads.
class Expr {
public:
  Expr() = default;

  /// Parse `source` as an expression in x1..xd.
  /// Precedence: ^  >  unary -  >  * /  >  + -, with ^ right-associative
  /// and all other binaries left-associative.
  static Expr parse(std::string_view source, int dim);

  double eval(std::span<const double> x) const;
  double eval1(double x) const { return eval(std::span<const double>(&x, 1)); }

  /// Symbolic partial derivative with respect to x_i (1-based).
  Expr diff(int var) const;

  std::string to_string() const;

  int dim() const { return dim_; }
  bool empty() const { return root_ == nullptr; }

  /// Structural equality, ignoring source offsets.
  bool same_tree(const Expr& other) const;

  // Tree builders for programmatic assembly (used by weights, oracles, ...).
  static Expr constant(double v);
  static Expr variable(int i, int dim);
  static Expr neg(Expr a);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr div(Expr a, Expr b);
  static Expr pow(Expr a, Expr b);
  static Expr call(Func f, Expr a);

private:
  Expr(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  NodePtr root_;
  int dim_ = 0;
};

const char* func_name(Func f);

}  // namespace anisolab::expr
