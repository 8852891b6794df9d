#include "anisolab/expr.hpp"

#include <cassert>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

namespace anisolab::expr {

namespace {

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

// Negative constants are normalized to Neg(Constant) so that printing and
// reparsing reproduce the tree (the parser has no negative literals).
NodePtr const_node(double v, int offset = -1) {
  Node n;
  n.kind = Node::Kind::Constant;
  n.offset = offset;
  if (v < 0.0) {
    n.value = -v;
    Node neg;
    neg.kind = Node::Kind::Neg;
    neg.a = make_node(std::move(n));
    neg.offset = offset;
    return make_node(std::move(neg));
  }
  n.value = v == 0.0 ? 0.0 : v;  // flush -0.0
  return make_node(std::move(n));
}

// read a constant through an optional leading negation
bool constant_value(const NodePtr& p, double& out) {
  if (p->kind == Node::Kind::Constant) {
    out = p->value;
    return true;
  }
  if (p->kind == Node::Kind::Neg && p->a->kind == Node::Kind::Constant) {
    out = -p->a->value;
    return true;
  }
  return false;
}

NodePtr var_node(int i, int offset = -1) {
  Node n;
  n.kind = Node::Kind::Variable;
  n.var = i;
  n.offset = offset;
  return make_node(std::move(n));
}

bool is_const(const NodePtr& p, double v) {
  return p->kind == Node::Kind::Constant && p->value == v;
}

// Builders fold only the trivial identities (x+0, x*1, x*0, x^1, -0, ...).
// Anything beyond that is left alone: derivative trees may stay unsimplified.
NodePtr neg_node(NodePtr a) {
  if (is_const(a, 0.0)) return a;
  if (a->kind == Node::Kind::Neg) return a->a;
  Node n;
  n.kind = Node::Kind::Neg;
  n.a = std::move(a);
  return make_node(std::move(n));
}

NodePtr bin_node(BinOp op, NodePtr a, NodePtr b, int offset = -1) {
  switch (op) {
    case BinOp::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case BinOp::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return neg_node(std::move(b));
      break;
    case BinOp::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return const_node(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case BinOp::Div:
      if (is_const(a, 0.0)) return a;
      if (is_const(b, 1.0)) return a;
      break;
    case BinOp::Pow:
      if (is_const(b, 1.0)) return a;
      break;
  }
  Node n;
  n.kind = Node::Kind::Binary;
  n.op = op;
  n.a = std::move(a);
  n.b = std::move(b);
  n.offset = offset;
  return make_node(std::move(n));
}

NodePtr call_node(Func f, NodePtr a, int offset = -1) {
  Node n;
  n.kind = Node::Kind::Call;
  n.fn = f;
  n.a = std::move(a);
  n.offset = offset;
  return make_node(std::move(n));
}

std::optional<Func> func_from_name(std::string_view s) {
  if (s == "exp") return Func::Exp;
  if (s == "log") return Func::Log;
  if (s == "tanh") return Func::Tanh;
  if (s == "cosh") return Func::Cosh;
  if (s == "sinh") return Func::Sinh;
  if (s == "sqrt") return Func::Sqrt;
  if (s == "abs") return Func::Abs;
  if (s == "sin") return Func::Sin;
  if (s == "cos") return Func::Cos;
  return std::nullopt;
}

// ---------------------------------------------------------------- tokenizer

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Kind kind = Kind::End;
  double number = 0.0;
  std::string_view text;
  std::size_t offset = 0;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    char c = src_[pos_];
    switch (c) {
      case '+': tok_.kind = Token::Kind::Plus; ++pos_; return;
      case '-': tok_.kind = Token::Kind::Minus; ++pos_; return;
      case '*': tok_.kind = Token::Kind::Star; ++pos_; return;
      case '/': tok_.kind = Token::Kind::Slash; ++pos_; return;
      case '^': tok_.kind = Token::Kind::Caret; ++pos_; return;
      case '(': tok_.kind = Token::Kind::LParen; ++pos_; return;
      case ')': tok_.kind = Token::Kind::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      const char* end = src_.data() + src_.size();
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr == begin)
        throw ParseError("malformed number", pos_);
      tok_.kind = Token::Kind::Number;
      tok_.number = value;
      tok_.text = std::string_view(begin, static_cast<std::size_t>(ptr - begin));
      pos_ += tok_.text.size();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Kind::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// ------------------------------------------------------------------- parser

class Parser {
public:
  Parser(std::string_view src, int dim) : lex_(src), dim_(dim), len_(src.size()) {}

  NodePtr parse() {
    NodePtr e = parse_expr(0);
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      throw ParseError("unexpected trailing input", t.offset);
    return e;
  }

private:
  // Binding powers; higher binds tighter. Pow is right-associative.
  static int left_bp(Token::Kind k) {
    switch (k) {
      case Token::Kind::Plus:
      case Token::Kind::Minus: return 1;
      case Token::Kind::Star:
      case Token::Kind::Slash: return 3;
      case Token::Kind::Caret: return 8;
      default: return -1;
    }
  }
  static int right_bp(Token::Kind k) {
    switch (k) {
      case Token::Kind::Plus:
      case Token::Kind::Minus: return 2;
      case Token::Kind::Star:
      case Token::Kind::Slash: return 4;
      case Token::Kind::Caret: return 7;  // right-associative
      default: return -1;
    }
  }
  static constexpr int kUnaryBp = 6;  // between mul and pow

  NodePtr parse_expr(int min_bp) {
    NodePtr lhs = parse_prefix();
    for (;;) {
      Token t = lex_.peek();
      int lbp = left_bp(t.kind);
      if (lbp < 0 || lbp < min_bp) break;
      lex_.take();
      NodePtr rhs = parse_expr(right_bp(t.kind));
      BinOp op;
      switch (t.kind) {
        case Token::Kind::Plus: op = BinOp::Add; break;
        case Token::Kind::Minus: op = BinOp::Sub; break;
        case Token::Kind::Star: op = BinOp::Mul; break;
        case Token::Kind::Slash: op = BinOp::Div; break;
        default: op = BinOp::Pow; break;
      }
      lhs = bin_node(op, std::move(lhs), std::move(rhs), static_cast<int>(t.offset));
    }
    return lhs;
  }

  NodePtr parse_prefix() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Number:
        return const_node(t.number, static_cast<int>(t.offset));
      case Token::Kind::Minus: {
        NodePtr operand = parse_expr(kUnaryBp);
        Node n;
        n.kind = Node::Kind::Neg;
        n.a = std::move(operand);
        n.offset = static_cast<int>(t.offset);
        return make_node(std::move(n));
      }
      case Token::Kind::LParen: {
        NodePtr inner = parse_expr(0);
        Token close = lex_.take();
        if (close.kind != Token::Kind::RParen)
          throw ParseError("expected ')'", close.kind == Token::Kind::End ? len_ : close.offset);
        return inner;
      }
      case Token::Kind::Ident: {
        if (t.text.size() >= 2 && t.text[0] == 'x') {
          bool digits = true;
          for (std::size_t i = 1; i < t.text.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t.text[i]))) digits = false;
          if (digits) {
            int idx = std::atoi(std::string(t.text.substr(1)).c_str());
            if (idx < 1 || idx > dim_)
              throw ParseError("variable index out of range (dimension " +
                                   std::to_string(dim_) + ")",
                               t.offset);
            return var_node(idx, static_cast<int>(t.offset));
          }
        }
        if (auto f = func_from_name(t.text)) {
          Token open = lex_.take();
          if (open.kind != Token::Kind::LParen)
            throw ParseError("expected '(' after function name",
                             open.kind == Token::Kind::End ? len_ : open.offset);
          NodePtr arg = parse_expr(0);
          Token close = lex_.take();
          if (close.kind != Token::Kind::RParen)
            throw ParseError("expected ')'", close.kind == Token::Kind::End ? len_ : close.offset);
          return call_node(*f, std::move(arg), static_cast<int>(t.offset));
        }
        throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
      }
      case Token::Kind::End:
        throw ParseError("unexpected end of input", len_);
      default:
        throw ParseError("unexpected token", t.offset);
    }
  }

  Lexer lex_;
  int dim_;
  std::size_t len_;
};

// --------------------------------------------------------------- evaluation

bool integral_exponent(double e) { return std::floor(e) == e && std::abs(e) < 1e15; }

double eval_node(const Node& n, std::span<const double> x) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.value;
    case Node::Kind::Variable:
      return x[static_cast<std::size_t>(n.var - 1)];
    case Node::Kind::Neg:
      return -eval_node(*n.a, x);
    case Node::Kind::Binary: {
      double a = eval_node(*n.a, x);
      double b = eval_node(*n.b, x);
      switch (n.op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (b == 0.0) throw EvalError("division by zero", n.offset);
          return a / b;
        case BinOp::Pow:
          if (a < 0.0 && !integral_exponent(b))
            throw EvalError("negative base with non-integer exponent", n.offset);
          if (a == 0.0 && b < 0.0) throw EvalError("zero base with negative exponent", n.offset);
          return std::pow(a, b);
      }
      return 0.0;
    }
    case Node::Kind::Call: {
      double a = eval_node(*n.a, x);
      switch (n.fn) {
        case Func::Exp: return std::exp(a);
        case Func::Log:
          if (a <= 0.0) throw EvalError("log of non-positive argument", n.offset);
          return std::log(a);
        case Func::Tanh: return std::tanh(a);
        case Func::Cosh: return std::cosh(a);
        case Func::Sinh: return std::sinh(a);
        case Func::Sqrt:
          if (a < 0.0) throw EvalError("sqrt of negative argument", n.offset);
          return std::sqrt(a);
        case Func::Abs: return std::abs(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

// ------------------------------------------------------------------ derivative

NodePtr diff_node(const NodePtr& n, int var) {
  switch (n->kind) {
    case Node::Kind::Constant:
      return const_node(0.0);
    case Node::Kind::Variable:
      return const_node(n->var == var ? 1.0 : 0.0);
    case Node::Kind::Neg:
      return neg_node(diff_node(n->a, var));
    case Node::Kind::Binary: {
      NodePtr da = diff_node(n->a, var);
      NodePtr db = diff_node(n->b, var);
      switch (n->op) {
        case BinOp::Add: return bin_node(BinOp::Add, da, db);
        case BinOp::Sub: return bin_node(BinOp::Sub, da, db);
        case BinOp::Mul:
          return bin_node(BinOp::Add, bin_node(BinOp::Mul, da, n->b),
                          bin_node(BinOp::Mul, n->a, db));
        case BinOp::Div:
          return bin_node(
              BinOp::Div,
              bin_node(BinOp::Sub, bin_node(BinOp::Mul, da, n->b),
                       bin_node(BinOp::Mul, n->a, db)),
              bin_node(BinOp::Pow, n->b, const_node(2.0)));
        case BinOp::Pow: {
          double c = 0.0;
          if (constant_value(n->b, c)) {
            // c * a^(c-1) * a'
            return bin_node(
                BinOp::Mul,
                bin_node(BinOp::Mul, const_node(c),
                         bin_node(BinOp::Pow, n->a, const_node(c - 1.0))),
                da);
          }
          // a^b * (b' log a + b a'/a), needs a > 0 at evaluation time
          NodePtr t1 = bin_node(BinOp::Mul, db, call_node(Func::Log, n->a));
          NodePtr t2 = bin_node(BinOp::Div, bin_node(BinOp::Mul, n->b, da), n->a);
          return bin_node(BinOp::Mul, n, bin_node(BinOp::Add, t1, t2));
        }
      }
      return const_node(0.0);
    }
    case Node::Kind::Call: {
      NodePtr da = diff_node(n->a, var);
      NodePtr outer;
      switch (n->fn) {
        case Func::Exp: outer = call_node(Func::Exp, n->a); break;
        case Func::Log: return bin_node(BinOp::Div, da, n->a);
        case Func::Tanh:
          outer = bin_node(BinOp::Div, const_node(1.0),
                           bin_node(BinOp::Pow, call_node(Func::Cosh, n->a), const_node(2.0)));
          break;
        case Func::Cosh: outer = call_node(Func::Sinh, n->a); break;
        case Func::Sinh: outer = call_node(Func::Cosh, n->a); break;
        case Func::Sqrt:
          return bin_node(BinOp::Div, da,
                          bin_node(BinOp::Mul, const_node(2.0), call_node(Func::Sqrt, n->a)));
        case Func::Abs:
          // a/|a| * a'; not differentiable at 0, reported as division by zero
          return bin_node(BinOp::Div, bin_node(BinOp::Mul, n->a, da),
                          call_node(Func::Abs, n->a));
        case Func::Sin: outer = call_node(Func::Cos, n->a); break;
        case Func::Cos: outer = neg_node(call_node(Func::Sin, n->a)); break;
      }
      return bin_node(BinOp::Mul, outer, da);
    }
  }
  return const_node(0.0);
}

// -------------------------------------------------------------------- print

int node_prec(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Binary:
      switch (n.op) {
        case BinOp::Add:
        case BinOp::Sub: return 1;
        case BinOp::Mul:
        case BinOp::Div: return 3;
        case BinOp::Pow: return 8;
      }
      return 0;
    case Node::Kind::Neg: return 6;
    default: return 100;
  }
}

void print_node(const Node& n, std::string& out);

void print_child(const NodePtr& child, int parent_prec, bool tighten, std::string& out) {
  bool parens = node_prec(*child) < parent_prec + (tighten ? 1 : 0);
  if (parens) out += '(';
  print_node(*child, out);
  if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Constant: {
      char buf[40];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), n.value);
      (void)ec;
      out.append(buf, ptr);
      return;
    }
    case Node::Kind::Variable:
      out += 'x';
      out += std::to_string(n.var);
      return;
    case Node::Kind::Neg:
      out += '-';
      print_child(n.a, node_prec(n), true, out);
      return;
    case Node::Kind::Binary: {
      const int p = node_prec(n);
      const char* sym = "?";
      bool right_tighten = true, left_tighten = false;
      switch (n.op) {
        case BinOp::Add: sym = " + "; break;
        case BinOp::Sub: sym = " - "; break;
        case BinOp::Mul: sym = "*"; break;
        case BinOp::Div: sym = "/"; break;
        case BinOp::Pow: sym = "^"; left_tighten = true; right_tighten = false; break;
      }
      print_child(n.a, p, left_tighten, out);
      out += sym;
      print_child(n.b, p, right_tighten, out);
      return;
    }
    case Node::Kind::Call:
      out += func_name(n.fn);
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
  }
}

bool same_node(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Constant: return a.value == b.value;
    case Node::Kind::Variable: return a.var == b.var;
    case Node::Kind::Neg: return same_node(*a.a, *b.a);
    case Node::Kind::Binary:
      return a.op == b.op && same_node(*a.a, *b.a) && same_node(*a.b, *b.b);
    case Node::Kind::Call: return a.fn == b.fn && same_node(*a.a, *b.a);
  }
  return false;
}

}  // namespace

const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Tanh: return "tanh";
    case Func::Cosh: return "cosh";
    case Func::Sinh: return "sinh";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
  }
  return "?";
}

Expr Expr::parse(std::string_view source, int dim) {
  if (source.empty()) throw ParseError("empty expression", 0);
  if (dim < 0) throw ParseError("negative dimension", 0);
  Parser p(source, dim);
  return Expr(p.parse(), dim);
}

double Expr::eval(std::span<const double> x) const {
  if (!root_) throw EvalError("evaluating empty expression", -1);
  if (static_cast<int>(x.size()) < dim_)
    throw EvalError("point has fewer coordinates than expression dimension", -1);
  return eval_node(*root_, x);
}

Expr Expr::diff(int var) const {
  if (!root_) throw EvalError("differentiating empty expression", -1);
  if (var < 1 || var > dim_) throw EvalError("derivative variable out of range", -1);
  return Expr(diff_node(root_, var), dim_);
}

std::string Expr::to_string() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::same_tree(const Expr& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return same_node(*root_, *other.root_);
}

Expr Expr::constant(double v) { return Expr(const_node(v), 0); }

Expr Expr::variable(int i, int dim) {
  if (i < 1 || i > dim) throw ParseError("variable index out of range", 0);
  return Expr(var_node(i), dim);
}

Expr Expr::neg(Expr a) { return Expr(neg_node(a.root_), a.dim_); }

Expr Expr::add(Expr a, Expr b) {
  return Expr(bin_node(BinOp::Add, a.root_, b.root_), std::max(a.dim_, b.dim_));
}
Expr Expr::sub(Expr a, Expr b) {
  return Expr(bin_node(BinOp::Sub, a.root_, b.root_), std::max(a.dim_, b.dim_));
}
Expr Expr::mul(Expr a, Expr b) {
  return Expr(bin_node(BinOp::Mul, a.root_, b.root_), std::max(a.dim_, b.dim_));
}
Expr Expr::div(Expr a, Expr b) {
  return Expr(bin_node(BinOp::Div, a.root_, b.root_), std::max(a.dim_, b.dim_));
}
Expr Expr::pow(Expr a, Expr b) {
  return Expr(bin_node(BinOp::Pow, a.root_, b.root_), std::max(a.dim_, b.dim_));
}
Expr Expr::call(Func f, Expr a) { return Expr(call_node(f, a.root_), a.dim_); }

}  // namespace anisolab::expr
