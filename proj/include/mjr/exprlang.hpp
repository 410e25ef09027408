#pragma once

// Small arithmetic expression language for time-varying rates and rewards.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 't' | 'x' | 'pi' | func '(' args ')' | '(' expr ')'
//
// Functions: sin cos exp log sqrt abs floor (one argument), min max (two).
// `t` is time and `x` is the state index read as a real.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "mjr/error.hpp"

namespace mjr {

namespace expr {

enum class Op : std::uint8_t {
  kNum,
  kT,
  kX,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kExp,
  kLog,
  kSqrt,
  kAbs,
  kFloor,
  kMin,
  kMax,
};

struct Node {
  Op op = Op::kNum;
  double value = 0.0;
  std::int32_t lhs = -1;
  std::int32_t rhs = -1;
};

inline int arity(Op op) {
  switch (op) {
    case Op::kNum:
    case Op::kT:
    case Op::kX:
      return 0;
    case Op::kNeg:
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kAbs:
    case Op::kFloor:
      return 1;
    default:
      return 2;
  }
}

inline std::optional<Op> function_op(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, Op>, 9> kTable{{
      {"sin", Op::kSin},
      {"cos", Op::kCos},
      {"exp", Op::kExp},
      {"log", Op::kLog},
      {"sqrt", Op::kSqrt},
      {"abs", Op::kAbs},
      {"floor", Op::kFloor},
      {"min", Op::kMin},
      {"max", Op::kMax},
  }};
  for (const auto& [n, op] : kTable) {
    if (n == name) return op;
  }
  return std::nullopt;
}

inline std::string_view function_name(Op op) {
  switch (op) {
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kAbs: return "abs";
    case Op::kFloor: return "floor";
    case Op::kMin: return "min";
    case Op::kMax: return "max";
    default: return "";
  }
}

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf.data(), end);
}

}  // namespace expr

// Immutable parsed expression. Copies share the node storage.
class Expr {
 public:
  Expr() = default;

  // Builds an expression from a node list whose last node is the root.
  explicit Expr(std::vector<expr::Node> nodes)
      : nodes_(std::make_shared<const std::vector<expr::Node>>(std::move(nodes))) {}

  static Expr constant(double v) { return Expr({expr::Node{expr::Op::kNum, v, -1, -1}}); }

  bool empty() const { return !nodes_ || nodes_->empty(); }
  const std::vector<expr::Node>& nodes() const { return *nodes_; }
  std::int32_t root() const { return static_cast<std::int32_t>(nodes_->size()) - 1; }

  double eval(double t, double x) const { return eval_node(root(), t, x); }

  bool depends_on_time() const { return uses(expr::Op::kT); }
  bool depends_on_state() const { return uses(expr::Op::kX); }

  std::string print() const { return empty() ? std::string{} : print_node(root()); }

 private:
  bool uses(expr::Op op) const {
    if (empty()) return false;
    for (const auto& n : *nodes_) {
      if (n.op == op) return true;
    }
    return false;
  }

  [[noreturn]] void domain_fail(std::int32_t i, const char* why, double t, double x) const {
    throw DomainError(std::string(why) + " in '" + print_node(i) + "' at t=" +
                      expr::format_double(t) + ", x=" + expr::format_double(x));
  }

  double eval_node(std::int32_t i, double t, double x) const {
    using expr::Op;
    const expr::Node& n = (*nodes_)[static_cast<std::size_t>(i)];
    double r = 0.0;
    switch (n.op) {
      case Op::kNum: return n.value;
      case Op::kT: return t;
      case Op::kX: return x;
      case Op::kNeg: return -eval_node(n.lhs, t, x);
      case Op::kAdd: r = eval_node(n.lhs, t, x) + eval_node(n.rhs, t, x); break;
      case Op::kSub: r = eval_node(n.lhs, t, x) - eval_node(n.rhs, t, x); break;
      case Op::kMul: r = eval_node(n.lhs, t, x) * eval_node(n.rhs, t, x); break;
      case Op::kDiv: {
        const double num = eval_node(n.lhs, t, x);
        const double den = eval_node(n.rhs, t, x);
        if (den == 0.0) domain_fail(i, "division by zero", t, x);
        r = num / den;
        break;
      }
      case Op::kPow: r = std::pow(eval_node(n.lhs, t, x), eval_node(n.rhs, t, x)); break;
      case Op::kSin: return std::sin(eval_node(n.lhs, t, x));
      case Op::kCos: return std::cos(eval_node(n.lhs, t, x));
      case Op::kExp: r = std::exp(eval_node(n.lhs, t, x)); break;
      case Op::kLog: {
        const double a = eval_node(n.lhs, t, x);
        if (!(a > 0.0)) domain_fail(i, "log of non-positive value", t, x);
        return std::log(a);
      }
      case Op::kSqrt: {
        const double a = eval_node(n.lhs, t, x);
        if (a < 0.0) domain_fail(i, "sqrt of negative value", t, x);
        return std::sqrt(a);
      }
      case Op::kAbs: return std::abs(eval_node(n.lhs, t, x));
      case Op::kFloor: return std::floor(eval_node(n.lhs, t, x));
      case Op::kMin: return std::min(eval_node(n.lhs, t, x), eval_node(n.rhs, t, x));
      case Op::kMax: return std::max(eval_node(n.lhs, t, x), eval_node(n.rhs, t, x));
    }
    if (!std::isfinite(r)) domain_fail(i, "non-finite result", t, x);
    return r;
  }

  std::string print_node(std::int32_t i) const {
    using expr::Op;
    const expr::Node& n = (*nodes_)[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::kNum:
        return n.value < 0.0 || std::signbit(n.value) ? "(" + expr::format_double(n.value) + ")"
                                                      : expr::format_double(n.value);
      case Op::kT: return "t";
      case Op::kX: return "x";
      case Op::kNeg: return "(-" + print_node(n.lhs) + ")";
      case Op::kAdd: return "(" + print_node(n.lhs) + " + " + print_node(n.rhs) + ")";
      case Op::kSub: return "(" + print_node(n.lhs) + " - " + print_node(n.rhs) + ")";
      case Op::kMul: return "(" + print_node(n.lhs) + " * " + print_node(n.rhs) + ")";
      case Op::kDiv: return "(" + print_node(n.lhs) + " / " + print_node(n.rhs) + ")";
      case Op::kPow: return "(" + print_node(n.lhs) + " ^ " + print_node(n.rhs) + ")";
      case Op::kMin:
      case Op::kMax:
        return std::string(expr::function_name(n.op)) + "(" + print_node(n.lhs) + ", " +
               print_node(n.rhs) + ")";
      default:
        return std::string(expr::function_name(n.op)) + "(" + print_node(n.lhs) + ")";
    }
  }

  std::shared_ptr<const std::vector<expr::Node>> nodes_;
};

namespace expr {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return Expr(std::move(nodes_));
  }

 private:
  std::int32_t push(Op op, double v = 0.0, std::int32_t a = -1, std::int32_t b = -1) {
    nodes_.push_back(Node{op, v, a, b});
    return static_cast<std::int32_t>(nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) {
        throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      }
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  std::int32_t parse_expr() {
    std::int32_t lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = push(Op::kAdd, 0.0, lhs, parse_term());
      } else if (accept('-')) {
        lhs = push(Op::kSub, 0.0, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_term() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = push(Op::kMul, 0.0, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = push(Op::kDiv, 0.0, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_unary() {
    if (accept('-')) return push(Op::kNeg, 0.0, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  std::int32_t parse_power() {
    const std::int32_t base = parse_primary();
    if (accept('^')) return push(Op::kPow, 0.0, base, parse_unary());
    return base;
  }

  std::int32_t parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const std::int32_t inner = parse_expr();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::int32_t parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc{}) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    return push(Op::kNum, v);
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  std::int32_t parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return push(Op::kT);
    if (name == "x") return push(Op::kX);
    if (name == "pi") return push(Op::kNum, std::numbers::pi);
    const auto op = function_op(name);
    if (!op) throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    expect('(');
    std::vector<std::int32_t> args;
    skip_ws();
    if (!accept(')')) {
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      expect(')');
    }
    const int want = arity(*op);
    if (static_cast<int>(args.size()) != want) {
      throw ParseError("function '" + std::string(name) + "' takes " + std::to_string(want) +
                           " argument(s), got " + std::to_string(args.size()),
                       start);
    }
    return push(*op, 0.0, args[0], want == 2 ? args[1] : -1);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace expr

inline Expr parse(std::string_view text) { return expr::Parser(text).run(); }

// A function of time (and of the state index) used for rates and rewards:
// value(t, x) = factor * expr(time_scale * t, x).
class TimeFunction {
 public:
  TimeFunction() : TimeFunction(Expr::constant(0.0)) {}
  explicit TimeFunction(Expr e, double time_scale = 1.0, double factor = 1.0)
      : expr_(std::move(e)), time_scale_(time_scale), factor_(factor) {
    if (!expr_.depends_on_time() && !expr_.depends_on_state()) {
      constant_ = factor_ * expr_.eval(0.0, 0.0);
    }
  }
  explicit TimeFunction(std::string_view text) : TimeFunction(parse(text)) {}
  static TimeFunction constant(double v) { return TimeFunction(Expr::constant(v)); }

  double operator()(double t, double x = 0.0) const {
    if (constant_) return *constant_;
    return factor_ * expr_.eval(time_scale_ * t, x);
  }

  bool is_constant() const { return constant_.has_value(); }
  const Expr& expr() const { return expr_; }
  double time_scale() const { return time_scale_; }
  double factor() const { return factor_; }

  // Same function on a clock running `scale` times faster, multiplied by `mult`.
  TimeFunction rescaled(double scale, double mult) const {
    return TimeFunction(expr_, time_scale_ * scale, factor_ * mult);
  }

  // Source text of the underlying expression with scale/factor folded in.
  std::string print() const {
    std::string body = expr_.print();
    if (time_scale_ != 1.0) {
      // Substitution by re-parsing keeps the printed form self-contained.
      std::string out;
      for (std::size_t i = 0; i < body.size(); ++i) {
        const bool ident_before = i > 0 && is_ident_char(body[i - 1]);
        const bool ident_after = i + 1 < body.size() && is_ident_char(body[i + 1]);
        if (body[i] == 't' && !ident_before && !ident_after) {
          out += "(" + expr::format_double(time_scale_) + " * t)";
        } else {
          out += body[i];
        }
      }
      body = std::move(out);
    }
    if (factor_ != 1.0) body = "(" + expr::format_double(factor_) + " * " + body + ")";
    return body;
  }

 private:
  static bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           (c >= '0' && c <= '9');
  }

  Expr expr_;
  double time_scale_ = 1.0;
  double factor_ = 1.0;
  std::optional<double> constant_;
};

}  // namespace mjr
