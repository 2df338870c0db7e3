#pragma once

/// Coordinate expressions: the component functions g_ij(x), J^i_j(x) and
/// embedding maps of a chart.
///
/// Surface syntax (whitespace insignificant):
///
///     expr     := term (('+' | '-') term)*
///     term     := unary (('*' | '/') unary)*
///     unary    := '-' unary | power
///     power    := primary ('^' exponent)*
///     exponent := '-' exponent | primary
///     primary  := number | x<k> | name | func '(' expr ')' | '(' expr ')'
///     func     := sin | cos | exp | sqrt
///
/// Coordinates are x1..x<dim> in text and 0-based internally. Exponents may
/// not depend on coordinates.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/jets.hpp"

namespace ahlab {

using Bindings = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  enum class Kind { constant, coordinate, parameter, unary, binary };
  enum class Unary { neg, sin, cos, exp, sqrt };
  enum class Binary { add, sub, mul, div, pow };

  struct Node {
    Kind kind = Kind::constant;
    double value = 0.0;
    int index = 0;
    std::string name;
    Unary unary_op = Unary::neg;
    Binary binary_op = Binary::add;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v) {
    Node n;
    n.kind = Kind::constant;
    n.value = v;
    return Expr(std::move(n));
  }
  static Expr coordinate(int i) {
    Node n;
    n.kind = Kind::coordinate;
    n.index = i;
    return Expr(std::move(n));
  }
  static Expr parameter(std::string name) {
    Node n;
    n.kind = Kind::parameter;
    n.name = std::move(name);
    return Expr(std::move(n));
  }
  static Expr unary(Unary op, const Expr& a) {
    Node n;
    n.kind = Kind::unary;
    n.unary_op = op;
    n.lhs = a.node_;
    return Expr(std::move(n));
  }
  static Expr binary(Binary op, const Expr& a, const Expr& b) {
    Node n;
    n.kind = Kind::binary;
    n.binary_op = op;
    n.lhs = a.node_;
    n.rhs = b.node_;
    return Expr(std::move(n));
  }

  Kind kind() const noexcept { return node_->kind; }
  double value() const noexcept { return node_->value; }
  int index() const noexcept { return node_->index; }
  const std::string& name() const noexcept { return node_->name; }
  Unary unary_op() const noexcept { return node_->unary_op; }
  Binary binary_op() const noexcept { return node_->binary_op; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_zero_constant() const noexcept { return kind() == Kind::constant && value() == 0.0; }

  friend bool operator==(const Expr& a, const Expr& b) { return same(a.node_.get(), b.node_.get()); }

 private:
  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool same(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a == nullptr || b == nullptr || a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::constant:
        return a->value == b->value;
      case Kind::coordinate:
        return a->index == b->index;
      case Kind::parameter:
        return a->name == b->name;
      case Kind::unary:
        return a->unary_op == b->unary_op && same(a->lhs.get(), b->lhs.get());
      case Kind::binary:
        return a->binary_op == b->binary_op && same(a->lhs.get(), b->lhs.get()) &&
               same(a->rhs.get(), b->rhs.get());
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Expr::Binary::add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Expr::Binary::sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Expr::Binary::mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Expr::Binary::div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(Expr::Unary::neg, a); }

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class ExprParser {
 public:
  ExprParser(std::string_view text, int dim, const std::set<std::string, std::less<>>& params)
      : text_(text), dim_(dim), params_(params) {}

  Expr parse() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    Expr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError(msg + " at offset " + std::to_string(at), at);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (!accept('^')) return base;
      Expr exponent = parse_exponent();
      if (depends_on_coordinates(exponent)) fail_at("exponent depends on coordinates", at);
      base = Expr::binary(Expr::Binary::pow, base, exponent);
    }
  }

  Expr parse_exponent() {
    if (accept('-')) return -parse_exponent();
    return parse_primary();
  }

  static bool depends_on_coordinates(const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::coordinate:
        return true;
      case Expr::Kind::unary:
        return depends_on_coordinates(e.lhs());
      case Expr::Kind::binary:
        return depends_on_coordinates(e.lhs()) || depends_on_coordinates(e.rhs());
      default:
        return false;
    }
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail_at("malformed number", start);
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Expr::Unary> kFunctions[] = {
        {"sin", Expr::Unary::sin}, {"cos", Expr::Unary::cos}, {"exp", Expr::Unary::exp}, {"sqrt", Expr::Unary::sqrt}};
    for (const auto& [fname, op] : kFunctions) {
      if (id == fname) {
        if (!accept('(')) fail("expected '(' after " + std::string(id));
        Expr arg = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return Expr::unary(op, arg);
      }
    }

    if (id.size() >= 2 && id[0] == 'x' &&
        std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int k = 0;
      auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (ec != std::errc() || k < 1 || k > dim_) {
        fail_at("coordinate " + std::string(id) + " out of range for dimension " + std::to_string(dim_), start);
      }
      return Expr::coordinate(k - 1);
    }

    if (params_.find(id) != params_.end()) return Expr::parameter(std::string(id));
    fail_at("unknown identifier '" + std::string(id) + "'", start);
  }

  std::string_view text_;
  int dim_;
  const std::set<std::string, std::less<>>& params_;
  std::size_t pos_ = 0;
};

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::binary:
      switch (e.binary_op()) {
        case Expr::Binary::add:
        case Expr::Binary::sub:
          return 1;
        case Expr::Binary::mul:
        case Expr::Binary::div:
          return 2;
        case Expr::Binary::pow:
          return 4;
      }
      return 0;
    case Expr::Kind::unary:
      return e.unary_op() == Expr::Unary::neg ? 3 : 5;
    case Expr::Kind::constant:
      return e.value() < 0.0 || std::signbit(e.value()) ? 0 : 5;
    default:
      return 5;
  }
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void print(const Expr& e, std::string& out);

inline void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

inline void print_exponent(const Expr& e, std::string& out) {
  if (e.kind() == Expr::Kind::unary && e.unary_op() == Expr::Unary::neg) {
    out += '-';
    print_exponent(e.lhs(), out);
    return;
  }
  print_wrapped(e, precedence(e) < 5, out);
}

inline void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::constant:
      // operand positions wrap negative constants through precedence 0
      out += format_double(e.value());
      return;
    case Expr::Kind::coordinate:
      out += 'x' + std::to_string(e.index() + 1);
      return;
    case Expr::Kind::parameter:
      out += e.name();
      return;
    case Expr::Kind::unary: {
      const Expr a = e.lhs();
      switch (e.unary_op()) {
        case Expr::Unary::neg:
          out += '-';
          print_wrapped(a, precedence(a) < 3, out);
          return;
        case Expr::Unary::sin:
          out += "sin(";
          break;
        case Expr::Unary::cos:
          out += "cos(";
          break;
        case Expr::Unary::exp:
          out += "exp(";
          break;
        case Expr::Unary::sqrt:
          out += "sqrt(";
          break;
      }
      print(a, out);
      out += ')';
      return;
    }
    case Expr::Kind::binary: {
      const Expr a = e.lhs();
      const Expr b = e.rhs();
      const int p = precedence(e);
      if (e.binary_op() == Expr::Binary::pow) {
        print_wrapped(a, precedence(a) < 4, out);
        out += '^';
        print_exponent(b, out);
        return;
      }
      // Operands of + - * / are parsed at unary level, so a right operand
      // that is a negation needs no parentheses.
      print_wrapped(a, precedence(a) < p, out);
      switch (e.binary_op()) {
        case Expr::Binary::add:
          out += " + ";
          break;
        case Expr::Binary::sub:
          out += " - ";
          break;
        case Expr::Binary::mul:
          out += '*';
          break;
        case Expr::Binary::div:
          out += '/';
          break;
        case Expr::Binary::pow:
          break;
      }
      print_wrapped(b, precedence(b) <= p, out);
      return;
    }
  }
}

template <class T>
T integer_power(const T& base, long long k) {
  if (k < 0) return T(1.0) / integer_power(base, -k);
  T result(1.0);
  T b = base;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      result = first ? b : result * b;
      first = false;
    }
    k >>= 1;
    if (k > 0) b = b * b;
  }
  return result;
}

template <int Order>
Jet<Order> integer_power(const Jet<Order>& base, long long k) {
  return ipow(base, k);
}

template <class T>
T real_power(const T& base, double r) {
  using std::pow;
  if (!(base > T(0.0))) throw DomainError("non-integer power of non-positive value");
  return pow(base, T(r));
}

template <int Order>
Jet<Order> real_power(const Jet<Order>& base, double r) {
  return pow(base, r);
}

template <class T>
T checked_sqrt(const T& a) {
  using std::sqrt;
  if (a < T(0.0)) throw DomainError("sqrt of negative value");
  return sqrt(a);
}

template <int Order>
Jet<Order> checked_sqrt(const Jet<Order>& a) {
  return sqrt(a);
}

template <class T>
T checked_divide(const T& a, const T& b) {
  if (b == T(0.0)) throw DomainError("division by zero");
  return a / b;
}

template <int Order>
Jet<Order> checked_divide(const Jet<Order>& a, const Jet<Order>& b) {
  return a / b;
}

}  // namespace detail

/// Parses `text` with coordinates x1..x<dim> and the given parameter names.
inline Expr parse(std::string_view text, int dim, const std::set<std::string, std::less<>>& params = {}) {
  return detail::ExprParser(text, dim, params).parse();
}

/// Canonical text form; parse(to_string(e)) reproduces e for every parsed e.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

/// Evaluates over any scalar-like type with +,-,*,/ and ADL-visible
/// sin/cos/exp/sqrt/pow: double, extended-precision floats, and jets.
template <class T>
T evaluate(const Expr& e, std::span<const T> coords, const Bindings& bindings) {
  using std::cos;
  using std::exp;
  using std::sin;
  switch (e.kind()) {
    case Expr::Kind::constant:
      return T(e.value());
    case Expr::Kind::coordinate:
      if (e.index() < 0 || static_cast<std::size_t>(e.index()) >= coords.size()) {
        throw DimensionError("coordinate x" + std::to_string(e.index() + 1) + " out of range");
      }
      return coords[static_cast<std::size_t>(e.index())];
    case Expr::Kind::parameter: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw DomainError("unbound parameter '" + e.name() + "'");
      return T(it->second);
    }
    case Expr::Kind::unary: {
      const T a = evaluate(e.lhs(), coords, bindings);
      switch (e.unary_op()) {
        case Expr::Unary::neg:
          return -a;
        case Expr::Unary::sin:
          return sin(a);
        case Expr::Unary::cos:
          return cos(a);
        case Expr::Unary::exp:
          return exp(a);
        case Expr::Unary::sqrt:
          return detail::checked_sqrt(a);
      }
      break;
    }
    case Expr::Kind::binary: {
      if (e.binary_op() == Expr::Binary::pow) {
        const T base = evaluate(e.lhs(), coords, bindings);
        const double r = evaluate<double>(e.rhs(), std::span<const double>{}, bindings);
        if (std::floor(r) == r && std::abs(r) <= 1024.0) {
          return detail::integer_power(base, static_cast<long long>(r));
        }
        return detail::real_power(base, r);
      }
      const T a = evaluate(e.lhs(), coords, bindings);
      const T b = evaluate(e.rhs(), coords, bindings);
      switch (e.binary_op()) {
        case Expr::Binary::add:
          return a + b;
        case Expr::Binary::sub:
          return a - b;
        case Expr::Binary::mul:
          return a * b;
        case Expr::Binary::div:
          return detail::checked_divide(a, b);
        case Expr::Binary::pow:
          break;
      }
      break;
    }
  }
  throw Error("malformed expression node");
}

/// Order-Order jet of `e` about `point`: every coordinate is replaced by the
/// matching jet variable.
template <int Order = kChartJetOrder>
Jet<Order> eval_jet(const Expr& e, std::span<const double> point, const Bindings& bindings) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet<Order>> vars;
  vars.reserve(point.size());
  for (int i = 0; i < n; ++i) vars.push_back(Jet<Order>::variable(n, i, point[static_cast<std::size_t>(i)]));
  Jet<Order> r = evaluate<Jet<Order>>(e, vars, bindings);
  if (r.variables() == 0) return Jet<Order>::constant(n, r.value());
  return r;
}

/// Renumbers coordinates x_i -> x_{i + offset}.
inline Expr shift_coordinates(const Expr& e, int offset) {
  switch (e.kind()) {
    case Expr::Kind::coordinate:
      return Expr::coordinate(e.index() + offset);
    case Expr::Kind::unary:
      return Expr::unary(e.unary_op(), shift_coordinates(e.lhs(), offset));
    case Expr::Kind::binary:
      return Expr::binary(e.binary_op(), shift_coordinates(e.lhs(), offset), shift_coordinates(e.rhs(), offset));
    default:
      return e;
  }
}

/// Replaces every occurrence of parameter `from` by parameter `to`.
inline Expr rename_parameter(const Expr& e, const std::string& from, const std::string& to) {
  switch (e.kind()) {
    case Expr::Kind::parameter:
      return e.name() == from ? Expr::parameter(to) : e;
    case Expr::Kind::unary:
      return Expr::unary(e.unary_op(), rename_parameter(e.lhs(), from, to));
    case Expr::Kind::binary:
      return Expr::binary(e.binary_op(), rename_parameter(e.lhs(), from, to), rename_parameter(e.rhs(), from, to));
    default:
      return e;
  }
}

inline void collect_parameters(const Expr& e, std::set<std::string, std::less<>>& out) {
  switch (e.kind()) {
    case Expr::Kind::parameter:
      out.insert(e.name());
      return;
    case Expr::Kind::unary:
      collect_parameters(e.lhs(), out);
      return;
    case Expr::Kind::binary:
      collect_parameters(e.lhs(), out);
      collect_parameters(e.rhs(), out);
      return;
    default:
      return;
  }
}

}  // namespace ahlab
