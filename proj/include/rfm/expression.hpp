#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfm/envelope.hpp"

namespace rfm {

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One multiplicative factor of a closed-form expression in x.
struct Factor {
  enum class Kind { cos, sin, exp, power, abspow };
  Kind kind = Kind::power;
  double w = 0.0;      // cos/sin/exp: argument w*x
  int degree = 0;      // power: x^degree
  double beta = 0.0;   // abspow: |x - x0|^beta
  double x0 = 0.0;

  double derivative(double x, int n) const {
    switch (kind) {
      case Kind::cos:
      case Kind::sin: {
        // d^n/dx^n cos(wx) cycles through cos, -sin, -cos, sin
        const int shift = (kind == Kind::sin ? n + 3 : n) % 4;
        const double wn = std::pow(w, n);
        const double c = std::cos(w * x), s = std::sin(w * x);
        switch (shift) {
          case 0: return wn * c;
          case 1: return -wn * s;
          case 2: return -wn * c;
          default: return wn * s;
        }
      }
      case Kind::exp:
        return std::pow(w, n) * std::exp(w * x);
      case Kind::power: {
        if (n > degree) return 0.0;
        double falling = 1.0;
        for (int j = 0; j < n; ++j) falling *= degree - j;
        return falling * std::pow(x, degree - n);
      }
      case Kind::abspow: {
        double falling = 1.0;
        for (int j = 0; j < n; ++j) falling *= beta - j;
        const double d = x - x0;
        const double sign = (d < 0.0 && (n % 2 == 1)) ? -1.0 : 1.0;
        return falling * std::pow(std::abs(d), beta - n) * sign;
      }
    }
    return 0.0;
  }

  std::optional<GevreyEnvelope> envelope(double R) const {
    switch (kind) {
      case Kind::cos: return envelope_primitive(PrimitiveKind::cos, {.w = w}, R);
      case Kind::sin: return envelope_primitive(PrimitiveKind::sin, {.w = w}, R);
      case Kind::exp: return envelope_primitive(PrimitiveKind::exp, {.w = w}, R);
      case Kind::power: return envelope_primitive(PrimitiveKind::monomial, {.degree = degree}, R);
      case Kind::abspow: return std::nullopt;  // finite Sobolev regularity only
    }
    return std::nullopt;
  }
};

struct Term {
  double coeff = 1.0;
  std::vector<Factor> factors;
};

/// Sum of products over the primitives {cos(wx), sin(wx), exp(wx), x^k, |x-x0|^b}
/// with exact derivatives of any order through the Leibniz rule.
class Expression {
 public:
  Expression() = default;

  static Expression constant(double c) {
    Expression e;
    e.terms_.push_back({c, {}});
    e.text_ = std::to_string(c);
    return e;
  }

  static Expression parse(std::string_view text);

  double operator()(double x) const { return derivative(x, 0); }

  double derivative(double x, int n) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t.coeff * product_derivative(t.factors, 0, x, n);
    return sum;
  }

  /// Envelope on [-R, R] assembled by the closure rules, if every factor is Gevrey.
  std::optional<GevreyEnvelope> envelope(double R) const {
    std::optional<GevreyEnvelope> total;
    for (const auto& t : terms_) {
      GevreyEnvelope te{1.0, 0.0, 0.0};
      for (const auto& f : t.factors) {
        const auto fe = f.envelope(R);
        if (!fe) return std::nullopt;
        te = envelope_product(te, *fe);
      }
      te = envelope_scale(t.coeff, te);
      total = total ? envelope_sum(*total, te) : te;
    }
    if (!total) return GevreyEnvelope{0.0, 0.0, 0.0};
    return total;
  }

  const std::vector<Term>& terms() const { return terms_; }
  const std::string& text() const { return text_; }

  friend Expression operator+(const Expression& a, const Expression& b) {
    Expression e;
    e.terms_ = a.terms_;
    e.terms_.insert(e.terms_.end(), b.terms_.begin(), b.terms_.end());
    e.text_ = "(" + a.text_ + ")+(" + b.text_ + ")";
    return e;
  }

  friend Expression operator*(const Expression& a, const Expression& b) {
    Expression e;
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        Term t{ta.coeff * tb.coeff, ta.factors};
        t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
        e.terms_.push_back(std::move(t));
      }
    e.text_ = "(" + a.text_ + ")*(" + b.text_ + ")";
    return e;
  }

  Expression scaled(double c) const {
    Expression e = *this;
    for (auto& t : e.terms_) t.coeff *= c;
    e.text_ = std::to_string(c) + "*(" + text_ + ")";
    return e;
  }

 private:
  static double product_derivative(const std::vector<Factor>& fs, std::size_t first, double x,
                                   int n) {
    if (first == fs.size()) return n == 0 ? 1.0 : 0.0;
    if (first + 1 == fs.size()) return fs[first].derivative(x, n);
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
      const double head = fs[first].derivative(x, j);
      if (head != 0.0) sum += binom * head * product_derivative(fs, first + 1, x, n - j);
      binom = binom * (n - j) / (j + 1);
    }
    return sum;
  }

  friend class ExpressionParser;
  std::vector<Term> terms_;
  std::string text_;
};

/// Recursive-descent parser:
///   expr   := ['+'|'-'] term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := number | 'x' ['^' int] | ('cos'|'sin'|'exp') '(' linear ')'
///           | 'abspow' '(' number ',' number ')' | '(' expr ')'
///   linear := any expr that reduces to w*x
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : src_(text) {}

  Expression parse() {
    Expression e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    e.text_ = std::string(src_);
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(src_) + "' at " + std::to_string(pos_) + ": " +
                     what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expression parse_expr() {
    double sign = 1.0;
    if (accept('-')) sign = -1.0;
    else accept('+');
    Expression e = parse_term().scaled(sign);
    for (;;) {
      if (accept('+')) e = e + parse_term();
      else if (accept('-')) e = e + parse_term().scaled(-1.0);
      else break;
    }
    return e;
  }

  Expression parse_term() {
    Expression e = parse_factor();
    while (accept('*')) e = e * parse_factor();
    return e;
  }

  double parse_number() {
    skip_ws();
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) fail("expected number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  static Expression single(Factor f) {
    Expression e;
    e.terms_.push_back({1.0, {f}});
    return e;
  }

  double linear_coefficient(const Expression& arg) {
    // collect c*x terms; anything else is outside the grammar
    double w = 0.0;
    for (const auto& t : arg.terms_) {
      if (t.factors.size() == 1 && t.factors[0].kind == Factor::Kind::power &&
          t.factors[0].degree == 1) {
        w += t.coeff;
      } else if (!(t.factors.empty() && t.coeff == 0.0)) {
        fail("argument must be linear in x (w*x)");
      }
    }
    return w;
  }

  Expression parse_factor() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = parse_expr();
      expect(')');
      return e;
    }
    if (c == '-') {  // unary minus inside a product, e.g. 2*-x
      ++pos_;
      return parse_factor().scaled(-1.0);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expression::constant(parse_number());
    }
    const std::string id = parse_ident();
    if (id == "x") {
      int degree = 1;
      if (accept('^')) {
        const double d = parse_number();
        if (d < 0 || d != std::floor(d)) fail("x^k needs a nonnegative integer k");
        degree = static_cast<int>(d);
      }
      return single({.kind = Factor::Kind::power, .degree = degree});
    }
    if (id == "cos" || id == "sin" || id == "exp") {
      expect('(');
      const double w = linear_coefficient(parse_expr());
      expect(')');
      const auto kind = id == "cos" ? Factor::Kind::cos
                        : id == "sin" ? Factor::Kind::sin
                                      : Factor::Kind::exp;
      return single({.kind = kind, .w = w});
    }
    if (id == "abspow") {
      expect('(');
      const double beta = parse_number();
      expect(',');
      double sign = 1.0;
      if (accept('-')) sign = -1.0;
      const double x0 = sign * parse_number();
      expect(')');
      return single({.kind = Factor::Kind::abspow, .beta = beta, .x0 = x0});
    }
    if (id == "pi") return Expression::constant(3.14159265358979323846);
    fail(id.empty() ? "unexpected character" : "unknown identifier '" + id + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) { return ExpressionParser(text).parse(); }

}  // namespace rfm
