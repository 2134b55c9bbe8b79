#pragma once

// Exact rational exponent vectors, supports and AG forms
//   f(x) = sum_{a in A} c_a |x|^a + sum_{b in B} c_b x^b
// together with a floating-point evaluator and the text grammar used by the CLI.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace scone {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Malformed input to a library call (dimension mismatch, broken precondition).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Syntax error in the term grammar; position is a byte offset into the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// ---------------------------------------------------------------------------
// Rational helpers

inline std::string to_string(const Rational& q) {
  const BigInt& num = boost::multiprecision::numerator(q);
  const BigInt& den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Natural log of |x| for x != 0, valid far beyond the double range.
inline double log_abs(const BigInt& x) {
  BigInt a = boost::multiprecision::abs(x);
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(a));
  if (bits < 1000) return std::log(a.convert_to<double>());
  const unsigned shift = bits - 60;
  a >>= shift;
  return std::log(a.convert_to<double>()) + shift * std::log(2.0);
}

/// ln|q| for q != 0.
inline double log_abs(const Rational& q) {
  return log_abs(boost::multiprecision::numerator(q)) - log_abs(boost::multiprecision::denominator(q));
}

inline Rational rpow(const Rational& q, std::uint64_t k) {
  const auto e = static_cast<unsigned>(k);
  return Rational(boost::multiprecision::pow(boost::multiprecision::numerator(q), e),
                  boost::multiprecision::pow(boost::multiprecision::denominator(q), e));
}

inline BigInt ipow(const BigInt& b, std::uint64_t k) {
  return boost::multiprecision::pow(b, static_cast<unsigned>(k));
}

/// Exact rational from "p/q", an integer, or a decimal literal ("1.88", "-3e-2").
/// Returns the number of characters consumed through `used`; throws ParseError when nothing parses.
inline Rational parse_rational_prefix(std::string_view text, std::size_t& used, std::size_t base_offset = 0) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  auto digits = [&](std::string& out) {
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') out.push_back(text[i++]);
  };
  std::string int_part, frac_part;
  digits(int_part);
  bool has_dot = false;
  if (i < text.size() && text[i] == '.') {
    has_dot = true;
    ++i;
    digits(frac_part);
  }
  if (int_part.empty() && frac_part.empty()) throw ParseError("expected a number", base_offset + i);

  Rational value(BigInt(int_part.empty() ? "0" : int_part));
  if (!frac_part.empty()) {
    value += Rational(BigInt(frac_part), ipow(BigInt(10), frac_part.size()));
  }
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    bool exp_neg = false;
    if (j < text.size() && (text[j] == '+' || text[j] == '-')) exp_neg = text[j++] == '-';
    std::string exp_digits;
    while (j < text.size() && text[j] >= '0' && text[j] <= '9') exp_digits.push_back(text[j++]);
    if (exp_digits.empty() || exp_digits.size() > 4) throw ParseError("malformed exponent", base_offset + i);
    const auto e = std::stoul(exp_digits);
    const Rational scale(ipow(BigInt(10), e));
    value = exp_neg ? Rational(value / scale) : Rational(value * scale);
    i = j;
  } else if (!has_dot && i < text.size() && text[i] == '/') {
    std::size_t j = i + 1;
    std::string den;
    while (j < text.size() && text[j] >= '0' && text[j] <= '9') den.push_back(text[j++]);
    if (den.empty()) throw ParseError("expected denominator", base_offset + j);
    BigInt d(den);
    if (d == 0) throw ParseError("zero denominator", base_offset + i + 1);
    value /= Rational(d);
    i = j;
  }
  used = i;
  return negative ? Rational(-value) : value;
}

inline Rational parse_rational(std::string_view text) {
  std::size_t used = 0;
  Rational q = parse_rational_prefix(text, used);
  if (used != text.size()) throw ParseError("trailing characters after number", used);
  return q;
}

// ---------------------------------------------------------------------------
// ExponentVector

/// A support point: an exact rational n-vector with lexicographic order.
class ExponentVector {
 public:
  ExponentVector() = default;
  explicit ExponentVector(std::vector<Rational> coords) : coords_(std::move(coords)) {}
  ExponentVector(std::initializer_list<Rational> coords) : coords_(coords) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  const Rational& operator[](std::size_t j) const { return coords_[j]; }
  const std::vector<Rational>& coords() const noexcept { return coords_; }

  bool is_integral() const {
    return std::all_of(coords_.begin(), coords_.end(),
                       [](const Rational& q) { return boost::multiprecision::denominator(q) == 1; });
  }
  bool is_natural() const {
    return is_integral() && std::all_of(coords_.begin(), coords_.end(), [](const Rational& q) { return q >= 0; });
  }
  /// Integral with every coordinate even.
  bool is_even() const {
    return is_integral() && std::all_of(coords_.begin(), coords_.end(), [](const Rational& q) {
             return boost::multiprecision::numerator(q) % 2 == 0;
           });
  }

  friend bool operator==(const ExponentVector& a, const ExponentVector& b) { return a.coords_ == b.coords_; }
  friend std::strong_ordering operator<=>(const ExponentVector& a, const ExponentVector& b) {
    const std::size_t n = std::min(a.dim(), b.dim());
    for (std::size_t j = 0; j < n; ++j) {
      if (a.coords_[j] < b.coords_[j]) return std::strong_ordering::less;
      if (b.coords_[j] < a.coords_[j]) return std::strong_ordering::greater;
    }
    return a.dim() <=> b.dim();
  }

 private:
  std::vector<Rational> coords_;
};

inline std::string to_string(const ExponentVector& v) {
  std::string s = "(";
  for (std::size_t j = 0; j < v.dim(); ++j) {
    if (j) s += ",";
    s += to_string(v[j]);
  }
  return s + ")";
}

inline ExponentVector exponent(std::initializer_list<long long> coords) {
  std::vector<Rational> q;
  for (long long c : coords) q.emplace_back(c);
  return ExponentVector(std::move(q));
}

/// 64-bit FNV-1a; used for stable identifiers.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Support

/// Disjoint supports: `abs_points` (terms |x|^a) and `odd_points` (terms x^b, b natural, not all even).
/// Points are deduplicated and kept in lexicographic order.
class Support {
 public:
  Support(std::size_t dim, std::vector<ExponentVector> abs_points, std::vector<ExponentVector> odd_points = {})
      : dim_(dim), abs_(normalize(std::move(abs_points))), odd_(normalize(std::move(odd_points))) {
    if (dim_ == 0) throw InputError("support dimension must be positive");
    if (abs_.empty()) throw InputError("support needs at least one |x| term");
    for (const auto& a : abs_)
      if (a.dim() != dim_) throw InputError("exponent " + to_string(a) + " has wrong dimension");
    for (const auto& b : odd_) {
      if (b.dim() != dim_) throw InputError("exponent " + to_string(b) + " has wrong dimension");
      if (!b.is_natural()) throw InputError("odd exponent " + to_string(b) + " must have natural coordinates");
      if (b.is_even()) throw InputError("odd exponent " + to_string(b) + " has only even coordinates");
      if (std::binary_search(abs_.begin(), abs_.end(), b))
        throw InputError("exponent " + to_string(b) + " appears in both supports");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<ExponentVector>& abs_points() const noexcept { return abs_; }
  const std::vector<ExponentVector>& odd_points() const noexcept { return odd_; }

  /// abs points followed by odd points; the canonical coordinate order of coefficient vectors.
  std::vector<ExponentVector> all_points() const {
    std::vector<ExponentVector> all = abs_;
    all.insert(all.end(), odd_.begin(), odd_.end());
    return all;
  }
  bool contains_abs(const ExponentVector& e) const { return std::binary_search(abs_.begin(), abs_.end(), e); }
  bool contains_odd(const ExponentVector& e) const { return std::binary_search(odd_.begin(), odd_.end(), e); }
  bool contains(const ExponentVector& e) const { return contains_abs(e) || contains_odd(e); }

  friend bool operator==(const Support&, const Support&) = default;

 private:
  static std::vector<ExponentVector> normalize(std::vector<ExponentVector> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  std::size_t dim_;
  std::vector<ExponentVector> abs_;
  std::vector<ExponentVector> odd_;
};

// ---------------------------------------------------------------------------
// AGForm

class AGForm {
 public:
  explicit AGForm(Support support, std::map<ExponentVector, Rational> coeffs = {})
      : support_(std::move(support)), coeffs_(std::move(coeffs)) {
    for (const auto& [e, c] : coeffs_)
      if (!support_.contains(e)) throw InputError("coefficient key " + to_string(e) + " is not a support point");
  }

  const Support& support() const noexcept { return support_; }
  const std::map<ExponentVector, Rational>& coeffs() const noexcept { return coeffs_; }

  Rational coeff(const ExponentVector& e) const {
    auto it = coeffs_.find(e);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  friend bool operator==(const AGForm& a, const AGForm& b) {
    if (!(a.support_ == b.support_)) return false;
    for (const auto& e : a.support_.all_points())
      if (a.coeff(e) != b.coeff(e)) return false;
    return true;
  }

 private:
  Support support_;
  std::map<ExponentVector, Rational> coeffs_;
};

/// A real value or +infinity.
struct ExtendedReal {
  double value = 0.0;
  bool infinite = false;

  static ExtendedReal inf() { return {std::numeric_limits<double>::infinity(), true}; }
  bool is_finite() const { return !infinite; }
};

/// Evaluates f at x. A zero base under a negative exponent in a term with nonzero
/// coefficient makes the whole value +infinity.
inline ExtendedReal evaluate(const AGForm& f, std::span<const double> x) {
  const Support& s = f.support();
  if (x.size() != s.dim())
    throw InputError("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(s.dim()));
  double sum = 0.0;
  for (const auto& a : s.abs_points()) {
    const Rational c = f.coeff(a);
    if (c == 0) continue;
    double term = to_double(c);
    for (std::size_t j = 0; j < s.dim(); ++j) {
      const double base = std::fabs(x[j]);
      if (a[j] == 0) continue;
      if (base == 0.0) {
        if (a[j] < 0) return ExtendedReal::inf();
        term = 0.0;
      } else {
        term *= std::pow(base, to_double(a[j]));
      }
    }
    sum += term;
  }
  for (const auto& b : s.odd_points()) {
    const Rational c = f.coeff(b);
    if (c == 0) continue;
    double term = to_double(c);
    for (std::size_t j = 0; j < s.dim(); ++j) {
      const int k = b[j].convert_to<int>();
      term *= std::pow(x[j], k);
    }
    sum += term;
  }
  return {sum, false};
}

// ---------------------------------------------------------------------------
// Term grammar
//   term := coeff '*' base '^' '(' rational (',' rational)* ')'
//   base := '|x|' | 'x'
// Terms are joined by '+' or '-' (U+2212 accepted); whitespace is insignificant.

namespace detail {

struct ParsedTerm {
  Rational coeff;
  bool abs_base;
  ExponentVector exponent;
  std::size_t position;
};

class TermScanner {
 public:
  explicit TermScanner(std::string_view text) : text_(text) {}

  std::vector<ParsedTerm> terms(bool coeff_optional) {
    std::vector<ParsedTerm> out;
    skip_ws();
    int sign = read_sign_opt();
    while (true) {
      skip_ws();
      out.push_back(term(sign, coeff_optional));
      skip_ws();
      if (pos_ == text_.size()) break;
      sign = read_sign_opt();
      if (sign == 0) throw ParseError("expected '+' or '-' between terms", pos_);
    }
    return out;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view token) {
    skip_ws();
    if (!consume(token)) throw ParseError("expected '" + std::string(token) + "'", pos_);
  }
  // +1, -1, or 0 when no sign is present.
  int read_sign_opt() {
    skip_ws();
    if (consume("+")) return 1;
    if (consume("-") || consume("−")) return -1;
    return 0;
  }
  Rational number() {
    skip_ws();
    std::size_t used = 0;
    Rational q = parse_rational_prefix(text_.substr(pos_), used, pos_);
    pos_ += used;
    return q;
  }

  ParsedTerm term(int sign, bool coeff_optional) {
    const std::size_t start = pos_;
    Rational coeff(1);
    const bool starts_base = text_.substr(pos_, 1) == "x" || text_.substr(pos_, 1) == "|";
    if (!(coeff_optional && starts_base)) {
      coeff = number();
      expect("*");
    }
    if (sign < 0) coeff = -coeff;
    skip_ws();
    bool abs_base = false;
    if (consume("|x|")) {
      abs_base = true;
    } else if (!consume("x")) {
      throw ParseError("expected '|x|' or 'x'", pos_);
    }
    expect("^");
    expect("(");
    std::vector<Rational> coords;
    coords.push_back(number());
    skip_ws();
    while (consume(",")) {
      coords.push_back(number());
      skip_ws();
    }
    expect(")");
    return {coeff, abs_base, ExponentVector(std::move(coords)), start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline AGForm build_form(const std::vector<ParsedTerm>& terms) {
  if (terms.empty()) throw ParseError("empty form", 0);
  const std::size_t dim = terms.front().exponent.dim();
  std::map<ExponentVector, Rational> abs_c, odd_c;
  for (const auto& t : terms) {
    if (t.exponent.dim() != dim)
      throw ParseError("exponent " + to_string(t.exponent) + " has dimension " + std::to_string(t.exponent.dim()) +
                           ", expected " + std::to_string(dim),
                       t.position);
    if (t.abs_base) {
      if (odd_c.count(t.exponent)) throw ParseError("exponent " + to_string(t.exponent) + " used with both |x| and x", t.position);
      abs_c[t.exponent] += t.coeff;
    } else {
      if (!t.exponent.is_natural())
        throw ParseError("plain monomial exponent " + to_string(t.exponent) + " must be natural", t.position);
      if (t.exponent.is_even())
        throw ParseError("exponent " + to_string(t.exponent) + " all even, must use |x|", t.position);
      if (abs_c.count(t.exponent)) throw ParseError("exponent " + to_string(t.exponent) + " used with both |x| and x", t.position);
      odd_c[t.exponent] += t.coeff;
    }
  }
  if (abs_c.empty()) throw ParseError("form needs at least one |x| term", 0);
  std::vector<ExponentVector> a, b;
  for (const auto& [e, c] : abs_c) a.push_back(e);
  for (const auto& [e, c] : odd_c) b.push_back(e);
  std::map<ExponentVector, Rational> coeffs = std::move(abs_c);
  coeffs.insert(odd_c.begin(), odd_c.end());
  try {
    return AGForm(Support(dim, std::move(a), std::move(b)), std::move(coeffs));
  } catch (const InputError& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace detail

/// Parses a form such as "1*|x|^(0,0) + 1*|x|^(4,2) - 3*x^(1,1)".
/// Repeated terms are summed.
inline AGForm parse_form(std::string_view text) {
  detail::TermScanner scanner(text);
  return detail::build_form(scanner.terms(false));
}

/// Like parse_form, but coefficients are optional ("|x|^(0) + |x|^(6) + x^(3)").
inline Support parse_support(std::string_view text) {
  detail::TermScanner scanner(text);
  return detail::build_form(scanner.terms(true)).support();
}

inline std::string print_form(const AGForm& f) {
  std::string out;
  bool first = true;
  auto emit = [&](const ExponentVector& e, bool abs_base) {
    Rational c = f.coeff(e);
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    if (c < 0) c = -c;
    out += to_string(c) + (abs_base ? "*|x|^" : "*x^") + to_string(e);
    first = false;
  };
  for (const auto& a : f.support().abs_points()) emit(a, true);
  for (const auto& b : f.support().odd_points()) emit(b, false);
  return out;
}

}  // namespace scone
