#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathforge {

// Exact rational arithmetic. Every quantity a reasoning path mentions is kept
// as a normalized fraction; nothing in verification ever touches floating
// point. Numerators/denominators live in 128-bit integers: parsed literals
// are capped at 9 decimal digits, and an answer expression combines at most
// four of them, so magnitudes stay far below the overflow guard.
class rational_overflow : public std::runtime_error {
public:
  rational_overflow() : std::runtime_error("rational arithmetic overflow") {}
};

class division_by_zero : public std::runtime_error {
public:
  division_by_zero() : std::runtime_error("division by zero") {}
};

class Rational {
public:
  using Int = __int128;

  Rational() = default;
  Rational(long long v) : num_(v), den_(1) {}

  // Normalizes sign and gcd; throws on zero denominator.
  static Rational fraction(Int num, Int den) {
    if (den == 0) throw division_by_zero();
    if (den < 0) { num = -num; den = -den; }
    Int g = gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
    Rational r;
    r.num_ = num;
    r.den_ = den;
    return r;
  }

  Int num() const { return num_; }
  Int den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_positive() const { return num_ > 0; }

  Rational operator+(const Rational& o) const {
    return fraction(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator-(const Rational& o) const {
    return fraction(checked_add(checked_mul(num_, o.den_), -checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator*(const Rational& o) const {
    return fraction(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw division_by_zero();
    return fraction(checked_mul(num_, o.den_), checked_mul(den_, o.num_));
  }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  // Total order used for canonical sorting. The double projection decides;
  // exact fields break the (astronomically rare) projection ties so the
  // order stays deterministic.
  bool operator<(const Rational& o) const {
    if (*this == o) return false;
    double a = to_double(), b = o.to_double();
    if (a != b) return a < b;
    if (num_ != o.num_) return num_ < o.num_;
    return den_ < o.den_;
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Renders "p" for integers, "p/q" otherwise, sign on the numerator.
  std::string str() const {
    std::string s = int_to_string(num_);
    if (den_ != 1) {
      s += '/';
      s += int_to_string(den_);
    }
    return s;
  }

  // Parses "p" or "p/q" with an optional leading '-'. Each integer part is
  // capped at 9 digits; anything longer (or malformed) yields nullopt.
  static std::optional<Rational> parse(std::string_view text) {
    size_t pos = 0;
    auto p = parse_int(text, pos);
    if (!p) return std::nullopt;
    if (pos == text.size()) return Rational::fraction(*p, 1);
    if (text[pos] != '/') return std::nullopt;
    ++pos;
    size_t qstart = pos;
    auto q = parse_int(text, pos);
    if (!q || pos != text.size() || text[qstart] == '-') return std::nullopt;
    if (*q == 0) return std::nullopt;
    return Rational::fraction(*p, *q);
  }

  static std::string int_to_string(Int v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
    char buf[48];
    int i = 48;
    while (u > 0) {
      buf[--i] = static_cast<char>('0' + static_cast<int>(u % 10));
      u /= 10;
    }
    std::string s;
    if (neg) s += '-';
    s.append(buf + i, 48 - i);
    return s;
  }

private:
  static Int gcd(Int a, Int b) {
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  // Guard well inside __int128 range; operands this large only arise from
  // adversarial nesting, which the guard turns into a clean failure.
  static constexpr Int kLimit = Int(1000000000000000000LL) * Int(1000000000000000000LL);

  static Int checked_mul(Int a, Int b) {
    if (a == 0 || b == 0) return 0;
    Int r = a * b;
    if (r / b != a || (r < 0 ? -r : r) > kLimit) throw rational_overflow();
    return r;
  }
  static Int checked_add(Int a, Int b) {
    Int r = a + b;
    if ((r < 0 ? -r : r) > kLimit) throw rational_overflow();
    return r;
  }

  static std::optional<Int> parse_int(std::string_view text, size_t& pos) {
    bool neg = false;
    if (pos < text.size() && text[pos] == '-') {
      neg = true;
      ++pos;
    }
    size_t start = pos;
    Int v = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      v = v * 10 + (text[pos] - '0');
      ++pos;
    }
    size_t ndigits = pos - start;
    if (ndigits == 0 || ndigits > 9) return std::nullopt;
    return neg ? -v : v;
  }

  Int num_ = 0;
  Int den_ = 1;
};

}  // namespace pathforge
