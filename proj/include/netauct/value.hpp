// Copyright 2026 The netauct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace netauct {

/// Exact rational on 64-bit numerator/denominator. This is the reference
/// value representation: payment identities and incentive checks compare
/// money amounts for exact equality, which rules out binary floating point.
/// Intermediates go through 128-bit arithmetic; results that do not fit in
/// 64 bits throw std::overflow_error (valuations in this domain are tiny,
/// so hitting that means a caller bug).
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    normalize();
  }

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  /// Decimal rendering when the denominator is of the form 2^a * 5^b
  /// (always the case for inputs parsed from decimal strings and their
  /// sums/midpoints), "num/den" otherwise.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    // Scale to a power of ten and place the decimal point.
    int digits = twos > fives ? twos : fives;
    i128 scaled = i128(num_ < 0 ? -num_ : num_);
    for (int i = 0; i < digits - twos; ++i) scaled *= 2;
    for (int i = 0; i < digits - fives; ++i) scaled *= 5;
    std::string s = to_string_i128(scaled);
    while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
    s.insert(s.size() - digits, ".");
    return (num_ < 0 ? "-" : "") + s;
  }

  /// Parses "12", "-3.25" or "7/2". Returns nullopt on malformed input.
  static std::optional<Rational> parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t slash = text.find('/');
    if (slash != std::string::npos) {
      auto n = parse_int(text.substr(0, slash));
      auto d = parse_int(text.substr(slash + 1));
      if (!n || !d || *d == 0) return std::nullopt;
      return Rational(*n, *d);
    }
    std::size_t dot = text.find('.');
    if (dot == std::string::npos) {
      auto n = parse_int(text);
      if (!n) return std::nullopt;
      return Rational(*n);
    }
    std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 18) return std::nullopt;
    for (char c : frac)
      if (c < '0' || c > '9') return std::nullopt;
    bool neg = !whole.empty() && whole[0] == '-';
    if (whole == "-" || whole.empty()) whole = neg ? "-0" : "0";
    auto w = parse_int(whole);
    auto f = parse_int(frac);
    if (!w || !f) return std::nullopt;
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    Rational r = Rational(*w) * Rational(den) + (neg ? -Rational(*f) : Rational(*f));
    return r / Rational(den);
  }

 private:
  using i128 = __int128;

  static std::optional<std::int64_t> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size() || s.size() - i > 18) return std::nullopt;
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return s[0] == '-' ? -v : v;
  }

  static std::string to_string_i128(i128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

  static Rational make(i128 num, i128 den) {
    if (den < 0) { num = -num; den = -den; }
    i128 a = num < 0 ? -num : num, b = den;
    while (b != 0) { i128 t = a % b; a = b; b = t; }
    if (a > 1) { num /= a; den /= a; }
    Rational r;
    r.num_ = narrow(num);
    r.den_ = narrow(den);
    return r;
  }

  static std::int64_t narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw std::overflow_error("Rational: 64-bit overflow");
    return static_cast<std::int64_t>(v);
  }

  void normalize() {
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  std::int64_t num_{0};
  std::int64_t den_{1};
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

/// Everything in the library is generic over an ordered additive value type;
/// the traits pin down the handful of representation-specific operations.
/// Rational is the exact reference mode, double the optional floating mode.
template <typename V>
struct ValueTraits;

template <>
struct ValueTraits<Rational> {
  static constexpr bool is_exact = true;
  static Rational zero() { return Rational(0); }
  static Rational from_int(std::int64_t v) { return Rational(v); }
  static std::optional<Rational> parse(const std::string& s) { return Rational::parse(s); }
  static std::string str(const Rational& v) { return v.str(); }
  static Rational half(const Rational& v) { return v / Rational(2); }
  static bool equal(const Rational& a, const Rational& b) { return a == b; }
  static bool gain_exceeds_tolerance(const Rational& gain) { return gain > Rational(0); }
};

template <>
struct ValueTraits<double> {
  static constexpr bool is_exact = false;
  static constexpr double kTolerance = 1e-9;
  static double zero() { return 0.0; }
  static double from_int(std::int64_t v) { return static_cast<double>(v); }
  static std::optional<double> parse(const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return v;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  static std::string str(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  }
  static double half(double v) { return v / 2.0; }
  static bool equal(double a, double b) { return std::fabs(a - b) <= kTolerance; }
  static bool gain_exceeds_tolerance(double gain) { return gain > kTolerance; }
};

}  // namespace netauct
