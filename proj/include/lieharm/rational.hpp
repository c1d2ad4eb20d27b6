#pragma once

// Exact scalar carriers: checked int64 rationals, Gaussian rationals, surds
// q*sqrt(m) and finite sums of surds over distinct squarefree radicands.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include "lieharm/common.hpp"

namespace lieharm {

// Raised when an exact computation leaves the int64 range. Callers catch it
// and fall back to floating point.
class ExactOverflow : public Error {
 public:
  ExactOverflow() : Error("exact arithmetic overflow") {}
};

namespace detail {
inline std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < -INT64_MAX) throw ExactOverflow();
  return static_cast<std::int64_t>(v);
}
inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}
}  // namespace detail

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d) { set(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return (num_ > 0) - (num_ < 0); }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const { return Rational(-num_, den_); }
  friend Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t g = std::gcd(a.den_, b.den_);
    const __int128 n = static_cast<__int128>(a.num_) * (b.den_ / g) +
                       static_cast<__int128>(b.num_) * (a.den_ / g);
    const __int128 d = static_cast<__int128>(a.den_ / g) * b.den_;
    return make(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const std::int64_t g1 = detail::gcd64(a.num_, b.den_);
    const std::int64_t g2 = detail::gcd64(b.num_, a.den_);
    const __int128 n = static_cast<__int128>(a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1));
    const __int128 d = static_cast<__int128>(a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1));
    return make(n, d);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("rational division by zero");
    return a * Rational(b.sign() * b.den_, b.sign() * b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  static Rational make(__int128 n, __int128 d) {
    if (d < 0) n = -n, d = -d;
    __int128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) n /= a, d /= a;
    Rational r;
    r.num_ = detail::narrow(n);
    r.den_ = detail::narrow(d);
    return r;
  }
  void set(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error("rational with zero denominator");
    *this = make(n, d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  return detail::narrow(static_cast<__int128>(a / std::gcd(a, b)) * b);
}

// a + b*i with rational parts.
struct GaussRational {
  Rational re, im;

  GaussRational() = default;
  GaussRational(Rational r, Rational i = Rational()) : re(r), im(i) {}  // NOLINT
  GaussRational(std::int64_t r) : re(r) {}                               // NOLINT

  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  GaussRational conj() const { return {re, -im}; }

  GaussRational operator-() const { return {-re, -im}; }
  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussRational operator/(const GaussRational& a, const GaussRational& b) {
    const Rational n2 = b.re * b.re + b.im * b.im;
    const GaussRational p = a * b.conj();
    return {p.re / n2, p.im / n2};
  }
  GaussRational& operator+=(const GaussRational& o) { return *this = *this + o; }
  GaussRational& operator*=(const GaussRational& o) { return *this = *this * o; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

// Splits n >= 0 as k^2 * m with m squarefree; returns {k, m}. n = 0 gives {0, 1}.
inline std::pair<std::int64_t, std::int64_t> squarefree_split(std::int64_t n) {
  if (n < 0) throw Error("squarefree_split of negative integer");
  if (n == 0) return {0, 1};
  std::int64_t k = 1, m = 1;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) n /= p, ++e;
    for (int i = 0; i < e / 2; ++i) k *= p;
    if (e % 2) m *= p;
  }
  return {k, m * n};
}

// q * sqrt(m), m squarefree; zero is (0, 1).
struct SurdScalar {
  GaussRational q;
  std::int64_t m = 1;

  SurdScalar() = default;
  SurdScalar(GaussRational c, std::int64_t radicand = 1) : q(c), m(radicand) {  // NOLINT
    if (q.is_zero()) m = 1;
  }
  // sqrt(n) for an arbitrary nonnegative integer n.
  static SurdScalar sqrt_of(std::int64_t n) {
    const auto [k, m] = squarefree_split(n);
    return SurdScalar(GaussRational(Rational(k)), m);
  }

  bool is_zero() const { return q.is_zero(); }
  std::complex<double> to_complex() const {
    return q.to_complex() * std::sqrt(static_cast<double>(m));
  }
  SurdScalar operator-() const { return {-q, m}; }
  friend SurdScalar operator*(const SurdScalar& a, const SurdScalar& b) {
    const std::int64_t g = std::gcd(a.m, b.m);
    const std::int64_t rad = detail::narrow(static_cast<__int128>(a.m / g) * (b.m / g));
    return SurdScalar(a.q * b.q * GaussRational(Rational(g)), rad);
  }
  friend bool operator==(const SurdScalar& a, const SurdScalar& b) {
    return a.m == b.m && a.q == b.q;
  }
};

// Element of Q(i)(sqrt(m1), sqrt(m2), ...): sum over squarefree radicands.
class SurdSum {
 public:
  SurdSum() = default;
  SurdSum(const SurdScalar& s) { add(s.m, s.q); }        // NOLINT
  SurdSum(const GaussRational& q) { add(1, q); }         // NOLINT
  SurdSum(std::int64_t v) { add(1, GaussRational(v)); }  // NOLINT

  const std::map<std::int64_t, GaussRational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // Single radicand (or zero): representable as one SurdScalar.
  bool is_surd() const { return terms_.size() <= 1; }
  SurdScalar as_surd() const {
    if (terms_.empty()) return {};
    return SurdScalar(terms_.begin()->second, terms_.begin()->first);
  }
  std::complex<double> to_complex() const {
    std::complex<double> z;
    for (const auto& [m, q] : terms_) z += q.to_complex() * std::sqrt(static_cast<double>(m));
    return z;
  }

  SurdSum operator-() const {
    SurdSum r;
    for (const auto& [m, q] : terms_) r.terms_[m] = -q;
    return r;
  }
  friend SurdSum operator+(SurdSum a, const SurdSum& b) {
    for (const auto& [m, q] : b.terms_) a.add(m, q);
    return a;
  }
  friend SurdSum operator-(const SurdSum& a, const SurdSum& b) { return a + (-b); }
  friend SurdSum operator*(const SurdSum& a, const SurdSum& b) {
    SurdSum r;
    for (const auto& [ma, qa] : a.terms_)
      for (const auto& [mb, qb] : b.terms_) {
        const SurdScalar p = SurdScalar(qa, ma) * SurdScalar(qb, mb);
        r.add(p.m, p.q);
      }
    return r;
  }
  SurdSum& operator+=(const SurdSum& o) { return *this = *this + o; }
  SurdSum& operator*=(const SurdSum& o) { return *this = *this * o; }
  friend bool operator==(const SurdSum& a, const SurdSum& b) { return a.terms_ == b.terms_; }

 private:
  void add(std::int64_t m, const GaussRational& q) {
    if (q.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, q);
      return;
    }
    it->second += q;
    if (it->second.is_zero()) terms_.erase(it);
  }

  std::map<std::int64_t, GaussRational> terms_;
};

}  // namespace lieharm
