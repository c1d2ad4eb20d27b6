#pragma once

// Operator language: scalar literals, generator atoms, Sum/Prod/Pow trees,
// canonical printing and normalization to the {Dx, D0, Dplus, Dminus} basis.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <charconv>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lieharm/duals.hpp"
#include "lieharm/rational.hpp"

namespace lieharm {

using HPReal = boost::multiprecision::cpp_bin_float_50;

struct HPComplex {
  HPReal re = 0, im = 0;

  HPComplex() = default;
  HPComplex(HPReal r, HPReal i = 0) : re(std::move(r)), im(std::move(i)) {}  // NOLINT
  static HPComplex from(const GaussRational& q) {
    return {HPReal(q.re.num()) / HPReal(q.re.den()), HPReal(q.im.num()) / HPReal(q.im.den())};
  }
  static HPComplex from(const SurdSum& s) {
    HPComplex z;
    for (const auto& [m, q] : s.terms()) z = z + from(q) * HPComplex(sqrt(HPReal(m)));
    return z;
  }
  std::complex<double> to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
  friend HPComplex operator+(const HPComplex& a, const HPComplex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend HPComplex operator*(const HPComplex& a, const HPComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend HPComplex operator/(const HPComplex& a, const HPComplex& b) {
    const HPReal n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
};

// Sum_{k>=1} B^{-k!} to the working precision of HPReal.
inline HPReal liouville_value(std::int64_t base) {
  HPReal sum = 0;
  const HPReal eps = std::numeric_limits<HPReal>::epsilon();
  HPReal b(base);
  std::int64_t fact = 1;
  for (int k = 1; k < 20; ++k) {
    fact *= k;
    const HPReal term = pow(b, -HPReal(fact));
    if (term < eps * eps) break;
    sum += term;
  }
  return sum;
}

class Scalar {
 public:
  enum class Kind { Exact, Sqrt, Pi, Liouville, Float };

  Scalar() = default;
  static Scalar exact(GaussRational q) {
    Scalar s;
    s.kind_ = Kind::Exact;
    s.q_ = q;
    return s;
  }
  static Scalar from_float(std::complex<double> z) {
    Scalar s;
    s.kind_ = Kind::Float;
    s.f_ = z;
    return s;
  }
  static Scalar sqrt_of(std::int64_t m) {
    const auto [k, rad] = squarefree_split(m);
    if (rad == 1) return exact(GaussRational(Rational(k)));
    Scalar s;
    s.kind_ = Kind::Sqrt;
    s.arg_ = m;
    return s;
  }
  static Scalar pi() {
    Scalar s;
    s.kind_ = Kind::Pi;
    return s;
  }
  static Scalar liouville(std::int64_t base) {
    if (base < 2) throw InputError("liouville base must be >= 2");
    Scalar s;
    s.kind_ = Kind::Liouville;
    s.arg_ = base;
    return s;
  }

  Kind kind() const { return kind_; }
  std::int64_t arg() const { return arg_; }
  bool is_exact() const { return kind_ == Kind::Exact || kind_ == Kind::Sqrt; }

  std::optional<SurdScalar> surd() const {
    if (kind_ == Kind::Exact) return SurdScalar(q_, 1);
    if (kind_ == Kind::Sqrt) return SurdScalar::sqrt_of(arg_);
    return std::nullopt;
  }
  std::complex<double> value() const {
    if (kind_ == Kind::Float) return f_;
    return hp().to_complex();
  }
  HPComplex hp() const {
    switch (kind_) {
      case Kind::Exact:
        return HPComplex::from(q_);
      case Kind::Sqrt:
        return HPComplex(sqrt(HPReal(arg_)));
      case Kind::Pi:
        return HPComplex(boost::math::constants::pi<HPReal>());
      case Kind::Liouville:
        return HPComplex(liouville_value(arg_));
      case Kind::Float:
        return HPComplex(HPReal(f_.real()), HPReal(f_.imag()));
    }
    return {};
  }
  const GaussRational& rational() const { return q_; }

  // Negation that stays a literal; nullopt for named constants.
  std::optional<Scalar> negated() const {
    if (kind_ == Kind::Exact) return exact(-q_);
    if (kind_ == Kind::Float) return from_float(-f_);
    return std::nullopt;
  }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    if (a.kind_ == Kind::Float || b.kind_ == Kind::Float) return a.value() == b.value();
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
      case Kind::Exact:
        return a.q_ == b.q_;
      case Kind::Sqrt:
      case Kind::Liouville:
        return a.arg_ == b.arg_;
      default:
        return true;
    }
  }

  std::string str() const {
    switch (kind_) {
      case Kind::Sqrt:
        return "sqrt(" + std::to_string(arg_) + ")";
      case Kind::Pi:
        return "pi";
      case Kind::Liouville:
        return "liouville(" + std::to_string(arg_) + ")";
      case Kind::Exact:
        return complex_str(q_.re.str(), q_.re.sign(), q_.im.str(), q_.im.sign());
      case Kind::Float:
        return complex_str(dstr(f_.real()), f_.real() > 0 ? 1 : (f_.real() < 0 ? -1 : 0),
                           dstr(f_.imag()), f_.imag() > 0 ? 1 : (f_.imag() < 0 ? -1 : 0));
    }
    return {};
  }

 private:
  static std::string dstr(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  static std::string complex_str(const std::string& re, int rs, const std::string& im, int is) {
    if (is == 0 && rs >= 0) return re;
    if (rs == 0 && is > 0) return im == "1" ? "i" : im + "i";
    std::string out = "(" + re;
    if (is >= 0) out += "+";
    return out + im + "i)";
  }

  Kind kind_ = Kind::Exact;
  GaussRational q_;
  std::int64_t arg_ = 0;
  std::complex<double> f_;
};

enum class GenKind { Dx, D0, Dplus, Dminus, D1, D2, D3 };

struct Generator {
  GenKind kind = GenKind::Dx;
  int factor = 1;  // 1-based: torus coordinate for Dx, sphere factor otherwise
  friend bool operator==(const Generator&, const Generator&) = default;

  bool normal() const {
    return kind == GenKind::Dx || kind == GenKind::D0 || kind == GenKind::Dplus ||
           kind == GenKind::Dminus;
  }
  std::string str() const {
    const std::string k = std::to_string(factor);
    switch (kind) {
      case GenKind::Dx:
        return "dx" + k;
      case GenKind::D0:
        return "d0_" + k;
      case GenKind::Dplus:
        return "dplus_" + k;
      case GenKind::Dminus:
        return "dminus_" + k;
      case GenKind::D1:
        return "D1_" + k;
      case GenKind::D2:
        return "D2_" + k;
      case GenKind::D3:
        return "D3_" + k;
    }
    return {};
  }
};

struct OperatorExpr {
  enum class Kind { Scalar, Generator, Sum, Prod, Pow };

  Kind kind = Kind::Scalar;
  lieharm::Scalar scalar;
  lieharm::Generator gen;
  std::vector<OperatorExpr> children;  // Sum/Prod operands, Pow base at [0]
  int exponent = 0;

  static OperatorExpr make_scalar(lieharm::Scalar s) {
    OperatorExpr e;
    e.scalar = std::move(s);
    return e;
  }
  static OperatorExpr make_scalar(GaussRational q) { return make_scalar(lieharm::Scalar::exact(q)); }
  static OperatorExpr make_gen(GenKind k, int factor) {
    OperatorExpr e;
    e.kind = Kind::Generator;
    e.gen = {k, factor};
    return e;
  }
  static OperatorExpr make_sum(std::vector<OperatorExpr> c) {
    OperatorExpr e;
    e.kind = Kind::Sum;
    e.children = std::move(c);
    return e;
  }
  static OperatorExpr make_prod(std::vector<OperatorExpr> c) {
    OperatorExpr e;
    e.kind = Kind::Prod;
    e.children = std::move(c);
    return e;
  }
  static OperatorExpr make_pow(OperatorExpr base, int exp) {
    if (exp < 0) throw InputError("negative exponent");
    OperatorExpr e;
    e.kind = Kind::Pow;
    e.children.push_back(std::move(base));
    e.exponent = exp;
    return e;
  }

  friend bool operator==(const OperatorExpr& a, const OperatorExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Scalar:
        return a.scalar == b.scalar;
      case Kind::Generator:
        return a.gen == b.gen;
      case Kind::Pow:
        return a.exponent == b.exponent && a.children == b.children;
      default:
        return a.children == b.children;
    }
  }

  bool is_exact() const {
    if (kind == Kind::Scalar) return scalar.is_exact();
    for (const auto& c : children)
      if (!c.is_exact()) return false;
    return true;
  }
};

struct NamedOp {
  std::string name;
  OperatorExpr expr;
  friend bool operator==(const NamedOp&, const NamedOp&) = default;
};

struct SystemDef {
  GroupSpec group;
  std::vector<NamedOp> ops;
  friend bool operator==(const SystemDef&, const SystemDef&) = default;
  std::size_t size() const { return ops.size(); }
};

// Throws DimensionError when a generator index falls outside the group.
inline void check_bounds(const OperatorExpr& e, const GroupSpec& g) {
  if (e.kind == OperatorExpr::Kind::Generator) {
    const int lim = e.gen.kind == GenKind::Dx ? g.torus_rank : g.sphere_count;
    if (e.gen.factor < 1 || e.gen.factor > lim)
      throw DimensionError("factor index out of range in " + e.gen.str());
  }
  for (const auto& c : e.children) check_bounds(c, g);
}

inline std::string format_expr(const OperatorExpr& e) {
  using K = OperatorExpr::Kind;
  auto wrap = [](const OperatorExpr& c, bool need) {
    return need ? "(" + format_expr(c) + ")" : format_expr(c);
  };
  switch (e.kind) {
    case K::Scalar:
      return e.scalar.str();
    case K::Generator:
      return e.gen.str();
    case K::Pow:
      return wrap(e.children[0], e.children[0].kind != K::Scalar &&
                                     e.children[0].kind != K::Generator) +
             "^" + std::to_string(e.exponent);
    case K::Sum: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += " + ";
        out += wrap(e.children[i], e.children[i].kind == K::Sum);
      }
      return out;
    }
    case K::Prod: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += "*";
        const auto ck = e.children[i].kind;
        out += wrap(e.children[i], ck == K::Sum || ck == K::Prod);
      }
      return out;
    }
  }
  return {};
}

inline std::string format_system(const SystemDef& sys) {
  std::string out = "group " + sys.group.str() + "\n";
  for (const auto& op : sys.ops) out += op.name + " = " + format_expr(op.expr) + "\n";
  return out;
}

inline OperatorExpr normalize(const OperatorExpr& e) {
  using K = OperatorExpr::Kind;
  const GaussRational half(Rational(1, 2));
  const GaussRational mhalf_i(Rational(0), Rational(-1, 2));
  switch (e.kind) {
    case K::Scalar:
      return e;
    case K::Generator: {
      const int k = e.gen.factor;
      auto term = [&](GaussRational c, GenKind g) {
        return OperatorExpr::make_prod(
            {OperatorExpr::make_scalar(c), OperatorExpr::make_gen(g, k)});
      };
      switch (e.gen.kind) {
        case GenKind::D1:
          return OperatorExpr::make_sum({term(mhalf_i, GenKind::Dplus), term(mhalf_i, GenKind::Dminus)});
        case GenKind::D2:
          return OperatorExpr::make_sum({term(-half, GenKind::Dplus), term(half, GenKind::Dminus)});
        case GenKind::D3:
          return term(GaussRational(Rational(0), Rational(-1)), GenKind::D0);
        default:
          return e;
      }
    }
    case K::Pow: {
      if (e.exponent == 0) return OperatorExpr::make_scalar(GaussRational(1));
      if (e.exponent == 1) return normalize(e.children[0]);
      return normalize(OperatorExpr::make_prod(
          std::vector<OperatorExpr>(static_cast<std::size_t>(e.exponent), e.children[0])));
    }
    case K::Sum:
    case K::Prod: {
      std::vector<OperatorExpr> flat;
      for (const auto& c : e.children) {
        OperatorExpr n = normalize(c);
        if (n.kind == e.kind)
          for (auto& cc : n.children) flat.push_back(std::move(cc));
        else
          flat.push_back(std::move(n));
      }
      if (flat.size() == 1) return flat[0];
      OperatorExpr out;
      out.kind = e.kind;
      out.children = std::move(flat);
      return out;
    }
  }
  return e;
}

inline SystemDef normalize(const SystemDef& sys) {
  SystemDef out = sys;
  for (auto& op : out.ops) op.expr = normalize(op.expr);
  return out;
}

inline bool is_normal(const OperatorExpr& e) {
  using K = OperatorExpr::Kind;
  if (e.kind == K::Pow) return false;
  if (e.kind == K::Generator) return e.gen.normal();
  for (const auto& c : e.children)
    if (c.kind == e.kind || !is_normal(c)) return false;
  return e.kind == K::Scalar || e.children.size() >= 2;
}

}  // namespace lieharm
