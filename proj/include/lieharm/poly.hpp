#pragma once

// Diagonal symbol entries as polynomials in the frequency data.
//
// A normalized operator expands into generator words with scalar
// coefficients. A word with zero net shift on every sphere factor contributes
// to the diagonal; walking it right to left from level n, each dplus/dminus
// pair across the edge (a, a+1) multiplies by (l - a)(l + a + 1), d0 at level
// a multiplies by a, and dx_j by i*xi_j. The result is a polynomial in
// (xi_1..xi_r, l_1..l_s, n_1..n_s) valid on every slot.

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lieharm/symbols.hpp"

namespace lieharm {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Variable order: xi_1..xi_r, l_1..l_s, n_1..n_s.
struct VarLayout {
  int r = 0, s = 0;
  VarLayout() = default;
  explicit VarLayout(const GroupSpec& g) : r(g.torus_rank), s(g.sphere_count) {}
  int size() const { return r + 2 * s; }
  int xi(int j) const { return j; }
  int ell(int k) const { return r + k; }
  int n(int k) const { return r + s + k; }
  bool is_xi(int v) const { return v < r; }
  bool is_ell(int v) const { return v >= r && v < r + s; }
  bool is_n(int v) const { return v >= r + s; }
  int factor(int v) const { return is_ell(v) ? v - r : v - r - s; }
  std::string name(int v) const {
    if (is_xi(v)) return "xi" + std::to_string(v + 1);
    if (is_ell(v)) return "l" + std::to_string(v - r + 1);
    return "n" + std::to_string(v - r - s + 1);
  }
};

struct Coef {
  bool exact = true;
  SurdSum ex;
  HPComplex hp;

  static Coef one() { return from(GaussRational(1)); }
  static Coef from(const SurdSum& s) {
    Coef c;
    c.ex = s;
    c.hp = HPComplex::from(s);
    return c;
  }
  static Coef from(const Scalar& s) {
    if (auto su = s.surd()) return from(SurdSum(*su));
    Coef c;
    c.exact = false;
    c.hp = s.hp();
    return c;
  }
  bool is_zero() const { return exact ? ex.is_zero() : (c_zero(hp)); }
  std::complex<double> value() const { return exact ? ex.to_complex() : hp.to_complex(); }

  friend Coef operator+(const Coef& a, const Coef& b) {
    Coef c;
    c.exact = a.exact && b.exact;
    c.hp = a.hp + b.hp;
    if (c.exact) c.ex = a.ex + b.ex;
    return c;
  }
  friend Coef operator*(const Coef& a, const Coef& b) {
    Coef c;
    c.exact = a.exact && b.exact;
    c.hp = a.hp * b.hp;
    if (c.exact) c.ex = a.ex * b.ex;
    return c;
  }

 private:
  static bool c_zero(const HPComplex& z) { return z.re == 0 && z.im == 0; }
};

using Monomial = std::vector<int>;  // exponents, length VarLayout::size()

class Poly {
 public:
  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}
  static Poly constant(int nvars, const Coef& c) {
    Poly p(nvars);
    p.add_term(Monomial(static_cast<std::size_t>(nvars), 0), c);
    return p;
  }
  // c * (var + offset)
  static Poly affine(int nvars, int var, const Coef& c, const Coef& offset) {
    Poly p(nvars);
    Monomial m(static_cast<std::size_t>(nvars), 0);
    p.add_term(m, offset * c);
    m[static_cast<std::size_t>(var)] = 1;
    p.add_term(m, c);
    return p;
  }

  int nvars() const { return nvars_; }
  const std::map<Monomial, Coef>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool exact() const {
    for (const auto& [m, c] : terms_)
      if (!c.exact) return false;
    return true;
  }
  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
      int t = 0;
      for (int e : m) t += e;
      d = std::max(d, t);
    }
    return d;
  }

  void add_term(const Monomial& m, const Coef& c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (!c.is_zero()) terms_.emplace(m, c);
      return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }

  friend Poly operator+(Poly a, const Poly& b) {
    for (const auto& [m, c] : b.terms_) a.add_term(m, c);
    return a;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m = ma;
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
        out.add_term(m, ca * cb);
      }
    return out;
  }

  std::string str(const VarLayout& lay) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [m, c] : terms_) {
      if (!out.empty()) out += " + ";
      const auto z = c.value();
      out += "(" + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i)";
      for (std::size_t v = 0; v < m.size(); ++v)
        if (m[v] > 0) out += "*" + lay.name(static_cast<int>(v)) + (m[v] > 1 ? "^" + std::to_string(m[v]) : "");
    }
    return out;
  }

 private:
  int nvars_ = 0;
  std::map<Monomial, Coef> terms_;
};

// ---------------------------------------------------------------- word expansion

using Word = std::vector<Generator>;  // composition order, leftmost applied last

struct WordKey {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].kind != b[i].kind) return a[i].kind < b[i].kind;
      if (a[i].factor != b[i].factor) return a[i].factor < b[i].factor;
    }
    return false;
  }
};

using WordSum = std::map<Word, Coef, WordKey>;

namespace detail {
inline void ws_add(WordSum& ws, const Word& w, const Coef& c) {
  auto it = ws.find(w);
  if (it == ws.end()) {
    if (!c.is_zero()) ws.emplace(w, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) ws.erase(it);
}
inline WordSum ws_mul(const WordSum& a, const WordSum& b) {
  WordSum out;
  for (const auto& [wa, ca] : a)
    for (const auto& [wb, cb] : b) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      ws_add(out, w, ca * cb);
    }
  return out;
}
}  // namespace detail

// Expands a normalized expression into a sum of generator words.
inline WordSum expand_words(const OperatorExpr& expr) {
  using K = OperatorExpr::Kind;
  const OperatorExpr e = is_normal(expr) ? expr : normalize(expr);
  WordSum out;
  switch (e.kind) {
    case K::Scalar:
      detail::ws_add(out, {}, Coef::from(e.scalar));
      return out;
    case K::Generator:
      detail::ws_add(out, {e.gen}, Coef::one());
      return out;
    case K::Sum:
      for (const auto& c : e.children)
        for (const auto& [w, cf] : expand_words(c)) detail::ws_add(out, w, cf);
      return out;
    case K::Prod: {
      out = expand_words(e.children[0]);
      for (std::size_t i = 1; i < e.children.size(); ++i) out = detail::ws_mul(out, expand_words(e.children[i]));
      return out;
    }
    case K::Pow:
      break;
  }
  return out;
}

inline std::vector<int> word_shift(const Word& w, int s) {
  std::vector<int> sh(static_cast<std::size_t>(s), 0);
  for (const auto& g : w) {
    if (g.kind == GenKind::Dplus) ++sh[static_cast<std::size_t>(g.factor - 1)];
    if (g.kind == GenKind::Dminus) --sh[static_cast<std::size_t>(g.factor - 1)];
  }
  return sh;
}

// Diagonal-entry polynomial of a zero-shift word.
inline Poly word_diag_poly(const Word& w, const VarLayout& lay) {
  const int nv = lay.size();
  Poly p = Poly::constant(nv, Coef::one());
  for (int k = 0; k < lay.s; ++k) {
    int level = 0;
    std::map<int, int> edges;  // lower level of the edge -> traversals
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      if (it->factor != k + 1 || it->kind == GenKind::Dx) continue;
      if (it->kind == GenKind::D0) {
        p = p * Poly::affine(nv, lay.n(k), Coef::one(), Coef::from(SurdSum(level)));
      } else if (it->kind == GenKind::Dplus) {
        ++edges[level];
        ++level;
      } else if (it->kind == GenKind::Dminus) {
        --level;
        ++edges[level];
      }
    }
    for (const auto& [a, cnt] : edges) {
      // (l - n - a)(l + n + a + 1), once per up/down pair
      Poly f1(nv), f2(nv);
      Monomial m0(static_cast<std::size_t>(nv), 0);
      Monomial ml = m0, mn = m0;
      ml[static_cast<std::size_t>(lay.ell(k))] = 1;
      mn[static_cast<std::size_t>(lay.n(k))] = 1;
      f1.add_term(ml, Coef::one());
      f1.add_term(mn, Coef::from(SurdSum(-1)));
      f1.add_term(m0, Coef::from(SurdSum(-a)));
      f2.add_term(ml, Coef::one());
      f2.add_term(mn, Coef::one());
      f2.add_term(m0, Coef::from(SurdSum(a + 1)));
      const Poly pair = f1 * f2;
      for (int i = 0; i < cnt / 2; ++i) p = p * pair;
    }
  }
  for (const auto& g : w)
    if (g.kind == GenKind::Dx)
      p = p * Poly::affine(nv, lay.xi(g.factor - 1), Coef::from(SurdSum(GaussRational(Rational(0), Rational(1)))),
                           Coef::from(SurdSum(0)));
  return p;
}

struct SystemPolys {
  VarLayout lay;
  std::vector<WordSum> words;
  std::vector<Poly> diag;  // one per operator
  StructureKind structural = StructureKind::General;
  bool reversed = false;
  bool exact = true;
};

inline SystemPolys system_polys(const SystemDef& sys) {
  SystemPolys sp;
  sp.lay = VarLayout(sys.group);
  bool diag = true, lower = true, upper = true;
  for (const auto& op : sys.ops) {
    WordSum ws = expand_words(op.expr);
    Poly p(sp.lay.size());
    for (const auto& [w, c] : ws) {
      const auto sh = word_shift(w, sp.lay.s);
      int first = 0;
      for (int v : sh)
        if (v != 0) {
          first = v;
          break;
        }
      if (first == 0) {
        p = p + word_diag_poly(w, sp.lay) * Poly::constant(sp.lay.size(), c);
      } else {
        diag = false;
        if (first < 0) lower = false;
        if (first > 0) upper = false;
      }
      if (!c.exact) sp.exact = false;
    }
    sp.words.push_back(std::move(ws));
    sp.diag.push_back(std::move(p));
  }
  if (diag)
    sp.structural = StructureKind::Diagonal;
  else if (lower)
    sp.structural = StructureKind::LowerTriangular;
  else if (upper) {
    sp.structural = StructureKind::LowerTriangular;
    sp.reversed = true;
  }
  return sp;
}

// ---------------------------------------------------------------- fast evaluation

// Point in integer coordinates: xi_j, 2 l_k, 2 n_k.
using IntPoint = std::vector<std::int64_t>;

inline IntPoint int_point(const VarLayout& lay, const Frequency& xi, const MultiIndex& a) {
  IntPoint p(static_cast<std::size_t>(lay.size()));
  for (int j = 0; j < lay.r; ++j) p[static_cast<std::size_t>(j)] = xi.torus[static_cast<std::size_t>(j)];
  for (int k = 0; k < lay.s; ++k) {
    p[static_cast<std::size_t>(lay.ell(k))] = xi.sphere2[static_cast<std::size_t>(k)];
    p[static_cast<std::size_t>(lay.n(k))] = a.sphere2n[static_cast<std::size_t>(k)];
  }
  return p;
}

// Half-integer degree of a monomial (exponents on l and n variables).
inline int half_degree(const VarLayout& lay, const Monomial& m) {
  int h = 0;
  for (int v = lay.r; v < lay.size(); ++v) h += m[static_cast<std::size_t>(v)];
  return h;
}

// High-precision value at an integer point; resolves cancellation that
// double evaluation loses for transcendental coefficients.
inline HPComplex eval_hp(const Poly& p, const VarLayout& lay, const IntPoint& pt) {
  HPComplex z;
  for (const auto& [m, c] : p.terms()) {
    HPReal mv = 1;
    for (std::size_t v = 0; v < m.size(); ++v)
      for (int e = 0; e < m[v]; ++e)
        mv *= lay.is_xi(static_cast<int>(v)) ? HPReal(pt[v]) : HPReal(pt[v]) / 2;
    z = z + c.hp * HPComplex(mv);
  }
  return z;
}

// A polynomial compiled for fast double evaluation and exact zero tests.
// For each radicand, re/im parts are scaled to integer coefficients over
// the integer coordinates.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  CompiledPoly(const Poly& p, const VarLayout& lay) : lay_(lay) {
    for (const auto& [m, c] : p.terms()) {
      terms_.push_back({m, c.value()});
      for (std::size_t v = 0; v < m.size(); ++v) max_exp_ = std::max(max_exp_, m[v]);
    }
    exact_ = p.exact();
    if (!exact_) return;
    // Collect radicands.
    std::map<std::int64_t, std::vector<std::pair<std::size_t, GaussRational>>> by_rad;
    std::size_t idx = 0;
    for (const auto& [m, c] : p.terms()) {
      for (const auto& [rad, q] : c.ex.terms()) by_rad[rad].push_back({idx, q});
      ++idx;
    }
    try {
      for (const auto& [rad, list] : by_rad) {
        Component comp;
        comp.radicand = rad;
        std::int64_t scale = 1;
        int hmax = 0;
        for (const auto& [i, q] : list) hmax = std::max(hmax, half_degree(lay, terms_[i].mono));
        for (const auto& [i, q] : list) {
          scale = lcm_checked(scale, q.re.den());
          scale = lcm_checked(scale, q.im.den());
        }
        comp.scale = Rational(scale) * Rational(std::int64_t{1} << hmax);
        for (const auto& [i, q] : list) {
          const int h = half_degree(lay, terms_[i].mono);
          const Rational f = Rational(scale) * Rational(std::int64_t{1} << (hmax - h));
          const Rational re = q.re * f, im = q.im * f;
          if (!re.is_integer() || !im.is_integer()) throw ExactOverflow();
          comp.terms.push_back({i, re.num(), im.num()});
        }
        comps_.push_back(std::move(comp));
      }
    } catch (const ExactOverflow&) {
      exact_ = false;
      comps_.clear();
    }
  }

  bool exact() const { return exact_; }
  bool empty() const { return terms_.empty(); }

  std::complex<double> value(const IntPoint& p) const {
    std::complex<double> z;
    for (const auto& t : terms_) {
      double mv = 1.0;
      for (std::size_t v = 0; v < t.mono.size(); ++v) {
        if (!t.mono[v]) continue;
        const double x = lay_.is_xi(static_cast<int>(v)) ? static_cast<double>(p[v]) : 0.5 * static_cast<double>(p[v]);
        for (int e = 0; e < t.mono[v]; ++e) mv *= x;
      }
      z += t.coef * mv;
    }
    return z;
  }

  // Value summed exactly per radicand before rounding; requires exact().
  std::complex<double> exact_value(const IntPoint& p) const {
    std::complex<double> z;
    for (const auto& comp : comps_) {
      __int128 re = 0, im = 0;
      for (const auto& t : comp.terms) {
        const auto mv = int_mono(terms_[t.index].mono, p);
        re += static_cast<__int128>(t.re) * mv;
        im += static_cast<__int128>(t.im) * mv;
      }
      const double s = std::sqrt(static_cast<double>(comp.radicand)) / comp.scale.to_double();
      z += s * std::complex<double>(static_cast<double>(re), static_cast<double>(im));
    }
    return z;
  }

  // Exact zero test; requires exact().
  bool is_zero_at(const IntPoint& p) const {
    for (const auto& comp : comps_) {
      __int128 re = 0, im = 0;
      for (const auto& t : comp.terms) {
        const auto mv = int_mono(terms_[t.index].mono, p);
        re += static_cast<__int128>(t.re) * mv;
        im += static_cast<__int128>(t.im) * mv;
      }
      if (re != 0 || im != 0) return false;
    }
    return true;
  }

 private:
  struct Term {
    Monomial mono;
    std::complex<double> coef;
  };
  struct IntTerm {
    std::size_t index;
    std::int64_t re, im;
  };
  struct Component {
    std::int64_t radicand;
    Rational scale;
    std::vector<IntTerm> terms;
  };

  static __int128 int_mono(const Monomial& m, const IntPoint& p) {
    __int128 v = 1;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int e = 0; e < m[i]; ++e) v *= p[i];
    return v;
  }

  VarLayout lay_;
  std::vector<Term> terms_;
  std::vector<Component> comps_;
  bool exact_ = false;
  int max_exp_ = 0;
};

}  // namespace lieharm
