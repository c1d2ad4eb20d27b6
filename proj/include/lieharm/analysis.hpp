#pragma once

// Decision criteria for diagonal and triangular systems: zero-set scans and
// structural certificates, (DC) scans and exact lower bounds, violation
// witness search, and the combined (GH)/(GS) verdict.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lieharm/coeffs.hpp"
#include "lieharm/poly.hpp"

namespace lieharm {

// ================================================================ Z-set

struct Hit {
  Frequency freq;
  std::int64_t slot = 0;  // flat index into index_set(freq)
  friend bool operator==(const Hit&, const Hit&) = default;
};

enum class ZKind { EmptyCertified, FiniteCertified, InfiniteCertified, TruncationOnly };

inline const char* to_string(ZKind k) {
  switch (k) {
    case ZKind::EmptyCertified:
      return "EmptyCertified";
    case ZKind::FiniteCertified:
      return "FiniteCertified";
    case ZKind::InfiniteCertified:
      return "InfiniteCertified";
    default:
      return "TruncationOnly";
  }
}

struct ZStructural {
  ZKind kind = ZKind::TruncationOnly;
  std::vector<Hit> finite;          // FiniteCertified
  std::optional<Hit> generator;     // InfiniteCertified
  std::string rule;                 // InfiniteCertified / TruncationOnly reason
};

struct ZsetReport {
  double cap = 0;
  std::vector<Hit> hits;
  bool exact = true;  // false: hits decided with the float tolerance
  ZStructural structural;
};

namespace detail {

using RPoly = std::map<Monomial, BigRat>;

inline BigRat to_big(const Rational& r) { return BigRat(r.num(), r.den()); }

inline void rp_add(RPoly& p, const Monomial& m, const BigRat& c) {
  if (c == 0) return;
  auto it = p.find(m);
  if (it == p.end()) {
    p.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0) p.erase(it);
}

// Splits a surd-coefficient polynomial into rational polynomials, one per
// (radicand, re/im) pair. Their common zeros are the zeros of the original,
// since sqrt of distinct squarefree integers are linearly independent over Q.
inline std::vector<RPoly> rational_components(const Poly& p) {
  std::map<std::pair<std::int64_t, int>, RPoly> comps;
  for (const auto& [m, c] : p.terms())
    for (const auto& [rad, q] : c.ex.terms()) {
      rp_add(comps[{rad, 0}], m, to_big(q.re));
      rp_add(comps[{rad, 1}], m, to_big(q.im));
    }
  std::vector<RPoly> out;
  for (auto& [k, rp] : comps)
    if (!rp.empty()) out.push_back(std::move(rp));
  return out;
}

struct ZResult {
  ZKind kind = ZKind::EmptyCertified;
  std::vector<std::vector<BigRat>> points;  // full assignments (Finite)
  std::vector<BigRat> generator;            // Infinite
  std::string rule;
};

inline ZResult merge(ZResult a, const ZResult& b) {
  auto rank = [](ZKind k) {
    switch (k) {
      case ZKind::EmptyCertified:
        return 0;
      case ZKind::FiniteCertified:
        return 1;
      case ZKind::TruncationOnly:
        return 2;
      default:
        return 3;
    }
  };
  if (rank(b.kind) > rank(a.kind)) {
    const auto pts = std::move(a.points);
    a = b;
    if (a.kind == ZKind::TruncationOnly || a.kind == ZKind::FiniteCertified)
      a.points.insert(a.points.begin(), pts.begin(), pts.end());
    return a;
  }
  if (a.kind == ZKind::FiniteCertified || a.kind == ZKind::TruncationOnly)
    a.points.insert(a.points.end(), b.points.begin(), b.points.end());
  return a;
}

class ZSolver {
 public:
  explicit ZSolver(VarLayout lay) : lay_(lay) {}

  ZResult solve(std::vector<RPoly> eqs, std::vector<std::optional<BigRat>> asg, int depth = 0) {
    if (depth > 64) return unknown("recursion limit");
    // Substitute and simplify.
    std::vector<RPoly> cur;
    for (const auto& e : eqs) {
      RPoly q = substitute(e, asg);
      if (q.empty()) continue;
      if (q.size() == 1 && is_const(q.begin()->first)) return {};  // nonzero constant: empty
      cur.push_back(std::move(q));
    }
    // Assigned (l, n) pairs must be admissible.
    for (int k = 0; k < lay_.s; ++k) {
      const auto& l = asg[static_cast<std::size_t>(lay_.ell(k))];
      const auto& n = asg[static_cast<std::size_t>(lay_.n(k))];
      if (l && n && !admissible(*l, *n)) return {};
    }
    if (cur.empty()) return finish(asg);

    // A univariate equation pins its variable.
    for (const auto& e : cur) {
      const int v = sole_var(e);
      if (v < 0) continue;
      const auto roots = domain_roots(e, v, asg);
      if (!roots) return unknown("root search out of range");
      ZResult res;
      for (const auto& x : *roots) {
        auto a2 = asg;
        a2[static_cast<std::size_t>(v)] = x;
        res = merge(std::move(res), solve(cur, a2, depth + 1));
      }
      return res;
    }
    // n_k with l_k pinned ranges over a finite J_l.
    for (int k = 0; k < lay_.s; ++k) {
      const auto vn = lay_.n(k);
      const auto& l = asg[static_cast<std::size_t>(lay_.ell(k))];
      if (!l || asg[static_cast<std::size_t>(vn)] || !appears(cur, vn)) continue;
      ZResult res;
      const auto L2 = static_cast<std::int64_t>(*l * 2);
      for (std::int64_t n2 = -L2; n2 <= L2; n2 += 2) {
        auto a2 = asg;
        a2[static_cast<std::size_t>(vn)] = BigRat(n2, 2);
        res = merge(std::move(res), solve(cur, a2, depth + 1));
      }
      return res;
    }
    return lattice(cur, asg, depth);
  }

 private:
  static bool is_const(const Monomial& m) {
    for (int e : m)
      if (e) return false;
    return true;
  }

  static ZResult unknown(const std::string& why) {
    ZResult r;
    r.kind = ZKind::TruncationOnly;
    r.rule = why;
    return r;
  }

  static bool is_half_integer(const BigRat& x) {
    const BigRat y = x * 2;
    return denominator(y) == 1;
  }

  static bool admissible(const BigRat& l, const BigRat& n) {
    if (l < 0 || abs(n) > l) return false;
    return denominator(BigRat(l - n)) == 1;
  }

  RPoly substitute(const RPoly& p, const std::vector<std::optional<BigRat>>& asg) const {
    RPoly out;
    for (const auto& [m, c] : p) {
      BigRat coef = c;
      Monomial mm = m;
      for (std::size_t v = 0; v < m.size(); ++v)
        if (m[v] && asg[v]) {
          for (int e = 0; e < m[v]; ++e) coef *= *asg[v];
          mm[v] = 0;
        }
      rp_add(out, mm, coef);
    }
    return out;
  }

  static int sole_var(const RPoly& p) {
    int v = -1;
    for (const auto& [m, c] : p)
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) {
          if (v >= 0 && v != static_cast<int>(i)) return -1;
          v = static_cast<int>(i);
        }
    return v;
  }

  static bool appears(const std::vector<RPoly>& eqs, int v) {
    for (const auto& e : eqs)
      for (const auto& [m, c] : e)
        if (m[static_cast<std::size_t>(v)]) return true;
    return false;
  }

  // Roots of a univariate polynomial within the variable's domain (integers
  // for xi, half-integers for l >= 0 and n). Uses x = t/2 (or t) and the
  // rational root theorem on the integer-coefficient polynomial in t.
  std::optional<std::vector<BigRat>> domain_roots(const RPoly& p, int v,
                                                  const std::vector<std::optional<BigRat>>& asg) const {
    const bool half = !lay_.is_xi(v);
    int deg = 0;
    for (const auto& [m, c] : p) deg = std::max(deg, m[static_cast<std::size_t>(v)]);
    std::vector<BigRat> co(static_cast<std::size_t>(deg + 1));
    for (const auto& [m, c] : p) {
      BigRat scale = 1;
      if (half)
        for (int e = 0; e < m[static_cast<std::size_t>(v)]; ++e) scale /= 2;
      co[static_cast<std::size_t>(m[static_cast<std::size_t>(v)])] += c * scale;
    }
    BigInt den = 1;
    for (const auto& c : co) den = boost::multiprecision::lcm(den, denominator(c));
    std::vector<BigInt> ic;
    for (const auto& c : co) ic.push_back(numerator(BigRat(c * den)));
    std::set<BigInt> cands;
    std::size_t low = 0;
    while (low < ic.size() && ic[low] == 0) ++low;
    if (low > 0) cands.insert(0);
    const BigInt a0 = abs(ic[low]);
    if (a0 > BigInt(1000000000000LL)) return std::nullopt;
    const auto n0 = static_cast<std::int64_t>(a0);
    for (std::int64_t dv = 1; dv * dv <= n0; ++dv)
      if (n0 % dv == 0)
        for (std::int64_t x : {dv, n0 / dv}) {
          cands.insert(x);
          cands.insert(-x);
        }
    std::vector<BigRat> roots;
    for (const auto& t : cands) {
      BigInt acc = 0;
      for (std::size_t i = ic.size(); i-- > 0;) acc = acc * t + ic[i];
      if (acc != 0) continue;
      const BigRat x = half ? BigRat(t, 2) : BigRat(t);
      if (lay_.is_ell(v) && x < 0) continue;
      if (lay_.is_n(v)) {
        const auto& l = asg[static_cast<std::size_t>(lay_.ell(lay_.factor(v)))];
        if (l && !admissible(*l, x)) continue;
      }
      if (lay_.is_ell(v)) {
        const auto& n = asg[static_cast<std::size_t>(lay_.n(lay_.factor(v)))];
        if (n && !admissible(x, *n)) continue;
      }
      roots.push_back(x);
    }
    return roots;
  }

  // No equations left: free variables decide finiteness.
  ZResult finish(const std::vector<std::optional<BigRat>>& asg) const {
    ZResult r;
    std::vector<BigRat> gen(asg.size());
    bool infinite = false;
    std::string rule;
    for (int j = 0; j < lay_.r; ++j) {
      const auto& x = asg[static_cast<std::size_t>(j)];
      if (!x) {
        infinite = true;
        rule = "free torus coordinate " + lay_.name(j);
      }
      gen[static_cast<std::size_t>(j)] = x.value_or(0);
    }
    for (int k = 0; k < lay_.s; ++k) {
      const auto& l = asg[static_cast<std::size_t>(lay_.ell(k))];
      const auto& n = asg[static_cast<std::size_t>(lay_.n(k))];
      BigRat nv = n.value_or(0);
      BigRat lv;
      if (l) {
        lv = *l;
        if (!n) nv = -lv;
      } else {
        lv = abs(nv);
        if (!infinite) rule = "J_l monotonicity: (xi, l + k) in Z for all k >= 0 at slot n" + std::to_string(k + 1);
        infinite = true;
      }
      gen[static_cast<std::size_t>(lay_.ell(k))] = lv;
      gen[static_cast<std::size_t>(lay_.n(k))] = nv;
    }
    r.generator = gen;
    if (infinite) {
      r.kind = ZKind::InfiniteCertified;
      r.rule = rule;
      return r;
    }
    // Enumerate free n over J_l.
    r.kind = ZKind::FiniteCertified;
    std::vector<std::vector<BigRat>> pts{gen};
    for (int k = 0; k < lay_.s; ++k) {
      if (asg[static_cast<std::size_t>(lay_.n(k))]) continue;
      std::vector<std::vector<BigRat>> next;
      const auto L2 = static_cast<std::int64_t>(*asg[static_cast<std::size_t>(lay_.ell(k))] * 2);
      for (const auto& p : pts)
        for (std::int64_t n2 = -L2; n2 <= L2; n2 += 2) {
          auto q = p;
          q[static_cast<std::size_t>(lay_.n(k))] = BigRat(n2, 2);
          next.push_back(std::move(q));
        }
      pts = std::move(next);
    }
    r.points = std::move(pts);
    return r;
  }

  // Affine equations in xi and n (with l free): integer lattice solve via a
  // column Hermite reduction.
  ZResult lattice(const std::vector<RPoly>& eqs, std::vector<std::optional<BigRat>> asg, int depth) {
    std::vector<int> vars;
    for (const auto& e : eqs)
      for (const auto& [m, c] : e) {
        int deg = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
          deg += m[i];
          if (m[i] && std::find(vars.begin(), vars.end(), static_cast<int>(i)) == vars.end())
            vars.push_back(static_cast<int>(i));
        }
        if (deg > 1) return unknown("nonlinear zero-set equations");
      }
    for (int v : vars)
      if (lay_.is_ell(v)) return unknown("affine equations involving l");
    std::sort(vars.begin(), vars.end());
    const std::size_t rows = eqs.size(), cols = vars.size();
    // Integer coordinates: xi as is, n = t/2.
    std::vector<std::vector<BigInt>> A(rows, std::vector<BigInt>(cols));
    std::vector<BigInt> b(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<BigRat> ra(cols);
      BigRat rb = 0;
      for (const auto& [m, c] : eqs[i]) {
        bool cst = true;
        for (std::size_t q = 0; q < cols; ++q)
          if (m[static_cast<std::size_t>(vars[q])]) {
            ra[q] += lay_.is_xi(vars[q]) ? c : c / 2;
            cst = false;
          }
        if (cst) rb -= c;
      }
      BigInt den = denominator(rb);
      for (const auto& x : ra) den = boost::multiprecision::lcm(den, denominator(x));
      for (std::size_t q = 0; q < cols; ++q) A[i][q] = numerator(BigRat(ra[q] * den));
      b[i] = numerator(BigRat(rb * den));
    }
    // Column operations: A U = H lower echelon.
    std::vector<std::vector<BigInt>> U(cols, std::vector<BigInt>(cols));
    for (std::size_t q = 0; q < cols; ++q) U[q][q] = 1;
    auto col_op = [&](std::size_t dst, std::size_t src, const BigInt& f) {  // col dst -= f * col src
      for (auto& row : A) row[dst] -= f * row[src];
      for (auto& row : U) row[dst] -= f * row[src];
    };
    auto col_swap = [&](std::size_t x, std::size_t y) {
      for (auto& row : A) std::swap(row[x], row[y]);
      for (auto& row : U) std::swap(row[x], row[y]);
    };
    std::size_t pc = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)
    for (std::size_t i = 0; i < rows && pc < cols; ++i) {
      for (;;) {
        std::size_t best = cols;
        for (std::size_t q = pc; q < cols; ++q)
          if (A[i][q] != 0 && (best == cols || abs(A[i][q]) < abs(A[i][best]))) best = q;
        if (best == cols) break;
        bool done = true;
        for (std::size_t q = pc; q < cols; ++q)
          if (q != best && A[i][q] != 0) {
            col_op(q, best, A[i][q] / A[i][best]);
            if (A[i][q] != 0) done = false;
          }
        if (done) {
          col_swap(pc, best);
          pivots.push_back({i, pc});
          ++pc;
          break;
        }
      }
    }
    // Forward substitution H y = b.
    std::vector<BigInt> y(cols);
    std::size_t next_pivot = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      BigInt acc = b[i];
      for (std::size_t q = 0; q < cols; ++q)
        if (!(next_pivot < pivots.size() && pivots[next_pivot].first == i && pivots[next_pivot].second == q))
          acc -= A[i][q] * y[q];
      if (next_pivot < pivots.size() && pivots[next_pivot].first == i) {
        const std::size_t q = pivots[next_pivot].second;
        if (acc % A[i][q] != 0) return {};
        y[q] = acc / A[i][q];
        ++next_pivot;
      } else if (acc != 0) {
        return {};
      }
    }
    std::vector<BigRat> x(cols);
    for (std::size_t q = 0; q < cols; ++q) {
      BigInt v = 0;
      for (std::size_t t = 0; t < cols; ++t) v += U[q][t] * y[t];
      x[q] = lay_.is_xi(vars[q]) ? BigRat(v) : BigRat(v, 2);
    }
    for (std::size_t q = 0; q < cols; ++q) asg[static_cast<std::size_t>(vars[q])] = x[q];
    if (pivots.size() < cols) {
      ZResult r = finish(asg);
      r.kind = ZKind::InfiniteCertified;
      r.points.clear();
      r.rule = "integer kernel of rank " + std::to_string(cols - pivots.size());
      return r;
    }
    return solve({}, asg, depth + 1);
  }

  VarLayout lay_;
};

inline Hit hit_from_point(const VarLayout& lay, const std::vector<BigRat>& p) {
  Frequency f;
  MultiIndex a;
  for (int j = 0; j < lay.r; ++j) f.torus.push_back(static_cast<std::int64_t>(p[static_cast<std::size_t>(j)]));
  for (int k = 0; k < lay.s; ++k) {
    f.sphere2.push_back(static_cast<std::int64_t>(p[static_cast<std::size_t>(lay.ell(k))] * 2));
    a.sphere2n.push_back(static_cast<std::int64_t>(p[static_cast<std::size_t>(lay.n(k))] * 2));
  }
  return {f, flat_index(f, a)};
}

}  // namespace detail

inline ZStructural zset_structural(const SystemPolys& sp) {
  ZStructural out;
  if (sp.structural == StructureKind::General) {
    out.rule = "system is not triangular";
    return out;
  }
  std::vector<detail::RPoly> eqs;
  for (const auto& p : sp.diag) {
    if (!p.exact()) {
      out.rule = "inexact coefficients";
      return out;
    }
    for (auto& c : detail::rational_components(p)) eqs.push_back(std::move(c));
  }
  detail::ZSolver solver(sp.lay);
  const auto res = solver.solve(eqs, std::vector<std::optional<BigRat>>(static_cast<std::size_t>(sp.lay.size())));
  out.kind = res.kind;
  out.rule = res.rule;
  if (res.kind == ZKind::FiniteCertified) {
    for (const auto& p : res.points) out.finite.push_back(detail::hit_from_point(sp.lay, p));
    std::sort(out.finite.begin(), out.finite.end(), [](const Hit& a, const Hit& b) {
      if (!(a.freq == b.freq)) return WeightOrder{}(a.freq, b.freq);
      return a.slot < b.slot;
    });
    out.finite.erase(std::unique(out.finite.begin(), out.finite.end()), out.finite.end());
  }
  if (res.kind == ZKind::InfiniteCertified) out.generator = detail::hit_from_point(sp.lay, res.generator);
  return out;
}

inline ZStructural zset_structural(const SystemDef& sys) { return zset_structural(system_polys(sys)); }

// ================================================================ slot scan

struct FreqScan {
  std::vector<std::int64_t> zero_slots;
  double min_m = std::numeric_limits<double>::infinity();  // over non-Z slots
  std::int64_t argmin = -1;
};

struct CompiledSystem {
  SystemPolys sp;
  std::vector<CompiledPoly> polys;
  bool exact = true;

  explicit CompiledSystem(const SystemDef& sys) : sp(system_polys(sys)) {
    for (const auto& p : sp.diag) {
      polys.emplace_back(p, sp.lay);
      if (!polys.back().exact()) exact = false;
    }
  }

  FreqScan scan(const Frequency& xi) const {
    FreqScan fs;
    const auto d = dim(xi);
    std::vector<std::complex<double>> vals(polys.size());
    for (std::int64_t k = 0; k < d; ++k) {
      const MultiIndex a = multi_index(xi, k);
      const IntPoint p = int_point(sp.lay, xi, a);
      double m = 0;
      bool zero = true;
      for (std::size_t j = 0; j < polys.size(); ++j) {
        vals[j] = polys[j].value(p);
        m = std::max(m, std::abs(vals[j]));
        if (exact && !polys[j].is_zero_at(p)) zero = false;
      }
      if (!exact) zero = m <= tol::kZero;
      if (zero) {
        fs.zero_slots.push_back(k);
        continue;
      }
      if (m < fs.min_m) {
        fs.min_m = m;
        fs.argmin = k;
      }
    }
    return fs;
  }
};

inline void require_triangular(const SystemPolys& sp) {
  if (sp.structural == StructureKind::General)
    throw UnsupportedError("system is neither diagonal nor triangular in the Peter-Weyl basis");
}

inline std::vector<FreqScan> scan_all(const CompiledSystem& cs, const std::vector<Frequency>& freqs) {
  std::vector<FreqScan> out(freqs.size());
  parallel_for(freqs.size(), [&](std::size_t i) { out[i] = cs.scan(freqs[i]); });
  return out;
}

// ================================================================ DC

struct DCCertificate {
  double C = 0;
  double M = 0;
  std::string kind;  // "constant-floor" | "quadratic-irrational"
  std::string detail;
};

namespace detail {

struct RealComponent {
  std::map<std::int64_t, std::map<Monomial, Rational>> by_rad;  // radicand -> real poly
};

inline std::int64_t scale_for(const VarLayout& lay, const std::map<Monomial, Rational>& p) {
  std::int64_t L = 1;
  for (const auto& [m, c] : p) L = lcm_checked(L, detail::narrow(static_cast<__int128>(c.den()) << half_degree(lay, m)));
  return L;
}

inline double abs_sum(const std::map<Monomial, Rational>& p) {
  double s = 0;
  for (const auto& [m, c] : p) s += std::abs(c.to_double());
  return s;
}

inline int total_degree(const std::map<Monomial, Rational>& p) {
  int d = 0;
  for (const auto& [m, c] : p) {
    int t = 0;
    for (int e : m) t += e;
    d = std::max(d, t);
  }
  return d;
}

}  // namespace detail

// Exact lower bound m(xi, k) >= C * weight^-M on every slot where some
// diagonal entry is nonzero. Supported: Gaussian-rational coefficients times
// a single surd (constant floor), and first-order entries mixing rationals
// with one quadratic surd (conjugate bound, exponent 1).
inline std::optional<DCCertificate> dc_certificate(const SystemPolys& sp) {
  if (sp.structural == StructureKind::General) return std::nullopt;
  DCCertificate cert;
  cert.C = std::numeric_limits<double>::infinity();
  cert.kind = "constant-floor";
  bool any = false;
  try {
    for (std::size_t j = 0; j < sp.diag.size(); ++j) {
      const Poly& p = sp.diag[j];
      if (p.is_zero()) continue;
      if (!p.exact()) return std::nullopt;
      for (int part = 0; part < 2; ++part) {
        std::map<std::int64_t, std::map<Monomial, Rational>> comp;
        for (const auto& [m, c] : p.terms())
          for (const auto& [rad, q] : c.ex.terms()) {
            const Rational v = part == 0 ? q.re : q.im;
            if (!v.is_zero()) comp[rad][m] = v;
          }
        if (comp.empty()) continue;
        any = true;
        double C = 0, M = 0;
        if (comp.size() == 1) {
          const auto& [rad, poly] = *comp.begin();
          C = std::sqrt(static_cast<double>(rad)) / static_cast<double>(detail::scale_for(sp.lay, poly));
        } else if (comp.size() == 2 && comp.begin()->first == 1) {
          const auto& pa = comp.begin()->second;
          const auto& [d, pb] = *std::next(comp.begin());
          if (detail::total_degree(pa) > 1 || detail::total_degree(pb) > 1) return std::nullopt;
          const double D = static_cast<double>(
              lcm_checked(detail::scale_for(sp.lay, pa), detail::scale_for(sp.lay, pb)));
          C = 1.0 / (D * D * (detail::abs_sum(pa) + detail::abs_sum(pb) * std::sqrt(static_cast<double>(d))));
          M = 1;
          cert.kind = "quadratic-irrational";
          cert.detail = "|a + b*sqrt(" + std::to_string(d) + ")| >= 1/(|a| + |b|*sqrt(" + std::to_string(d) +
                        ")) for integers a, b not both zero";
        } else {
          return std::nullopt;
        }
        cert.C = std::min(cert.C, C);
        cert.M = std::max(cert.M, M);
      }
    }
  } catch (const ExactOverflow&) {
    return std::nullopt;
  }
  if (!any) return std::nullopt;
  if (cert.detail.empty()) cert.detail = "scaled entries are nonzero Gaussian integers";
  return cert;
}

inline std::optional<DCCertificate> dc_certificate(const SystemDef& sys) {
  return dc_certificate(system_polys(sys));
}

struct ShellMin {
  int index = 0;
  double min_m = 0;
  double weight = 0;
  Frequency freq;
  std::int64_t slot = 0;
  std::size_t population = 0;  // non-Z slots
};

struct WitnessEntry {
  Frequency freq;
  std::int64_t slot = 0;
  double value = 0;     // m(xi_n, k_n)
  double weight = 0;
  double exponent = 0;  // m = weight^-exponent
};

struct WitnessSequence {
  std::vector<WitnessEntry> entries;
  int depth = 0;  // largest K with exponent_n >= n for n <= K
  std::string strategy;
};

struct DCReport {
  double cap = 0;
  std::vector<ShellMin> shells;
  double C_hat = 0, M_hat = 0;
  double global_min = std::numeric_limits<double>::infinity();
  std::optional<Hit> global_argmin;
  std::size_t zero_slots = 0;
  bool exact = true;
  bool fast_path = false;
  std::optional<DCCertificate> certificate;
  std::optional<WitnessSequence> witness;
};

namespace detail {

inline int shell_of(double w) { return static_cast<int>(std::floor(std::log2(w))); }

inline void fit_shells(DCReport& rep) {
  if (rep.shells.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& s : rep.shells) {
      x.push_back(std::log(s.weight));
      y.push_back(std::log(s.min_m));
    }
    rep.M_hat = -linear_fit(x, y).second;
  } else {
    rep.M_hat = 0;
  }
}

// Single first-order operator on T^2 with large caps: for each xi_2 the
// minimum over xi_1 in a weight band sits at the integer nearest the real
// root, clamped to the band.
inline bool fast_path_applies(const CompiledSystem& cs, const GroupSpec& g, double cap) {
  if (g.torus_rank != 2 || g.sphere_count != 0 || cs.polys.size() != 1) return false;
  if (cap < 1500) return false;
  const Poly& p = cs.sp.diag[0];
  if (p.degree() > 1) return false;
  Monomial m1{1, 0};
  return p.terms().count(m1) != 0;
}

inline void fast_scan(const CompiledSystem& cs, double cap, DCReport& rep) {
  const Poly& p = cs.sp.diag[0];
  std::complex<double> a, b, c;
  for (const auto& [m, cf] : p.terms()) {
    if (m[0]) a = cf.value();
    else if (m[1]) b = cf.value();
    else c = cf.value();
  }
  std::vector<std::pair<Frequency, double>> cands;  // (freq, m)
  const auto R = static_cast<std::int64_t>(std::floor(std::sqrt(cap * cap - 1)));
  const int top = shell_of(cap);
  std::map<int, ShellMin> shells;
  double cmin_all = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= top; ++t) {
    const double lo = std::ldexp(1.0, t), hi = std::min(std::ldexp(1.0, t + 1), std::nextafter(cap, 1e300));
    for (std::int64_t x2 = -R; x2 <= R; ++x2) {
      const double base = 1.0 + static_cast<double>(x2) * static_cast<double>(x2);
      // xi_1^2 in [lo^2 - base, hi^2 - base)
      const double qlo = lo * lo - base, qhi = hi * hi - base;
      if (qhi < 0) continue;
      const auto amin = qlo <= 0 ? std::int64_t{0} : static_cast<std::int64_t>(std::ceil(std::sqrt(qlo)));
      const auto amax = static_cast<std::int64_t>(std::floor(std::sqrt(qhi)));
      const std::complex<double> z = -(b * static_cast<double>(x2) + c) / a;
      const auto target = static_cast<std::int64_t>(std::llround(z.real()));
      for (int sgn : {1, -1}) {
        std::int64_t x1lo = sgn > 0 ? amin : -amax, x1hi = sgn > 0 ? amax : -amin;
        if (x1lo > x1hi) continue;
        for (std::int64_t x1 : {std::clamp(target, x1lo, x1hi), std::clamp(target + 1, x1lo, x1hi),
                                std::clamp(target - 1, x1lo, x1hi)}) {
          const Frequency f{{x1, x2}, {}};
          const double w = weight(f);
          if (w < lo || w >= hi || w > cap) continue;
          const IntPoint ip{x1, x2};
          const bool zero = cs.exact ? cs.polys[0].is_zero_at(ip) : std::abs(cs.polys[0].value(ip)) <= tol::kZero;
          if (zero) continue;
          const double m = std::abs(cs.polys[0].value(ip));
          ShellMin& s = shells[t];
          s.index = t;
          ++s.population;
          if (s.population == 1 || m < s.min_m) {
            s.min_m = m;
            s.weight = w;
            s.freq = f;
            s.slot = 0;
          }
          cands.push_back({f, m});
          cmin_all = std::min(cmin_all, m);
        }
      }
    }
  }
  for (auto& [t, s] : shells) rep.shells.push_back(s);
  fit_shells(rep);
  rep.C_hat = std::numeric_limits<double>::infinity();
  for (const auto& [f, m] : cands) rep.C_hat = std::min(rep.C_hat, m * std::pow(weight(f), rep.M_hat));
  rep.global_min = cmin_all;
  for (const auto& s : rep.shells)
    if (s.min_m == cmin_all) rep.global_argmin = Hit{s.freq, 0};
}

}  // namespace detail

inline ZsetReport zset_scan(const SystemDef& sys, double cap) {
  CompiledSystem cs(sys);
  require_triangular(cs.sp);
  ZsetReport rep;
  rep.cap = cap;
  rep.exact = cs.exact;
  rep.structural = zset_structural(cs.sp);
  if (detail::fast_path_applies(cs, sys.group, cap)) {
    // Zeros of a xi_1 + b xi_2 + c: for each xi_2 only the integer nearest the root can vanish.
    std::complex<double> a, b, c;
    for (const auto& [m, cf] : cs.sp.diag[0].terms()) {
      if (m[0]) a = cf.value();
      else if (m[1]) b = cf.value();
      else c = cf.value();
    }
    const auto R = static_cast<std::int64_t>(std::floor(std::sqrt(cap * cap - 1)));
    for (std::int64_t x2 = -R; x2 <= R; ++x2) {
      const std::complex<double> z = -(b * static_cast<double>(x2) + c) / a;
      const auto x1 = static_cast<std::int64_t>(std::llround(z.real()));
      const Frequency f{{x1, x2}, {}};
      if (weight(f) > cap) continue;
      const IntPoint ip{x1, x2};
      const bool zero = cs.exact ? cs.polys[0].is_zero_at(ip) : std::abs(cs.polys[0].value(ip)) <= tol::kZero;
      if (zero) rep.hits.push_back({f, 0});
    }
    std::sort(rep.hits.begin(), rep.hits.end(), [](const Hit& x, const Hit& y) { return WeightOrder{}(x.freq, y.freq); });
    return rep;
  }
  const auto freqs = enumerate_frequencies(sys.group, cap);
  const auto scans = scan_all(cs, freqs);
  for (std::size_t i = 0; i < freqs.size(); ++i)
    for (auto k : scans[i].zero_slots) rep.hits.push_back({freqs[i], k});
  return rep;
}

inline DCReport dc_scan(const SystemDef& sys, double cap) {
  CompiledSystem cs(sys);
  require_triangular(cs.sp);
  DCReport rep;
  rep.cap = cap;
  rep.exact = cs.exact;
  rep.certificate = dc_certificate(cs.sp);
  if (detail::fast_path_applies(cs, sys.group, cap)) {
    rep.fast_path = true;
    detail::fast_scan(cs, cap, rep);
    return rep;
  }
  const auto freqs = enumerate_frequencies(sys.group, cap);
  const auto scans = scan_all(cs, freqs);
  std::map<int, ShellMin> shells;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const auto& fs = scans[i];
    rep.zero_slots += fs.zero_slots.size();
    if (fs.argmin < 0) continue;
    const double w = weight(freqs[i]);
    const int t = detail::shell_of(w);
    ShellMin& s = shells[t];
    s.index = t;
    s.population += static_cast<std::size_t>(dim(freqs[i])) - fs.zero_slots.size();
    if (s.weight == 0 || fs.min_m < s.min_m) {
      s.min_m = fs.min_m;
      s.weight = w;
      s.freq = freqs[i];
      s.slot = fs.argmin;
    }
    if (fs.min_m < rep.global_min) {
      rep.global_min = fs.min_m;
      rep.global_argmin = Hit{freqs[i], fs.argmin};
    }
  }
  for (auto& [t, s] : shells) rep.shells.push_back(s);
  detail::fit_shells(rep);
  rep.C_hat = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < freqs.size(); ++i)
    if (scans[i].argmin >= 0)
      rep.C_hat = std::min(rep.C_hat, scans[i].min_m * std::pow(weight(freqs[i]), rep.M_hat));
  if (rep.shells.empty()) rep.C_hat = 0;
  return rep;
}

// ================================================================ witnesses

enum class WitnessStrategy { ShellScan, ContinuedFraction };

namespace detail {

// Longest chain with increasing weight and strictly increasing exponent
// such that exponent_n >= n for every position n; ties go to the chain with
// smaller weights.
inline WitnessSequence best_chain(std::vector<WitnessEntry> cands, const std::string& strategy) {
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.weight < b.weight; });
  const std::size_t n = cands.size();
  // len[i]: longest valid chain ending at i; prev for reconstruction.
  std::vector<int> len(n, 0), prev(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (cands[i].exponent >= 1) len[i] = 1;
    for (std::size_t j = 0; j < i; ++j) {
      if (len[j] == 0 || !(cands[j].weight < cands[i].weight) || !(cands[j].exponent < cands[i].exponent)) continue;
      if (cands[i].exponent >= len[j] + 1 && len[j] + 1 > len[i]) {
        len[i] = len[j] + 1;
        prev[i] = static_cast<int>(j);
      }
    }
  }
  WitnessSequence ws;
  ws.strategy = strategy;
  int best = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (len[i] > 0 && (best < 0 || len[i] > len[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
  if (best < 0) return ws;
  for (int i = best; i >= 0; i = prev[static_cast<std::size_t>(i)]) ws.entries.push_back(cands[static_cast<std::size_t>(i)]);
  std::reverse(ws.entries.begin(), ws.entries.end());
  ws.depth = len[static_cast<std::size_t>(best)];
  return ws;
}

struct TwoTermShape {
  int var_u = -1, var_v = -1;  // variable indices
  HPComplex cu, cv;            // coefficients per integer coordinate
};

inline std::optional<TwoTermShape> two_term_shape(const SystemPolys& sp, std::string& why) {
  if (sp.diag.size() != 1) {
    why = "continued-fraction search needs a single operator";
    return std::nullopt;
  }
  const Poly& p = sp.diag[0];
  if (p.terms().size() != 2 || p.degree() != 1) {
    why = "continued-fraction search needs exactly two first-order terms and no constant";
    return std::nullopt;
  }
  TwoTermShape sh;
  for (const auto& [m, c] : p.terms()) {
    int v = -1;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) v = static_cast<int>(i);
    if (v < 0 || sp.lay.is_ell(v)) {
      why = "continued-fraction search needs terms in torus or d0 variables";
      return std::nullopt;
    }
    // n = t/2 in integer coordinates
    const HPComplex coef = sp.lay.is_xi(v) ? c.hp : c.hp * HPComplex(HPReal(0.5));
    if (sh.var_u < 0) {
      sh.var_u = v;
      sh.cu = coef;
    } else {
      sh.var_v = v;
      sh.cv = coef;
    }
  }
  return sh;
}

}  // namespace detail

inline WitnessSequence witnesses_from_shells(const DCReport& rep) {
  std::vector<WitnessEntry> cands;
  for (const auto& s : rep.shells) {
    if (!(s.weight > 1) || !(s.min_m > 0)) continue;
    cands.push_back({s.freq, s.slot, s.min_m, s.weight, -std::log(s.min_m) / std::log(s.weight)});
  }
  return detail::best_chain(std::move(cands), "shell_scan");
}

// Continued-fraction witnesses for c_u * u + c_v * v with c_v / c_u real:
// convergents p/q of rho = c_v / c_u with q <= cap give u = -p, v = q.
inline std::optional<WitnessSequence> dc_witness_search(const SystemDef& sys, double cap, WitnessStrategy strategy) {
  const SystemPolys sp = system_polys(sys);
  require_triangular(sp);
  if (strategy == WitnessStrategy::ShellScan) {
    const DCReport rep = dc_scan(sys, cap);
    WitnessSequence ws = witnesses_from_shells(rep);
    if (ws.depth < 2) return std::nullopt;
    return ws;
  }
  std::string why;
  const auto sh = detail::two_term_shape(sp, why);
  if (!sh) throw UnsupportedError(why);
  const HPComplex rho_c = sh->cv / sh->cu;
  const HPReal nrm = abs(rho_c.re) + abs(rho_c.im);
  if (abs(rho_c.im) > nrm * HPReal("1e-40")) throw UnsupportedError("coefficient ratio is not real");
  const HPReal rho = rho_c.re;
  const HPReal cu_abs = sqrt(sh->cu.re * sh->cu.re + sh->cu.im * sh->cu.im);
  const HPReal arho = abs(rho);
  const int sgn = rho < 0 ? -1 : 1;
  const VarLayout& lay = sp.lay;

  auto make_entry = [&](const BigInt& p, const BigInt& q) -> std::optional<WitnessEntry> {
    // u = -sgn * p, v = q (integer coordinates)
    const HPReal val = cu_abs * abs(HPReal(q) * arho - HPReal(p));
    if (val == 0) return std::nullopt;
    IntPoint ip(static_cast<std::size_t>(lay.size()), 0);
    ip[static_cast<std::size_t>(sh->var_u)] = -sgn * static_cast<std::int64_t>(p);
    ip[static_cast<std::size_t>(sh->var_v)] = static_cast<std::int64_t>(q);
    Frequency f;
    MultiIndex a;
    for (int j = 0; j < lay.r; ++j) f.torus.push_back(ip[static_cast<std::size_t>(j)]);
    for (int k = 0; k < lay.s; ++k) {
      const auto n2 = ip[static_cast<std::size_t>(lay.n(k))];
      f.sphere2.push_back(n2 < 0 ? -n2 : n2);
      a.sphere2n.push_back(n2);
    }
    WitnessEntry e;
    e.freq = f;
    e.slot = flat_index(f, a);
    e.value = static_cast<double>(val);
    e.weight = weight(f);
    if (!(e.weight > 1)) return std::nullopt;
    e.exponent = static_cast<double>(-log(val) / log(HPReal(e.weight)));
    return e;
  };

  std::vector<WitnessEntry> cands;
  // Convergents via the standard recurrence.
  BigInt p_prev = 1, q_prev = 0;
  HPReal x = arho;
  BigInt a0 = static_cast<BigInt>(floor(x));
  BigInt p = a0, q = 1;
  const BigInt qmax = static_cast<BigInt>(static_cast<long long>(std::floor(cap)));
  HPReal frac = x - HPReal(a0);
  for (int it = 0; it < 200 && q <= qmax; ++it) {
    if (auto e = make_entry(p, q)) cands.push_back(*e);
    if (frac < HPReal("1e-45")) break;
    x = 1 / frac;
    const BigInt ak = static_cast<BigInt>(floor(x));
    frac = x - HPReal(ak);
    const BigInt pn = ak * p + p_prev, qn = ak * q + q_prev;
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
  }
  WitnessSequence ws = detail::best_chain(std::move(cands), "continued_fraction");
  if (ws.depth < 2) return std::nullopt;
  return ws;
}

// ================================================================ verdict

enum class Truth { Holds, Fails, ConsistentUpToCap, Unknown };

inline const char* to_string(Truth t) {
  switch (t) {
    case Truth::Holds:
      return "Holds";
    case Truth::Fails:
      return "Fails";
    case Truth::ConsistentUpToCap:
      return "ConsistentUpToCap";
    default:
      return "Unknown";
  }
}

struct ClassifyOptions {
  int n_min = 3;                  // witness depth needed for a failure certificate
  double witness_cap = 1e7;       // denominator bound for continued fractions
  bool bd_asserted = false;       // user asserts (BD) with d_bound
  std::int64_t d_bound = 0;
};

struct Verdict {
  Truth gh = Truth::Unknown;
  Truth gs = Truth::Unknown;
  StructureKind structure = StructureKind::General;
  bool reversed_basis = false;
  std::optional<ZsetReport> zset;
  std::optional<DCReport> dc;
  std::vector<std::string> certificates;
  std::vector<std::string> notes;
};

inline Verdict classify(const SystemDef& sys, double cap, const ClassifyOptions& opt = {}) {
  Verdict v;
  const SystemPolys sp = system_polys(sys);
  v.structure = sp.structural;
  v.reversed_basis = sp.reversed;
  if (sp.structural == StructureKind::General) {
    v.notes.push_back("system is neither diagonal nor triangular in the fixed basis");
    return v;
  }
  v.zset = zset_scan(sys, cap);
  v.dc = dc_scan(sys, cap);
  auto& dc = *v.dc;
  // Witness search: continued fractions when the shape allows, shell minima otherwise.
  std::string why;
  if (detail::two_term_shape(sp, why)) {
    try {
      dc.witness = dc_witness_search(sys, opt.witness_cap, WitnessStrategy::ContinuedFraction);
    } catch (const UnsupportedError&) {
      dc.witness = std::nullopt;
    }
  }
  if (!dc.witness) {
    WitnessSequence ws = witnesses_from_shells(dc);
    if (ws.depth >= 2) dc.witness = ws;
  }
  const ZKind zk = v.zset->structural.kind;
  const bool z_finite = zk == ZKind::EmptyCertified || zk == ZKind::FiniteCertified;
  const bool dc_cert = dc.certificate.has_value();
  const bool wit_cert = dc.witness && dc.witness->depth >= opt.n_min;
  if (dc_cert)
    v.certificates.push_back("DC: " + dc.certificate->kind + " m >= " + std::to_string(dc.certificate->C) +
                             " * weight^-" + std::to_string(dc.certificate->M));
  if (zk != ZKind::TruncationOnly) v.certificates.push_back(std::string("Z: ") + to_string(zk));
  if (wit_cert) v.certificates.push_back("witness sequence of depth " + std::to_string(dc.witness->depth));

  if (sp.structural == StructureKind::Diagonal) {
    if (zk == ZKind::InfiniteCertified || wit_cert)
      v.gh = Truth::Fails;
    else if (z_finite && dc_cert)
      v.gh = Truth::Holds;
    else
      v.gh = Truth::ConsistentUpToCap;
    if (dc_cert)
      v.gs = Truth::Holds;
    else if (wit_cert)
      v.gs = Truth::Fails;
    else
      v.gs = Truth::ConsistentUpToCap;
  } else {
    std::int64_t dmax = 0;
    for (const auto& f : enumerate_frequencies(sys.group, cap)) dmax = std::max(dmax, dim(f));
    const bool bd = opt.bd_asserted && opt.d_bound > 0 && dmax <= opt.d_bound;
    if (sys.group.sphere_count > 0 && opt.bd_asserted)
      v.notes.push_back("(BD) asserted although sphere factors have unbounded dimensions");
    if (bd && z_finite && dc_cert) {
      v.gh = Truth::Holds;
      v.certificates.push_back("triangular: (BD) with d_bound " + std::to_string(opt.d_bound));
    } else {
      v.gh = Truth::ConsistentUpToCap;
    }
    v.gs = v.gh == Truth::Holds ? Truth::Holds : Truth::Unknown;
  }
  if (v.gh == Truth::Holds && v.gs != Truth::Holds) v.gs = Truth::Holds;
  return v;
}

}  // namespace lieharm
