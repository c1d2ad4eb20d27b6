#pragma once

// Constructive side: compatibility checks, the diagonal division solver,
// triangular back-substitution, kernel splitting and the counterexample
// fields built from zero sets and witness sequences.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lieharm/analysis.hpp"

namespace lieharm {

class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------- symbols per frequency

struct FrequencySymbols {
  std::vector<SymbolMatrix> ops;
  bool exact = true;
  bool diagonal = true;
  bool lower = true;
};

inline FrequencySymbols symbols_at(const SystemDef& nsys, const Frequency& xi) {
  FrequencySymbols fs;
  for (const auto& op : nsys.ops) {
    fs.ops.push_back(to_matrix(symbol_sparse(op.expr, xi), xi));
    const auto& m = fs.ops.back();
    fs.exact = fs.exact && m.exact.has_value();
    fs.diagonal = fs.diagonal && m.is_diagonal;
    fs.lower = fs.lower && m.is_lower_triangular;
  }
  return fs;
}

inline bool entry_zero(const SymbolMatrix& m, Eigen::Index r, Eigen::Index c) {
  if (m.exact) return m.exact_at(r, c).is_zero();
  return tol_zero(m.entries(r, c), max_abs(m.entries));
}

// Slot k is in Z when every operator's diagonal entry vanishes there.
inline std::vector<bool> zero_rows(const FrequencySymbols& fs) {
  const Eigen::Index d = fs.ops.front().entries.rows();
  std::vector<bool> z(static_cast<std::size_t>(d), true);
  for (Eigen::Index k = 0; k < d; ++k)
    for (const auto& m : fs.ops)
      if (!entry_zero(m, k, k)) {
        z[static_cast<std::size_t>(k)] = false;
        break;
      }
  return z;
}

inline void check_support(const SystemDef& sys, const std::vector<CoeffField>& f) {
  if (f.size() != sys.ops.size())
    throw DimensionError("expected " + std::to_string(sys.ops.size()) + " right-hand sides, got " +
                         std::to_string(f.size()));
  for (const auto& fj : f) {
    if (!(fj.group == sys.group)) throw DimensionError("right-hand side group does not match the system group");
    if (fj.data.size() != f.front().data.size()) throw DimensionError("right-hand sides have different supports");
    auto it = f.front().data.begin();
    for (const auto& [xi, m] : fj.data) {
      if (!(xi == it->first)) throw DimensionError("right-hand sides have different supports");
      ++it;
    }
  }
}

// ---------------------------------------------------------------- compat

// Diagonal entry (k, k) of operator j: exact or double when the symbol is
// exact, high precision from the diagonal polynomial otherwise.
inline std::complex<double> diag_entry(const SystemPolys& sp, const FrequencySymbols& fs, std::size_t j,
                                       const Frequency& xi, Eigen::Index k, bool& zero) {
  const SymbolMatrix& m = fs.ops[j];
  if (m.exact || j >= sp.diag.size()) {
    zero = entry_zero(m, k, k);
    return m.entries(k, k);
  }
  const HPComplex z = eval_hp(sp.diag[j], sp.lay, int_point(sp.lay, xi, multi_index(xi, k)));
  zero = z.re == 0 && z.im == 0;
  return z.to_complex();
}

// Diagonal entries of a structurally diagonal system, straight from the
// compiled diagonal polynomials.
class DiagonalEval {
 public:
  explicit DiagonalEval(const SystemPolys& sp) : sp_(sp) {
    for (const auto& p : sp.diag) polys_.emplace_back(p, sp.lay);
  }

  std::size_t size() const { return polys_.size(); }

  std::complex<double> entry(std::size_t j, const IntPoint& p, bool& zero) const {
    if (polys_[j].exact()) {
      zero = polys_[j].is_zero_at(p);
      return zero ? std::complex<double>() : polys_[j].exact_value(p);
    }
    const HPComplex z = eval_hp(sp_.diag[j], sp_.lay, p);
    zero = z.re == 0 && z.im == 0;
    return z.to_complex();
  }

  // Entries of every operator at one frequency: column k holds slot k.
  Eigen::MatrixXcd at(const Frequency& xi, std::vector<std::vector<bool>>* zero = nullptr) const {
    const Eigen::Index d = dim(xi);
    Eigen::MatrixXcd v(static_cast<Eigen::Index>(polys_.size()), d);
    if (zero) zero->assign(polys_.size(), std::vector<bool>(static_cast<std::size_t>(d)));
    for (Eigen::Index k = 0; k < d; ++k) {
      const IntPoint p = int_point(sp_.lay, xi, multi_index(xi, k));
      for (std::size_t j = 0; j < polys_.size(); ++j) {
        bool z = false;
        v(static_cast<Eigen::Index>(j), k) = entry(j, p, z);
        if (zero) (*zero)[j][static_cast<std::size_t>(k)] = z;
      }
    }
    return v;
  }

 private:
  const SystemPolys& sp_;
  std::vector<CompiledPoly> polys_;
};

struct Violation {
  Frequency freq;
  std::string relation;  // slot_zero | cross_relation | image_membership
  double magnitude = 0;
};

struct CompatReport {
  bool ok = true;
  std::vector<Violation> violations;
};

// Symbol matrices with diagonals refined by diag_entry.
inline std::vector<Eigen::MatrixXcd> refined_symbols(const SystemPolys& sp, const FrequencySymbols& fs,
                                                     const Frequency& xi) {
  std::vector<Eigen::MatrixXcd> out;
  for (std::size_t j = 0; j < fs.ops.size(); ++j) {
    out.push_back(fs.ops[j].entries);
    if (fs.ops[j].exact || j >= sp.diag.size()) continue;
    for (Eigen::Index k = 0; k < out.back().rows(); ++k) {
      bool zero = false;
      out.back()(k, k) = diag_entry(sp, fs, j, xi, k, zero);
    }
  }
  return out;
}

inline CompatReport compat_check(const SystemDef& sys, const std::vector<CoeffField>& f, double tol = tol::kResidual) {
  check_support(sys, f);
  const SystemDef nsys = normalize(sys);
  const SystemPolys sp = system_polys(sys);
  std::vector<Frequency> freqs;
  for (const auto& [xi, m] : f.front().data) freqs.push_back(xi);
  std::vector<std::vector<Violation>> per(freqs.size());
  const std::size_t r = f.size();
  const bool structural_diag = sp.structural == StructureKind::Diagonal;
  const std::optional<DiagonalEval> de = structural_diag ? std::optional<DiagonalEval>(sp) : std::nullopt;
  parallel_for(freqs.size(), [&](std::size_t i) {
    const Frequency& xi = freqs[i];
    const Eigen::Index d = dim(xi);
    double fnorm = 0;
    for (const auto& fj : f) fnorm = std::max(fnorm, max_abs(fj.at(xi)));
    const double scale = std::max(1.0, fnorm);
    auto& out = per[i];
    if (structural_diag) {
      // row k of f_j must be sigma_j(k) x_k: slot_zero plus the row-wise cross relation
      std::vector<std::vector<bool>> zero;
      const Eigen::MatrixXcd v = de->at(xi, &zero);
      for (std::size_t j = 0; j < r; ++j)
        for (Eigen::Index k = 0; k < d; ++k) {
          if (!zero[j][static_cast<std::size_t>(k)]) continue;
          const double mag = f[j].at(xi).row(k).cwiseAbs().maxCoeff();
          if (mag > tol * scale) out.push_back({xi, "slot_zero", mag});
        }
      const double sc = std::max(1.0, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t l = j + 1; l < r; ++l) {
          const Eigen::VectorXcd a = v.row(static_cast<Eigen::Index>(j)).transpose();
          const Eigen::VectorXcd b = v.row(static_cast<Eigen::Index>(l)).transpose();
          const double mag = max_abs(a.asDiagonal() * f[l].at(xi) - b.asDiagonal() * f[j].at(xi));
          if (mag > tol * sc * scale) out.push_back({xi, "cross_relation", mag});
        }
      return;
    }
    const FrequencySymbols fs = symbols_at(nsys, xi);
    if (fs.diagonal) {
      for (std::size_t j = 0; j < r; ++j)
        for (Eigen::Index k = 0; k < d; ++k) {
          bool zero = false;
          diag_entry(sp, fs, j, xi, k, zero);
          if (!zero) continue;
          const double mag = f[j].at(xi).row(k).cwiseAbs().maxCoeff();
          if (mag > tol * scale) out.push_back({xi, "slot_zero", mag});
        }
    }
    const std::vector<Eigen::MatrixXcd> sig = refined_symbols(sp, fs, xi);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t l = j + 1; l < r; ++l) {
        const auto& A = sig[j];
        const auto& B = sig[l];
        const double sc = std::max({1.0, max_abs(A), max_abs(B)});
        if (max_abs(A * B - B * A) > tol::kZero * sc * sc) continue;
        const double mag = max_abs(A * f[l].at(xi) - B * f[j].at(xi));
        if (mag > tol * sc * scale) out.push_back({xi, "cross_relation", mag});
      }
    Eigen::MatrixXcd S(static_cast<Eigen::Index>(r) * d, d), F(static_cast<Eigen::Index>(r) * d, d);
    for (std::size_t j = 0; j < r; ++j) {
      S.middleRows(static_cast<Eigen::Index>(j) * d, d) = sig[j];
      F.middleRows(static_cast<Eigen::Index>(j) * d, d) = f[j].at(xi);
    }
    const double Fn = F.norm();
    if (Fn > 0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(S);
      cod.setThreshold(tol::kZero);
      const Eigen::MatrixXcd X = cod.solve(F);
      const double res = (S * X - F).norm();
      if (res > tol * Fn) out.push_back({xi, "image_membership", res / Fn});
    }
  });
  CompatReport rep;
  for (auto& v : per)
    for (auto& x : v) rep.violations.push_back(std::move(x));
  rep.ok = rep.violations.empty();
  return rep;
}

inline void require_compatible(const SystemDef& sys, const std::vector<CoeffField>& f) {
  const CompatReport rep = compat_check(sys, f);
  if (!rep.ok) {
    const auto& v = rep.violations.front();
    throw CompatibilityError("right-hand side violates " + v.relation + " at frequency " + to_string(v.freq) +
                             " (magnitude " + std::to_string(v.magnitude) + ")");
  }
}

// ---------------------------------------------------------------- diagonal solver

enum class SolveMode { Distributional, Smooth };

struct DiagonalSolution {
  CoeffField u;
  std::optional<DecayEstimate> decay;
};

inline double max_weight(const CoeffField& f) {
  double w = 1;
  for (const auto& [xi, m] : f.data) w = std::max(w, weight(xi));
  return w;
}

inline DiagonalSolution solve_diagonal(const SystemDef& sys, const std::vector<CoeffField>& f,
                                       SolveMode mode = SolveMode::Distributional) {
  check_support(sys, f);
  const SystemPolys sp = system_polys(sys);
  if (sp.structural != StructureKind::Diagonal) throw UnsupportedError("solve_diagonal needs a diagonal system");
  require_compatible(sys, f);
  const DiagonalEval de(sp);
  std::vector<Frequency> freqs;
  for (const auto& [xi, m] : f.front().data) freqs.push_back(xi);
  std::vector<Eigen::MatrixXcd> res(freqs.size());
  parallel_for(freqs.size(), [&](std::size_t i) {
    const Frequency& xi = freqs[i];
    std::vector<std::vector<bool>> zeros;
    const Eigen::MatrixXcd v = de.at(xi, &zeros);
    const Eigen::Index d = dim(xi);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      std::size_t best = de.size();
      double bmag = 0;
      std::complex<double> piv;
      for (std::size_t j = 0; j < de.size(); ++j) {
        if (zeros[j][static_cast<std::size_t>(k)]) continue;
        const std::complex<double> s = v(static_cast<Eigen::Index>(j), k);
        const double mag = std::abs(s);
        if (best == de.size() || mag > bmag) {
          best = j;
          bmag = mag;
          piv = s;
        }
      }
      if (best == de.size()) continue;
      u.row(k) = f[best].at(xi).row(k) / piv;
    }
    res[i] = std::move(u);
  });
  DiagonalSolution sol;
  sol.u = CoeffField(sys.group, "solve_diagonal");
  for (std::size_t i = 0; i < freqs.size(); ++i) sol.u.data.emplace(freqs[i], std::move(res[i]));
  if (mode == SolveMode::Smooth) sol.decay = decay_fit(sol.u, max_weight(sol.u));
  return sol;
}

// ---------------------------------------------------------------- triangular solver

struct TriangularDiag {
  double c_sigma = 1;  // |off-diagonal| <= c_sigma * weight^n_sigma
  double n_sigma = 0;
  std::int64_t d_bound = 0;  // 0: inferred as max d over the support
  std::optional<double> nilpotent_bound;
};

// Back-substitution statistics at one frequency. With floor the smallest
// pivot and E the largest off-diagonal entry over floor, |u_k| is bounded by
// B (1 + E)^(k-1), B = max|f| / floor.
struct BlockStats {
  double floor = 0;
  double E = 0;
  double B = 0;
  bool bidiagonal = true;
  bool chain_ok = true;
  std::optional<bool> linear_ok;  // |u_k| <= k B, checked on bidiagonal data with E <= 1
  double max_ratio = 0;           // max_k |u_k| / (B (1 + E)^(k-1))
};

struct BlockSolve {
  Eigen::MatrixXcd u;
  BlockStats stats;
  double zrow_residual = 0;  // relative, on rows where every diagonal vanishes
};

// sigma: lower-triangular symbols, f: right-hand sides, zrow: rows in Z.
inline BlockSolve triangular_block_solve(const std::vector<Eigen::MatrixXcd>& sigma,
                                         const std::vector<Eigen::MatrixXcd>& f, const std::vector<bool>& zrow) {
  const Eigen::Index d = sigma.front().rows();
  BlockSolve bs;
  bs.u = Eigen::MatrixXcd::Zero(d, d);
  std::vector<std::size_t> jk(static_cast<std::size_t>(d), 0);
  double fmax = 0, offmax = 0;
  bs.stats.floor = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    fmax = std::max(fmax, max_abs(f[j]));
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < r; ++c) {
        const double a = std::abs(sigma[j](r, c));
        offmax = std::max(offmax, a);
        if (a != 0 && c != r - 1) bs.stats.bidiagonal = false;
      }
  }
  // Pivot row per k: the most diagonally dominant operator row, then the
  // largest diagonal, then the smallest j. Without off-diagonal entries this
  // is the largest-modulus rule of the diagonal solver.
  for (Eigen::Index k = 0; k < d; ++k) {
    if (zrow[static_cast<std::size_t>(k)]) continue;
    double best = -1, best_score = -1;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      const double a = std::abs(sigma[j](k, k));
      if (a == 0) continue;
      const double off = k > 0 ? sigma[j].row(k).head(k).cwiseAbs().sum() : 0.0;
      const double score = a / (a + off);
      if (score > best_score || (score == best_score && a > best)) {
        best_score = score;
        best = a;
        jk[static_cast<std::size_t>(k)] = j;
      }
    }
    bs.stats.floor = std::min(bs.stats.floor, best);
  }
  const double fscale = std::max(1.0, fmax);
  for (Eigen::Index col = 0; col < d; ++col)
    for (Eigen::Index k = 0; k < d; ++k) {
      if (zrow[static_cast<std::size_t>(k)]) {
        for (std::size_t j = 0; j < sigma.size(); ++j) {
          std::complex<double> acc = f[j](k, col);
          for (Eigen::Index i = 0; i < k; ++i) acc -= sigma[j](k, i) * bs.u(i, col);
          bs.zrow_residual = std::max(bs.zrow_residual, std::abs(acc) / fscale);
        }
        continue;
      }
      const std::size_t j = jk[static_cast<std::size_t>(k)];
      std::complex<double> acc = f[j](k, col);
      for (Eigen::Index i = 0; i < k; ++i) acc -= sigma[j](k, i) * bs.u(i, col);
      bs.u(k, col) = acc / sigma[j](k, k);
    }
  auto& st = bs.stats;
  if (std::isfinite(st.floor) && st.floor > 0) {
    st.B = fmax / st.floor;
    st.E = offmax / st.floor;
    const bool lin = st.bidiagonal && st.E <= 1;
    if (lin) st.linear_ok = true;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double uk = bs.u.row(k).cwiseAbs().maxCoeff();
      const double bound = st.B * std::pow(1 + st.E, static_cast<double>(k));
      if (bound > 0) st.max_ratio = std::max(st.max_ratio, uk / bound);
      if (uk > bound * (1 + 1e-9) + 1e-300) st.chain_ok = false;
      if (lin && uk > static_cast<double>(k + 1) * st.B * (1 + 1e-9)) st.linear_ok = false;
    }
  }
  return bs;
}

struct TriangularSolution {
  CoeffField u;
  bool chain_ok = true;
  std::optional<bool> linear_ok;
  double max_ratio = 0;
  std::int64_t max_dim = 0;
  bool bounds_ok = true;  // off-diagonal entries within c_sigma * weight^n_sigma
  std::vector<std::string> notes;
};

inline TriangularSolution solve_triangular(const SystemDef& sys, const std::vector<CoeffField>& f,
                                           const TriangularDiag& diag = {}) {
  check_support(sys, f);
  const SystemPolys sp = system_polys(sys);
  if (sp.structural == StructureKind::General) throw UnsupportedError("solve_triangular needs a triangular system");
  const bool rev = sp.reversed;
  const SystemDef nsys = normalize(sys);
  std::vector<Frequency> freqs;
  for (const auto& [xi, m] : f.front().data) freqs.push_back(xi);
  std::vector<BlockSolve> res(freqs.size());
  std::vector<char> within(freqs.size(), 1);
  parallel_for(freqs.size(), [&](std::size_t i) {
    const Frequency& xi = freqs[i];
    const FrequencySymbols fs = symbols_at(nsys, xi);
    std::vector<Eigen::MatrixXcd> sig, rhs;
    for (std::size_t j = 0; j < fs.ops.size(); ++j) {
      sig.push_back(rev ? flip(fs.ops[j].entries) : fs.ops[j].entries);
      rhs.push_back(rev ? flip(f[j].at(xi)) : f[j].at(xi));
    }
    std::vector<bool> z = zero_rows(fs);
    if (rev) std::reverse(z.begin(), z.end());
    res[i] = triangular_block_solve(sig, rhs, z);
    if (rev) res[i].u = flip(res[i].u);
    double off = 0;
    for (const auto& s : sig)
      for (Eigen::Index r = 0; r < s.rows(); ++r)
        for (Eigen::Index c = 0; c < r; ++c) off = std::max(off, std::abs(s(r, c)));
    if (off > diag.c_sigma * std::pow(weight(xi), diag.n_sigma) * (1 + 1e-12)) within[i] = 0;
  });
  TriangularSolution sol;
  sol.u = CoeffField(sys.group, "solve_triangular");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (res[i].zrow_residual > tol::kResidual)
      throw CompatibilityError("inconsistent right-hand side on a zero row at frequency " + to_string(freqs[i]) +
                               " (residual " + std::to_string(res[i].zrow_residual) + ")");
    const auto& st = res[i].stats;
    sol.chain_ok = sol.chain_ok && st.chain_ok;
    if (st.linear_ok) sol.linear_ok = sol.linear_ok.value_or(true) && *st.linear_ok;
    sol.max_ratio = std::max(sol.max_ratio, st.max_ratio);
    sol.max_dim = std::max(sol.max_dim, dim(freqs[i]));
    sol.bounds_ok = sol.bounds_ok && within[i];
    sol.u.data.emplace(freqs[i], std::move(res[i].u));
  }
  const std::int64_t dbound = diag.d_bound > 0 ? diag.d_bound : sol.max_dim;
  if (sol.max_dim > dbound) sol.notes.push_back("support exceeds d_bound " + std::to_string(dbound));
  if (sys.group.sphere_count > 0) sol.notes.push_back("(BD) fails on the full dual: sphere dimensions are unbounded");
  if (!sol.bounds_ok) sol.notes.push_back("off-diagonal entries exceed c_sigma * weight^n_sigma");
  return sol;
}

// ---------------------------------------------------------------- kernel split

struct KernelSplit {
  CoeffField v;  // orthogonal to the common kernel
  CoeffField w;  // in the common kernel
};

inline KernelSplit kernel_split(const SystemDef& sys, const CoeffField& u) {
  if (!(sys.group == u.group)) throw DimensionError("field group does not match system group");
  const SystemDef nsys = normalize(sys);
  std::vector<Frequency> freqs;
  for (const auto& [xi, m] : u.data) freqs.push_back(xi);
  std::vector<Eigen::MatrixXcd> vs(freqs.size()), ws(freqs.size());
  parallel_for(freqs.size(), [&](std::size_t i) {
    const Frequency& xi = freqs[i];
    const FrequencySymbols fs = symbols_at(nsys, xi);
    const Eigen::MatrixXcd& U = u.at(xi);
    const Eigen::Index d = U.rows();
    if (fs.diagonal) {
      const auto z = zero_rows(fs);
      Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(d, d), v = U;
      for (Eigen::Index k = 0; k < d; ++k)
        if (z[static_cast<std::size_t>(k)]) {
          w.row(k) = U.row(k);
          v.row(k).setZero();
        }
      vs[i] = std::move(v);
      ws[i] = std::move(w);
      return;
    }
    Eigen::MatrixXcd S(static_cast<Eigen::Index>(fs.ops.size()) * d, d);
    for (std::size_t j = 0; j < fs.ops.size(); ++j) S.middleRows(static_cast<Eigen::Index>(j) * d, d) = fs.ops[j].entries;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thr = tol::kZero * std::max(1.0, sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) > thr) ++rank;
    const Eigen::MatrixXcd N = svd.matrixV().rightCols(d - rank);
    Eigen::MatrixXcd w = N * (N.adjoint() * U);
    vs[i] = U - w;
    ws[i] = std::move(w);
  });
  KernelSplit ks{CoeffField(u.group, "kernel_split v"), CoeffField(u.group, "kernel_split w")};
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    ks.v.data.emplace(freqs[i], std::move(vs[i]));
    ks.w.data.emplace(freqs[i], std::move(ws[i]));
  }
  return ks;
}

// ---------------------------------------------------------------- counterexamples

// Unit kernel elements at `count` distinct Z frequencies: E_kk for
// diagonal symbols, a max-norm-1 null vector in column 0 otherwise.
inline CoeffField counterexample_kernel(const SystemDef& sys, const ZsetReport& z, int count) {
  if (count < 1) throw DimensionError("count must be >= 1");
  const SystemDef nsys = normalize(sys);
  std::vector<Hit> picks;
  for (const auto& h : z.hits) {
    bool seen = false;
    for (const auto& p : picks) seen = seen || p.freq == h.freq;
    if (!seen) picks.push_back(h);
    if (static_cast<int>(picks.size()) == count) break;
  }
  if (static_cast<int>(picks.size()) < count && z.structural.kind == ZKind::InfiniteCertified &&
      z.structural.generator) {
    // Walk l upward on each sphere factor from the generator, keeping the slot's n.
    const CompiledSystem cs(sys);
    const Hit g = *z.structural.generator;
    const MultiIndex a = multi_index(g.freq, g.slot);
    for (std::int64_t t = 0; static_cast<int>(picks.size()) < count && t < 100000; ++t)
      for (std::size_t k = 0; k < g.freq.sphere2.size() && static_cast<int>(picks.size()) < count; ++k) {
        Frequency f = g.freq;
        f.sphere2[k] += 2 * t;
        const IntPoint ip = int_point(cs.sp.lay, f, a);
        bool zero = true;
        for (const auto& p : cs.polys)
          zero = zero && (cs.exact ? p.is_zero_at(ip) : std::abs(p.value(ip)) <= tol::kZero);
        if (!zero) continue;
        bool seen = false;
        for (const auto& p : picks) seen = seen || p.freq == f;
        if (!seen) picks.push_back({f, flat_index(f, a)});
      }
  }
  if (static_cast<int>(picks.size()) < count)
    throw DimensionError("zero set provides " + std::to_string(picks.size()) + " frequencies, " +
                         std::to_string(count) + " requested");
  CoeffField u(sys.group, "counterexample_kernel");
  for (const auto& h : picks) {
    const FrequencySymbols fs = symbols_at(nsys, h.freq);
    const Eigen::Index d = dim(h.freq);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    if (fs.diagonal) {
      m(h.slot, h.slot) = 1;
    } else {
      Eigen::MatrixXcd S(static_cast<Eigen::Index>(fs.ops.size()) * d, d);
      for (std::size_t j = 0; j < fs.ops.size(); ++j) S.middleRows(static_cast<Eigen::Index>(j) * d, d) = fs.ops[j].entries;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv(d - 1) > tol::kZero * std::max(1.0, sv(0)))
        throw DimensionError("no common kernel at frequency " + to_string(h.freq));
      Eigen::VectorXcd x = svd.matrixV().col(d - 1);
      x /= x.cwiseAbs().maxCoeff();
      m.col(0) = x;
    }
    u.set(h.freq, std::move(m));
  }
  return u;
}

struct WitnessRhs {
  std::vector<CoeffField> f;
  std::vector<Frequency> freqs;
  std::vector<double> forced;  // u(xi_n)_{k_n k_n} forced by P u = f
};

namespace detail {

inline WitnessRhs witness_rhs(const SystemDef& sys, const WitnessSequence& ws, bool grow, const char* label) {
  if (ws.entries.empty()) throw DimensionError("witness sequence is empty");
  const SystemDef nsys = normalize(sys);
  const SystemPolys sp = system_polys(sys);
  WitnessRhs out;
  for (const auto& op : sys.ops) out.f.emplace_back(sys.group, std::string(label) + " " + op.name);
  for (std::size_t n = 0; n < ws.entries.size(); ++n) {
    const auto& e = ws.entries[n];
    for (std::size_t p = 0; p < n; ++p)
      if (ws.entries[p].freq == e.freq) throw DimensionError("witness frequencies are not distinct");
    const double val = grow ? std::pow(e.weight, static_cast<double>(n + 1)) : 1.0;
    const Eigen::Index d = dim(e.freq);
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
    U(e.slot, e.slot) = val;
    for (std::size_t j = 0; j < nsys.ops.size(); ++j) {
      const SparseSymbol s = symbol_sparse(nsys.ops[j].expr, e.freq);
      Eigen::MatrixXcd fj = mul(s, U);
      if (!s.exact() && j < sp.diag.size()) {
        const IntPoint ip = int_point(sp.lay, e.freq, multi_index(e.freq, e.slot));
        fj(e.slot, e.slot) = (eval_hp(sp.diag[j], sp.lay, ip) * HPComplex(HPReal(val))).to_complex();
      }
      out.f[j].set(e.freq, std::move(fj));
    }
    out.freqs.push_back(e.freq);
    out.forced.push_back(val);
  }
  return out;
}

}  // namespace detail

// f_j(xi_n) = sigma_j(xi_n) weight_n^n E_{k_n k_n}: bounded, yet any solution
// has entries weight_n^n.
inline WitnessRhs counterexample_unsolvable(const SystemDef& sys, const WitnessSequence& ws) {
  return detail::witness_rhs(sys, ws, true, "counterexample_unsolvable");
}

// f_j(xi_n) = sigma_j(xi_n) E_{k_n k_n}: rapidly decaying, yet the solution
// keeps unit entries.
inline WitnessRhs counterexample_smooth_rhs(const SystemDef& sys, const WitnessSequence& ws) {
  return detail::witness_rhs(sys, ws, false, "counterexample_smooth_rhs");
}

}  // namespace lieharm
