#pragma once

// Matrix symbols sigma_P(xi) of left-invariant operators at one frequency.
// Rows/columns follow index_set(xi); sphere blocks ascend in n, so dplus is
// a sub-diagonal shift. Exact surd entries ride alongside the doubles.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "lieharm/duals.hpp"
#include "lieharm/opalg.hpp"

namespace lieharm {

using cd = std::complex<double>;

inline bool tol_zero(cd z, double scale) { return std::abs(z) <= tol::kZero * (1.0 + scale); }

// Column-compressed symbol with an exact shadow.
class SparseSymbol {
 public:
  struct Entry {
    std::int64_t row;
    cd value;
    SurdScalar exact;
  };

  SparseSymbol() = default;
  explicit SparseSymbol(std::int64_t d) : d_(d), cols_(static_cast<std::size_t>(d)) {}

  static SparseSymbol scaled_identity(std::int64_t d, const Scalar& s) {
    SparseSymbol m(d);
    const auto ex = s.surd();
    m.exact_ = ex.has_value();
    const cd v = s.value();
    if (m.exact_ && ex->is_zero()) return m;
    for (std::int64_t k = 0; k < d; ++k)
      m.cols_[static_cast<std::size_t>(k)].push_back({k, v, ex.value_or(SurdScalar())});
    return m;
  }

  std::int64_t dim() const { return d_; }
  bool exact() const { return exact_; }
  bool downgraded() const { return downgraded_; }
  const std::vector<Entry>& col(std::int64_t c) const { return cols_[static_cast<std::size_t>(c)]; }

  void push(std::int64_t row, std::int64_t col, cd v, SurdScalar ex) {
    cols_[static_cast<std::size_t>(col)].push_back({row, v, ex});
  }

  double max_abs() const {
    double m = 0;
    for (const auto& c : cols_)
      for (const auto& e : c) m = std::max(m, std::abs(e.value));
    return m;
  }

  // Entry (r, c); zero when absent.
  cd at(std::int64_t r, std::int64_t c) const {
    for (const auto& e : col(c))
      if (e.row == r) return e.value;
    return {};
  }
  SurdScalar exact_at(std::int64_t r, std::int64_t c) const {
    for (const auto& e : col(c))
      if (e.row == r) return e.exact;
    return {};
  }

  friend SparseSymbol operator+(const SparseSymbol& a, const SparseSymbol& b) {
    SparseSymbol out(a.d_);
    out.exact_ = a.exact_ && b.exact_;
    out.downgraded_ = a.downgraded_ || b.downgraded_;
    for (std::int64_t c = 0; c < a.d_; ++c) {
      AccList acc;
      for (const auto* src : {&a, &b})
        for (const auto& e : src->col(c)) acc.at(e.row).add(e.value, e.exact, out.exact_);
      out.collect(c, acc);
    }
    return out;
  }

  friend SparseSymbol operator*(const SparseSymbol& a, const SparseSymbol& b) {
    SparseSymbol out(a.d_);
    out.exact_ = a.exact_ && b.exact_;
    out.downgraded_ = a.downgraded_ || b.downgraded_;
    for (std::int64_t c = 0; c < b.d_; ++c) {
      AccList acc;
      for (const auto& eb : b.col(c))
        for (const auto& ea : a.col(eb.row)) {
          SurdScalar p;
          if (out.exact_) {
            try {
              p = ea.exact * eb.exact;
            } catch (const ExactOverflow&) {
              out.exact_ = false;
            }
          }
          acc.at(ea.row).add(ea.value * eb.value, p, out.exact_);
        }
      out.collect(c, acc);
    }
    return out;
  }

  Eigen::MatrixXcd dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d_, d_);
    for (std::int64_t c = 0; c < d_; ++c)
      for (const auto& e : col(c)) m(e.row, c) = e.value;
    return m;
  }

  // Float downgrade after a failed exact step; keeps the double values.
  void drop_exact() {
    if (exact_) downgraded_ = true;
    exact_ = false;
  }

 private:
  struct Acc {
    cd value;
    SurdScalar exact;
    bool seen = false;
    void add(cd v, const SurdScalar& e, bool& exact_flag) {
      value += v;
      if (!exact_flag) return;
      if (!seen || exact.is_zero()) {
        exact = e;
      } else if (!e.is_zero()) {
        if (e.m != exact.m) {
          exact_flag = false;
        } else {
          try {
            exact = SurdScalar(exact.q + e.q, exact.m);
          } catch (const ExactOverflow&) {
            exact_flag = false;
          }
        }
      }
      seen = true;
    }
  };

  // Columns hold a handful of entries; a flat list beats a map here.
  struct AccList {
    std::vector<std::pair<std::int64_t, Acc>> items;
    Acc& at(std::int64_t row) {
      for (auto& [r, a] : items)
        if (r == row) return a;
      if (items.empty()) items.reserve(4);
      items.emplace_back(row, Acc{});
      return items.back().second;
    }
  };

  void collect(std::int64_t c, AccList& acc) {
    auto& col = cols_[static_cast<std::size_t>(c)];
    std::sort(acc.items.begin(), acc.items.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    col.reserve(acc.items.size());
    for (const auto& [r, a] : acc.items) {
      if (exact_ && a.exact.is_zero()) continue;
      col.push_back({r, a.value, a.exact});
    }
  }

  friend SparseSymbol finalize(SparseSymbol s, bool was_exact);

  std::int64_t d_ = 0;
  std::vector<std::vector<Entry>> cols_;
  bool exact_ = true;
  bool downgraded_ = false;
};

// Records whether exactness was lost along the way and, while still exact,
// refreshes the doubles from the exact values (exact zeros become 0.0).
inline SparseSymbol finalize(SparseSymbol s, bool was_exact) {
  if (was_exact && !s.exact_) s.downgraded_ = true;
  if (s.exact_)
    for (auto& col : s.cols_)
      for (auto& e : col) e.value = e.exact.to_complex();
  return s;
}

namespace detail {

inline SparseSymbol gen_sparse(const Generator& g, const Frequency& xi) {
  const std::int64_t d = dim(xi);
  SparseSymbol m(d);
  if (g.kind == GenKind::Dx) {
    if (g.factor < 1 || g.factor > static_cast<int>(xi.torus.size()))
      throw DimensionError("torus index out of range in " + g.str());
    const std::int64_t v = xi.torus[static_cast<std::size_t>(g.factor - 1)];
    if (v == 0) return m;
    const SurdScalar ex(GaussRational(Rational(0), Rational(v)));
    for (std::int64_t k = 0; k < d; ++k) m.push(k, k, ex.to_complex(), ex);
    return m;
  }
  if (!g.normal()) throw UnsupportedError("generator " + g.str() + " must be normalized first");
  const auto f = static_cast<std::size_t>(g.factor - 1);
  if (g.factor < 1 || f >= xi.sphere2.size()) throw DimensionError("sphere index out of range in " + g.str());
  const std::int64_t L2 = xi.sphere2[f];
  // Stride of factor f in the flat index.
  std::int64_t stride = 1;
  for (std::size_t q = f + 1; q < xi.sphere2.size(); ++q) stride *= xi.sphere2[q] + 1;
  for (std::int64_t c = 0; c < d; ++c) {
    const std::int64_t pos = (c / stride) % (L2 + 1);
    const std::int64_t n2 = 2 * pos - L2;
    switch (g.kind) {
      case GenKind::D0:
        if (n2 != 0) {
          const SurdScalar ex(GaussRational(Rational(n2, 2)));
          m.push(c, c, ex.to_complex(), ex);
        }
        break;
      case GenKind::Dplus:
        if (n2 < L2) {
          // (l-n)(l+n+1), both factors integral.
          const std::int64_t rad = ((L2 - n2) / 2) * ((L2 + n2 + 2) / 2);
          const SurdScalar ex = -SurdScalar::sqrt_of(rad);
          m.push(c + stride, c, ex.to_complex(), ex);
        }
        break;
      case GenKind::Dminus:
        if (n2 > -L2) {
          const std::int64_t rad = ((L2 + n2) / 2) * ((L2 - n2 + 2) / 2);
          const SurdScalar ex = -SurdScalar::sqrt_of(rad);
          m.push(c - stride, c, ex.to_complex(), ex);
        }
        break;
      default:
        break;
    }
  }
  return m;
}

inline SparseSymbol eval_sparse(const OperatorExpr& e, const Frequency& xi) {
  using K = OperatorExpr::Kind;
  switch (e.kind) {
    case K::Scalar:
      return SparseSymbol::scaled_identity(dim(xi), e.scalar);
    case K::Generator:
      return gen_sparse(e.gen, xi);
    case K::Pow: {
      SparseSymbol acc = SparseSymbol::scaled_identity(dim(xi), Scalar::exact(GaussRational(1)));
      const SparseSymbol base = eval_sparse(e.children[0], xi);
      for (int i = 0; i < e.exponent; ++i) acc = acc * base;
      return acc;
    }
    case K::Sum: {
      SparseSymbol acc = eval_sparse(e.children[0], xi);
      for (std::size_t i = 1; i < e.children.size(); ++i) acc = acc + eval_sparse(e.children[i], xi);
      return acc;
    }
    case K::Prod: {
      SparseSymbol acc = eval_sparse(e.children[0], xi);
      for (std::size_t i = 1; i < e.children.size(); ++i) acc = acc * eval_sparse(e.children[i], xi);
      return acc;
    }
  }
  return {};
}

inline bool has_unnormalized(const OperatorExpr& e) {
  if (e.kind == OperatorExpr::Kind::Generator) return !e.gen.normal();
  for (const auto& c : e.children)
    if (has_unnormalized(c)) return true;
  return false;
}

}  // namespace detail

// Sparse symbol; unnormalized input is normalized first.
inline SparseSymbol symbol_sparse(const OperatorExpr& expr, const Frequency& xi) {
  const OperatorExpr& e = detail::has_unnormalized(expr) ? normalize(expr) : expr;
  return finalize(detail::eval_sparse(e, xi), expr.is_exact());
}

struct SymbolMatrix {
  Frequency freq;
  Eigen::MatrixXcd entries;
  std::optional<std::vector<SurdScalar>> exact;  // row-major, d*d
  bool is_zero = false;
  bool is_diagonal = false;
  bool is_lower_triangular = false;
  bool downgraded = false;

  const SurdScalar& exact_at(Eigen::Index r, Eigen::Index c) const {
    return (*exact)[static_cast<std::size_t>(r * entries.cols() + c)];
  }
};

inline SymbolMatrix to_matrix(const SparseSymbol& s, const Frequency& xi) {
  SymbolMatrix m;
  m.freq = xi;
  m.entries = s.dense();
  m.downgraded = s.downgraded();
  const std::int64_t d = s.dim();
  const double scale = s.max_abs();
  if (s.exact()) {
    m.exact = std::vector<SurdScalar>(static_cast<std::size_t>(d * d));
    for (std::int64_t c = 0; c < d; ++c)
      for (const auto& e : s.col(c)) (*m.exact)[static_cast<std::size_t>(e.row * d + c)] = e.exact;
  }
  bool zero = true, diag = true, lower = true;
  for (std::int64_t c = 0; c < d; ++c)
    for (const auto& e : s.col(c)) {
      const bool nz = s.exact() ? !e.exact.is_zero() : !tol_zero(e.value, scale);
      if (!nz) continue;
      zero = false;
      if (e.row != c) diag = false;
      if (e.row < c) lower = false;
    }
  m.is_zero = zero;
  m.is_diagonal = diag;
  m.is_lower_triangular = lower;
  return m;
}

inline SymbolMatrix symbol(const OperatorExpr& expr, const GroupSpec& g, const Frequency& xi) {
  validate(g, xi);
  check_bounds(expr, g);
  return to_matrix(symbol_sparse(expr, xi), xi);
}

inline SymbolMatrix generator_symbol(const Generator& gen, const GroupSpec& g, const Frequency& xi) {
  validate(g, xi);
  if (!gen.normal()) throw UnsupportedError("generator " + gen.str() + " must be normalized first");
  return to_matrix(detail::gen_sparse(gen, xi), xi);
}

enum class StructureKind { Diagonal, LowerTriangular, General };

inline const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Diagonal:
      return "Diagonal";
    case StructureKind::LowerTriangular:
      return "LowerTriangular";
    default:
      return "General";
  }
}

struct StructureReport {
  StructureKind kind = StructureKind::General;
  // Upper-triangular input: the index order is reversed to make it lower.
  bool reversed_basis = false;
};

inline StructureReport structure(const SystemDef& sys, const std::vector<Frequency>& freqs) {
  bool diag = true, lower = true, upper = true;
  for (const auto& xi : freqs)
    for (const auto& op : sys.ops) {
      const SparseSymbol s = symbol_sparse(op.expr, xi);
      const double scale = s.max_abs();
      for (std::int64_t c = 0; c < s.dim(); ++c)
        for (const auto& e : s.col(c)) {
          const bool nz = s.exact() ? !e.exact.is_zero() : !tol_zero(e.value, scale);
          if (!nz || e.row == c) continue;
          diag = false;
          if (e.row < c) lower = false;
          if (e.row > c) upper = false;
        }
    }
  if (diag) return {StructureKind::Diagonal, false};
  if (lower) return {StructureKind::LowerTriangular, false};
  if (upper) return {StructureKind::LowerTriangular, true};
  return {StructureKind::General, false};
}

struct DiagonalTable {
  Eigen::MatrixXcd values;  // r x d
  std::optional<std::vector<std::vector<SurdScalar>>> exact;
};

inline DiagonalTable diagonal_entries(const SystemDef& sys, const Frequency& xi) {
  validate(sys.group, xi);
  const std::int64_t d = dim(xi);
  DiagonalTable t;
  t.values.resize(static_cast<Eigen::Index>(sys.ops.size()), d);
  std::vector<std::vector<SurdScalar>> ex(sys.ops.size(), std::vector<SurdScalar>(static_cast<std::size_t>(d)));
  bool all_exact = true;
  for (std::size_t j = 0; j < sys.ops.size(); ++j) {
    const SparseSymbol s = symbol_sparse(sys.ops[j].expr, xi);
    all_exact = all_exact && s.exact();
    for (std::int64_t k = 0; k < d; ++k) {
      t.values(static_cast<Eigen::Index>(j), k) = s.at(k, k);
      ex[j][static_cast<std::size_t>(k)] = s.exact_at(k, k);
    }
  }
  if (all_exact) t.exact = std::move(ex);
  return t;
}

// Reverses the index order of a square matrix (P M P with P the flip).
inline Eigen::MatrixXcd flip(const Eigen::MatrixXcd& m) {
  return m.colwise().reverse().rowwise().reverse();
}

}  // namespace lieharm
