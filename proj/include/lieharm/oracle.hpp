#pragma once

// Independent numerical ground truth on S^3 = SU(2): Wigner matrices from
// the symmetric-power realization, finite-difference generator actions and
// pointwise evaluation of truncated Peter-Weyl sums.
//
// Conventions: q = (w, x, y, z) maps to U = [[w+iz, ix-y], [ix+y, w-iz]] in
// the basis (n=-1/2, n=1/2); exp(tY_k) = cos(t/2) + sin(t/2) * (i, j, k)_k.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "lieharm/coeffs.hpp"

namespace lieharm {

using Quat = std::array<double, 4>;  // (w, x, y, z)

inline Quat quat_mul(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

inline Quat quat_exp(int axis, double t) {
  Quat q{std::cos(t / 2), 0, 0, 0};
  q[static_cast<std::size_t>(axis)] = std::sin(t / 2);
  return q;
}

inline Eigen::Matrix2cd su2(const Quat& q) {
  using C = std::complex<double>;
  Eigen::Matrix2cd U;
  U << C(q[0], q[3]), C(-q[2], q[1]), C(q[2], q[1]), C(q[0], -q[3]);
  return U;
}

struct GroupPoint {
  std::vector<double> angles;  // torus factors
  std::vector<Quat> spheres;   // unit quaternions
};

inline Eigen::MatrixXcd wigner_matrix(std::int64_t two_ell, const Quat& q) {
  if (two_ell < 0) throw DimensionError("two_ell must be >= 0");
  const double nrm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::abs(nrm - 1.0) > 1e-12) throw DimensionError("quaternion is not a unit quaternion");
  const Eigen::Matrix2cd U = su2(q);
  const auto n = static_cast<int>(two_ell);
  // binom and factorial tables
  std::vector<double> fact(static_cast<std::size_t>(n + 1), 1.0);
  for (int k = 1; k <= n; ++k) fact[static_cast<std::size_t>(k)] = fact[static_cast<std::size_t>(k - 1)] * k;
  auto binom = [&](int a, int b) { return fact[static_cast<std::size_t>(a)] / (fact[static_cast<std::size_t>(b)] * fact[static_cast<std::size_t>(a - b)]); };
  // (a y + b x)^k as coefficients of x^j.
  auto power = [&](cd a, cd b, int k) {
    std::vector<cd> p(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j)
      p[static_cast<std::size_t>(j)] = binom(k, j) * std::pow(a, k - j) * std::pow(b, j);
    return p;
  };
  Eigen::MatrixXcd T(n + 1, n + 1);
  for (int c = 0; c <= n; ++c) {
    // f_c = y^(n-c) x^c / sqrt((n-c)! c!); y -> U00 y + U10 x, x -> U01 y + U11 x
    const auto py = power(U(0, 0), U(1, 0), n - c);
    const auto px = power(U(0, 1), U(1, 1), c);
    std::vector<cd> prod(static_cast<std::size_t>(n + 1));
    for (std::size_t i = 0; i < py.size(); ++i)
      for (std::size_t j = 0; j < px.size(); ++j) prod[i + j] += py[i] * px[j];
    const double norm_c = std::sqrt(fact[static_cast<std::size_t>(n - c)] * fact[static_cast<std::size_t>(c)]);
    for (int r = 0; r <= n; ++r)
      T(r, c) = prod[static_cast<std::size_t>(r)] *
                std::sqrt(fact[static_cast<std::size_t>(n - r)] * fact[static_cast<std::size_t>(r)]) / norm_c;
  }
  return T;
}

// Central difference of t^l(exp(+-hY)) at the identity, combined into the
// requested generator (D0 = i D3, Dplus = i D1 - D2, Dminus = i D1 + D2).
inline Eigen::MatrixXcd numeric_generator_action(GenKind gen, std::int64_t two_ell, double step = 1e-5) {
  if (!(step > 0 && step <= 1e-2)) throw DimensionError("step must lie in (0, 1e-2]");
  if (gen == GenKind::Dx) throw UnsupportedError("torus generators have no sphere oracle");
  auto D = [&](int axis) {
    return ((wigner_matrix(two_ell, quat_exp(axis, step)) - wigner_matrix(two_ell, quat_exp(axis, -step))) /
            (2.0 * step))
        .eval();
  };
  const cd I(0, 1);
  switch (gen) {
    case GenKind::D1:
      return D(1);
    case GenKind::D2:
      return D(2);
    case GenKind::D3:
      return D(3);
    case GenKind::D0:
      return I * D(3);
    case GenKind::Dplus:
      return I * D(1) - D(2);
    case GenKind::Dminus:
      return I * D(1) + D(2);
    default:
      break;
  }
  return {};
}

struct ConformanceRow {
  GenKind gen;
  std::int64_t two_ell;
  double residual;
};

inline std::vector<ConformanceRow> conformance_table(std::int64_t ell2_max, double step = 1e-5) {
  std::vector<ConformanceRow> rows;
  const GroupSpec g(0, 1);
  for (GenKind k : {GenKind::D1, GenKind::D2, GenKind::D3, GenKind::D0, GenKind::Dplus, GenKind::Dminus})
    for (std::int64_t t = 0; t <= ell2_max; ++t) {
      const Frequency xi{{}, {t}};
      const auto sym = symbol(OperatorExpr::make_gen(k, 1), g, xi).entries;
      const auto num = numeric_generator_action(k, t, step);
      rows.push_back({k, t, (sym - num).cwiseAbs().maxCoeff()});
    }
  return rows;
}

// xi(g) as a Kronecker product in factor order.
inline Eigen::MatrixXcd representation(const Frequency& xi, const GroupPoint& g) {
  cd phase(1, 0);
  for (std::size_t j = 0; j < xi.torus.size(); ++j)
    phase *= std::polar(1.0, static_cast<double>(xi.torus[j]) * g.angles.at(j));
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Constant(1, 1, phase);
  for (std::size_t k = 0; k < xi.sphere2.size(); ++k) {
    const Eigen::MatrixXcd t = wigner_matrix(xi.sphere2[k], g.spheres.at(k));
    Eigen::MatrixXcd K(M.rows() * t.rows(), M.cols() * t.cols());
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c) K.block(r * t.rows(), c * t.cols(), t.rows(), t.cols()) = M(r, c) * t;
    M = std::move(K);
  }
  return M;
}

// u(g) = sum_xi d_xi Tr(u-hat(xi) xi(g)), frequencies with weight <= cap.
inline cd pointwise_eval(const CoeffField& f, const GroupPoint& g, double cap) {
  if (static_cast<int>(g.angles.size()) != f.group.torus_rank ||
      static_cast<int>(g.spheres.size()) != f.group.sphere_count)
    throw DimensionError("group point does not match field group");
  cd sum = 0;
  for (const auto& [xi, m] : f.data) {
    if (weight(xi) > cap) continue;
    const Eigen::MatrixXcd rep = representation(xi, g);
    cd tr = 0;
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b) tr += m(a, b) * rep(b, a);
    sum += static_cast<double>(dim(xi)) * tr;
  }
  return sum;
}

}  // namespace lieharm
