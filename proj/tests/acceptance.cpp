// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lieharm/lieharm.hpp"
#include "random_expr.hpp"

using namespace lieharm;

namespace {

using cd = std::complex<double>;

const char* kEx1 = "group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n";
const char* kEx2 = "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n";
const char* kEx3 = "group S3^1\nP1 = 1*d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n";
const char* kLiou = "group T^2\nP1 = dx1 + liouville(10)*dx2\n";

// Collects the sub-checks of one criterion.
struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  std::ostringstream info;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return max_abs(a - b) / std::max(1e-300, std::max(max_abs(a), max_abs(b)));
}

// Largest diagonal modulus over the operators, straight from the symbol matrices.
std::vector<double> slot_moduli(const SystemDef& nsys, const Frequency& xi) {
  std::vector<double> m(static_cast<std::size_t>(dim(xi)), 0.0);
  for (const auto& op : nsys.ops) {
    const auto s = symbol(op.expr, nsys.group, xi).entries;
    for (Eigen::Index k = 0; k < s.rows(); ++k) m[static_cast<std::size_t>(k)] = std::max(m[static_cast<std::size_t>(k)], std::abs(s(k, k)));
  }
  return m;
}

Eigen::MatrixXcd dense_min_norm(const std::vector<Eigen::MatrixXcd>& s, const std::vector<Eigen::MatrixXcd>& f) {
  const Eigen::Index d = s.front().cols();
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXcd S(m * d, d), F(m * d, d);
  for (Eigen::Index j = 0; j < m; ++j) {
    S.middleRows(j * d, d) = s[static_cast<std::size_t>(j)];
    F.middleRows(j * d, d) = f[static_cast<std::size_t>(j)];
  }
  return S.completeOrthogonalDecomposition().solve(F);
}

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Quat q{N(rng), N(rng), N(rng), N(rng)};
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (auto& x : q) x /= n;
  return q;
}

OperatorExpr gauss(std::mt19937_64& rng, bool nonzero_imag = false) {
  std::uniform_int_distribution<std::int64_t> v(-6, 6), d(1, 5);
  std::int64_t im = v(rng);
  while (nonzero_imag && im == 0) im = v(rng);
  return OperatorExpr::make_scalar(GaussRational(Rational(v(rng), d(rng)), Rational(im, d(rng))));
}

// ---------------------------------------------------------------- criteria

Check c1_ladder() {
  Check c;
  double worst = 0;
  std::set<GenKind> gens;
  for (const auto& r : conformance_table(6)) {
    worst = std::max(worst, r.residual);
    gens.insert(r.gen);
  }
  c.expect(worst <= 1e-6, "max residual " + num(worst) + " > 1e-6");
  c.expect(gens.size() == 6, "conformance table covers " + std::to_string(gens.size()) + " generators");
  c.info << "max residual " << num(worst) << " over l <= 3";
  return c;
}

Check c2_ex3() {
  Check c;
  const auto sys = parse_system(kEx3);
  for (const auto& op : sys.ops) c.expect(op.expr.is_exact(), "coefficients not exact");
  const auto z = zset_scan(sys, 30);
  c.expect(z.exact, "zset not decided exactly");
  c.expect(z.hits.size() == 1 && z.hits[0] == Hit{Frequency{{}, {0}}, 0},
           "zset has " + std::to_string(z.hits.size()) + " hits, want {(l=0, n=0)}");
  c.expect(z.structural.kind == ZKind::FiniteCertified, std::string("structural ") + to_string(z.structural.kind));

  const auto dc = dc_scan(sys, 30);
  c.expect(dc.global_min >= 0.25, "scanned floor " + num(dc.global_min) + " < 1/4");
  // second route: symbol matrices directly
  const auto nsys = normalize(sys);
  double floor = std::numeric_limits<double>::infinity();
  for (const auto& xi : enumerate_frequencies(sys.group, 30)) {
    if (xi.sphere2[0] == 0) continue;
    for (double m : slot_moduli(nsys, xi)) floor = std::min(floor, m);
  }
  c.expect(floor >= 0.25, "symbol floor over l >= 1/2 is " + num(floor));

  const auto v = classify(sys, 30);
  c.expect(v.gh == Truth::Holds, std::string("gh=") + to_string(v.gh));
  c.expect(v.gs == Truth::Holds, std::string("gs=") + to_string(v.gs));
  c.info << "zset {(0,0)}, floor " << num(dc.global_min) << " (symbols " << num(floor) << "), gh=" << to_string(v.gh)
         << " gs=" << to_string(v.gs);
  return c;
}

Check c3_ex1() {
  Check c;
  const double cap = 30;
  const auto sys = parse_system(kEx1);
  const auto z = zset_scan(sys, cap);
  c.expect(z.structural.kind == ZKind::InfiniteCertified, std::string("structural ") + to_string(z.structural.kind));
  std::vector<Hit> want;
  for (const auto& xi : enumerate_frequencies(sys.group, cap))
    if (xi.torus[0] == 0 && xi.sphere2[0] % 2 == 0) want.push_back(Hit{xi, xi.sphere2[0] / 2});
  std::set<std::pair<std::int64_t, std::int64_t>> got, exp;
  for (const auto& h : z.hits) got.insert({h.freq.sphere2[0], h.slot});
  for (const auto& h : want) exp.insert({h.freq.sphere2[0], h.slot});
  bool torus_zero = true;
  for (const auto& h : z.hits) torus_zero = torus_zero && h.freq.torus[0] == 0;
  c.expect(torus_zero && got == exp && z.hits.size() == want.size(),
           std::to_string(z.hits.size()) + " hits, want (0, l) at n = 0 for the " + std::to_string(want.size()) +
               " integer l within the cap");

  const auto v = classify(sys, cap);
  c.expect(v.gh == Truth::Fails, std::string("gh=") + to_string(v.gh));
  c.expect(v.gs == Truth::Holds || v.gs == Truth::ConsistentUpToCap, std::string("gs=") + to_string(v.gs));
  const auto cert = dc_certificate(sys);
  c.expect(cert && cert->kind == "quadratic-irrational", "no quadratic-irrational certificate");
  if (cert) {
    c.expect(cert->M <= 1, "certificate exponent " + num(cert->M));
    // the bound must hold on every scanned non-Z slot
    const auto nsys = normalize(sys);
    for (const auto& xi : enumerate_frequencies(sys.group, cap))
      for (double m : slot_moduli(nsys, xi))
        if (m > 0) c.expect(m >= cert->C * std::pow(weight(xi), -cert->M) * (1 - 1e-12), "certificate violated");
  }
  c.info << z.hits.size() << " hits (0, l), gh=" << to_string(v.gh) << " gs=" << to_string(v.gs);
  if (cert) c.info << ", certificate C=" << num(cert->C) << " M=" << num(cert->M);
  return c;
}

Check c4_ex2() {
  Check c;
  const auto sys = parse_system(kEx2);
  const auto z = zset_scan(sys, 30);
  c.expect(z.hits.empty(), std::to_string(z.hits.size()) + " zset hits");
  c.expect(z.structural.kind == ZKind::EmptyCertified, std::string("structural ") + to_string(z.structural.kind));
  const auto dc = dc_scan(sys, 30);
  c.expect(dc.global_min >= 1.0 / 6 - 1e-12, "scanned floor " + num(dc.global_min));
  const auto nsys = normalize(sys);
  double floor = std::numeric_limits<double>::infinity();
  for (const auto& xi : enumerate_frequencies(sys.group, 30))
    for (double m : slot_moduli(nsys, xi)) floor = std::min(floor, m);
  c.expect(floor >= 1.0 / 6 - 1e-12, "symbol floor " + num(floor));
  const auto v = classify(sys, 30);
  c.expect(v.gh == Truth::Holds, std::string("gh=") + to_string(v.gh));
  c.info << "zset empty, floor " << num(dc.global_min) << " (symbols " << num(floor) << "), gh=" << to_string(v.gh);
  return c;
}

Check c5_liouville() {
  Check c;
  const auto sys = parse_system(kLiou);
  const auto ws = dc_witness_search(sys, 1e7, WitnessStrategy::ContinuedFraction);
  c.expect(ws.has_value() && !ws->entries.empty(), "no witness sequence");
  if (!ws || ws->entries.empty()) return c;
  // exponents increase along the sequence; the last one must reach 3
  double emax = 0;
  for (const auto& e : ws->entries) emax = std::max(emax, e.exponent);
  c.expect(emax >= 3, "largest witness exponent " + num(emax) + " < 3 within denominators <= 1e7");

  const auto sm = counterexample_smooth_rhs(sys, *ws);
  for (const auto& fj : sm.f) {
    const auto d = decay_fit(fj, max_weight(fj));
    c.expect(d.classification == DecayClass::SmoothConsistent && d.fitted_order >= 2,
             std::string("smooth-rhs decay ") + to_string(d.classification) + " N_hat=" + num(d.fitted_order) +
                 " on " + std::to_string(d.shells_used) + " shells");
  }
  const auto us = solve_diagonal(sys, sm.f).u;
  for (std::size_t n = 0; n < sm.freqs.size(); ++n) {
    c.expect(sm.forced[n] == 1.0, "smooth-rhs forced value " + num(sm.forced[n]));
    c.expect(std::abs(std::abs(us.at(sm.freqs[n])(0, 0)) - 1.0) <= 1e-6, "solved coefficient differs from 1");
  }
  const auto un = counterexample_unsolvable(sys, *ws);
  const auto uu = solve_diagonal(sys, un.f).u;
  for (std::size_t n = 0; n < un.freqs.size(); ++n) {
    const double want = std::pow(weight(un.freqs[n]), static_cast<double>(n + 1));
    c.expect(std::abs(un.forced[n] - want) <= 1e-12 * want, "unsolvable forced value " + num(un.forced[n]));
    c.expect(std::abs(std::abs(uu.at(un.freqs[n])(0, 0)) - want) <= 1e-6 * want, "solved coefficient differs");
  }
  c.info << "depth " << ws->depth << ", exponents";
  for (const auto& e : ws->entries) c.info << " " << num(e.exponent);
  return c;
}

SystemDef random_diagonal_system(std::mt19937_64& rng) {
  static const std::vector<GroupSpec> groups = {GroupSpec(1, 0), GroupSpec(2, 0), GroupSpec(0, 1),
                                                GroupSpec(1, 1), GroupSpec(2, 1), GroupSpec(0, 2)};
  const GroupSpec g = groups[std::uniform_int_distribution<std::size_t>(0, groups.size() - 1)(rng)];
  std::vector<OperatorExpr> atoms;
  for (int i = 1; i <= g.torus_rank; ++i) atoms.push_back(OperatorExpr::make_gen(GenKind::Dx, i));
  for (int k = 1; k <= g.sphere_count; ++k) {
    atoms.push_back(OperatorExpr::make_gen(GenKind::D0, k));
    atoms.push_back(OperatorExpr::make_pow(OperatorExpr::make_gen(GenKind::D0, k), 2));
    atoms.push_back(OperatorExpr::make_prod({OperatorExpr::make_gen(GenKind::Dplus, k), OperatorExpr::make_gen(GenKind::Dminus, k)}));
    atoms.push_back(OperatorExpr::make_prod({OperatorExpr::make_gen(GenKind::Dminus, k), OperatorExpr::make_gen(GenKind::Dplus, k)}));
  }
  SystemDef sys;
  sys.group = g;
  const int m = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int j = 0; j < m; ++j) {
    std::vector<OperatorExpr> terms;
    if (std::bernoulli_distribution(0.7)(rng)) terms.push_back(gauss(rng));
    for (const auto& a : atoms)
      if (std::bernoulli_distribution(0.5)(rng)) terms.push_back(OperatorExpr::make_prod({gauss(rng), a}));
    if (terms.empty()) terms.push_back(OperatorExpr::make_prod({gauss(rng), atoms.front()}));
    sys.ops.push_back(NamedOp{"P" + std::to_string(j + 1), OperatorExpr::make_sum(std::move(terms))});
  }
  return sys;
}

// Lower-triangular set on S3 (optionally with a torus factor): the diagonal
// a + b n (+ c xi) with Im a != 0 never vanishes; raising terms fill the lower part.
SystemDef random_triangular_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  const bool torus = std::bernoulli_distribution(0.5)(rng);
  SystemDef sys;
  sys.group = torus ? GroupSpec(1, 1) : GroupSpec(0, 1);
  auto real = [](double v) {
    return OperatorExpr::make_scalar(GaussRational(Rational(static_cast<std::int64_t>(std::lround(v * 1000)), 1000)));
  };
  auto gen = [](GenKind k) { return OperatorExpr::make_gen(k, 1); };
  const int m = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int j = 0; j < m; ++j) {
    std::vector<OperatorExpr> t;
    t.push_back(OperatorExpr::make_scalar(
        GaussRational(Rational(1), Rational(static_cast<std::int64_t>(std::lround((0.5 + std::abs(U(rng))) * 1000)), 1000))));
    t.push_back(OperatorExpr::make_prod({real(0.3 * U(rng)), gen(GenKind::D0)}));
    t.push_back(OperatorExpr::make_prod({real(0.25 * U(rng)), gen(GenKind::Dplus)}));
    if (std::bernoulli_distribution(0.5)(rng))
      t.push_back(OperatorExpr::make_prod({real(0.05 * U(rng)), OperatorExpr::make_pow(gen(GenKind::Dplus), 2)}));
    if (std::bernoulli_distribution(0.3)(rng))
      t.push_back(OperatorExpr::make_prod({real(0.05 * U(rng)), gen(GenKind::Dplus), gen(GenKind::D0)}));
    if (torus) t.push_back(OperatorExpr::make_prod({real(0.1 * U(rng)), OperatorExpr::make_gen(GenKind::Dx, 1)}));
    sys.ops.push_back(NamedOp{"P" + std::to_string(j + 1), OperatorExpr::make_sum(std::move(t))});
  }
  return sys;
}

Check c6_solvers() {
  Check c;
  std::mt19937_64 rng(2024);
  const auto t0 = std::chrono::steady_clock::now();
  int diag_done = 0, rejected = 0;
  double worst_diag = 0;
  while (diag_done < 100) {
    const SystemDef sys = random_diagonal_system(rng);
    const auto sp = system_polys(sys);
    const auto cert = dc_certificate(sp);
    if (sp.structural != StructureKind::Diagonal || !cert || cert->kind != "constant-floor") {
      ++rejected;
      continue;
    }
    const auto dc = dc_scan(sys, 15);
    if (!(dc.global_min >= cert->C * (1 - 1e-12))) {
      c.expect(false, "constant floor " + num(cert->C) + " violated at cap 15 by " + num(dc.global_min) + " for\n" +
                          format_system(sys));
      ++diag_done;
      continue;
    }
    std::set<std::pair<Frequency, std::int64_t>> zslots;
    for (const auto& h : zset_scan(sys, 15).hits) zslots.insert({h.freq, h.slot});
    const auto u = synth(sys.group, Profile::poly_decay(6), 15, static_cast<std::uint64_t>(diag_done));
    const auto f = apply(sys, u);
    const auto sol = solve_diagonal(sys, f).u;
    for (const auto& [xi, m] : u.data)
      for (Eigen::Index k = 0; k < m.rows(); ++k) {
        if (zslots.count({xi, k})) continue;
        const double r = max_abs(sol.at(xi).row(k) - m.row(k)) / max_abs(m.row(k));
        worst_diag = std::max(worst_diag, r);
      }
    ++diag_done;
  }
  c.expect(worst_diag <= 1e-10, "diagonal round trip " + num(worst_diag));

  const double t_diag = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst_rt = 0, worst_oracle = 0;
  std::int64_t dmax = 0;
  for (int t = 0; t < 100; ++t) {
    const SystemDef sys = random_triangular_system(rng);
    if (system_polys(sys).structural != StructureKind::LowerTriangular) {
      c.expect(false, "generated set is not lower triangular:\n" + format_system(sys));
      continue;
    }
    // cap 8.3 keeps l <= 15/2, so d <= 16
    const auto u = synth(sys.group, Profile::poly_decay(2), 8.3, static_cast<std::uint64_t>(t));
    const auto f = apply(sys, u);
    const auto sol = solve_triangular(sys, f);
    const auto nsys = normalize(sys);
    for (const auto& [xi, m] : u.data) {
      dmax = std::max(dmax, dim(xi));
      std::vector<Eigen::MatrixXcd> s, rhs;
      for (std::size_t j = 0; j < sys.ops.size(); ++j) {
        s.push_back(symbol(nsys.ops[j].expr, sys.group, xi).entries);
        rhs.push_back(f[j].at(xi));
      }
      worst_rt = std::max(worst_rt, rel_diff(sol.u.at(xi), m));
      worst_oracle = std::max(worst_oracle, rel_diff(sol.u.at(xi), dense_min_norm(s, rhs)));
    }
  }
  c.expect(dmax <= 16, "block dimension " + std::to_string(dmax));
  c.expect(worst_oracle <= 1e-8, "triangular vs dense min-norm " + num(worst_oracle));
  c.expect(worst_rt <= 1e-8, "triangular round trip " + num(worst_rt));
  c.info << "diagonal: 100 systems (" << rejected << " draws without a constant floor skipped), max rel err "
         << num(worst_diag) << " (" << num(t_diag) << " s); triangular: 100 sets, d <= " << dmax << ", vs oracle " << num(worst_oracle);
  return c;
}

Check c7_kernel() {
  Check c;
  const auto ex1 = parse_system(kEx1);
  const auto k = counterexample_kernel(ex1, zset_scan(ex1, 20), 10);
  c.expect(k.size() == 10, "kernel field has " + std::to_string(k.size()) + " frequencies");
  for (const auto& fj : apply(ex1, k))
    for (const auto& [xi, m] : fj.data) c.expect(m.isZero(0), "apply(kernel) not exactly zero at " + to_string(xi));
  const auto d = decay_fit(k, max_weight(k));
  c.expect(d.classification == DecayClass::PolynomialGrowth, std::string("kernel decay ") + to_string(d.classification));
  c.expect(std::abs(d.growth_order()) <= 0.5, "growth order " + num(d.growth_order()));

  const auto ex3 = parse_system(kEx3);
  const auto k3 = counterexample_kernel(ex3, zset_scan(ex3, 20), 1);
  for (const auto& fj : apply(ex3, k3))
    for (const auto& [xi, m] : fj.data) c.expect(m.isZero(0), "Ex3 kernel field not annihilated");

  double worst_sum = 0, worst_orth = 0, worst_pw = 0;
  for (const char* src : {kEx1, kEx2, kEx3, "group S3^1\nP1 = dplus_1\n", "group S3^1\nP1 = D1_1\nP2 = D2_1\n",
                          "group T^1xS3^1\nP1 = dx1 + d0_1\nP2 = dplus_1*dminus_1 - 2\n"}) {
    const auto sys = parse_system(src);
    const auto u = synth(sys.group, Profile::poly_decay(1), 8, 17);
    const auto ks = kernel_split(sys, u);
    const auto pw = apply(sys, ks.w);
    for (const auto& [xi, m] : u.data) {
      const auto& v = ks.v.at(xi);
      const auto& w = ks.w.at(xi);
      worst_sum = std::max(worst_sum, max_abs(v + w - m) / max_abs(m));
      for (Eigen::Index col = 0; col < m.cols(); ++col)
        worst_orth = std::max(worst_orth, std::abs(v.col(col).dot(w.col(col))));
      for (const auto& p : pw) worst_pw = std::max(worst_pw, max_abs(p.at(xi)));
    }
  }
  c.expect(worst_sum <= 1e-14, "v + w - u " + num(worst_sum));
  c.expect(worst_orth <= 1e-12, "orthogonality " + num(worst_orth));
  c.expect(worst_pw <= 1e-10, "apply(w) " + num(worst_pw));
  c.info << "kernel growth " << num(d.growth_order()) << "; split |v+w-u| " << num(worst_sum) << ", <v,w> "
         << num(worst_orth) << ", |Pw| " << num(worst_pw);
  return c;
}

Check c8_plumbing() {
  Check c;
  std::mt19937_64 rng(99);
  static const std::vector<GroupSpec> groups = {GroupSpec(1, 0), GroupSpec(0, 1), GroupSpec(2, 1), GroupSpec(1, 2),
                                                GroupSpec(3, 0)};
  std::uniform_real_distribution<double> U(-1, 1), E(-300, 300);
  int ser_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const GroupSpec g = groups[static_cast<std::size_t>(t) % groups.size()];
    CoeffField f(g);
    if (t % 2 == 0) {
      f = synth(g, t % 4 == 0 ? Profile::poly_decay(3) : Profile::exp_decay(0.5), 6, static_cast<std::uint64_t>(t));
    } else {
      for (const auto& xi : enumerate_frequencies(g, 4)) {
        if (std::bernoulli_distribution(0.4)(rng)) continue;
        const auto d = dim(xi);
        Eigen::MatrixXcd m(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
          for (Eigen::Index col = 0; col < d; ++col)
            m(r, col) = cd(U(rng) * std::pow(10.0, std::round(E(rng))), U(rng));
        f.set(xi, m);
      }
    }
    std::ostringstream os;
    write_field(f, os);
    std::istringstream is(os.str());
    const auto back = read_field(is);
    if (!(back == f)) ++ser_bad;
  }
  c.expect(ser_bad == 0, std::to_string(ser_bad) + " serialization round trips differ");

  int ast_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const GroupSpec g(1 + t % 2, 1 + t % 3);
    const OperatorExpr e = testing::random_expr(rng, g, 3);
    try {
      if (!(parse_expr(format_expr(e), g) == e)) ++ast_bad;
    } catch (const Error&) {
      ++ast_bad;
    }
  }
  c.expect(ast_bad == 0, std::to_string(ast_bad) + " AST round trips differ");

  c.info << "1000 fields, 1000 ASTs; decay orders";
  for (double N : {2.0, 4.0, 6.0, 8.0}) {
    const auto est = decay_fit(synth(GroupSpec(1, 1), Profile::poly_decay(N), 20, 7), 20);
    c.expect(std::abs(est.fitted_order - N) <= 0.5, "order " + num(N) + " fitted as " + num(est.fitted_order));
    c.info << " " << num(est.fitted_order);
  }
  return c;
}

Check c9_pointwise() {
  Check c;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1, 1), ang(0, 2 * M_PI);
  const GroupSpec g(1, 1);
  CoeffField u(g);
  for (std::int64_t n = -3; n <= 3; ++n)
    for (std::int64_t l2 = 0; l2 <= 4; ++l2) {
      const Frequency xi{{n}, {l2}};
      const auto d = dim(xi);
      Eigen::MatrixXcd m(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index col = 0; col < d; ++col) m(r, col) = cd(U(rng), U(rng));
      u.set(xi, m);
    }
  const double h = 1e-4, big = 1e9;
  const auto d0 = apply(parse_system("group T^1xS3^1\nP1 = d0_1"), u)[0];
  const auto dx = apply(parse_system("group T^1xS3^1\nP1 = dx1"), u)[0];
  double worst0 = 0, worstx = 0;
  for (int i = 0; i < 20; ++i) {
    const double a = ang(rng);
    const Quat q = random_quat(rng);
    // d0 = i D3, with D3 the derivative along g exp(t Y3)
    const cd fwd = pointwise_eval(u, GroupPoint{{a}, {quat_mul(q, quat_exp(3, h))}}, big);
    const cd bwd = pointwise_eval(u, GroupPoint{{a}, {quat_mul(q, quat_exp(3, -h))}}, big);
    worst0 = std::max(worst0, std::abs(pointwise_eval(d0, GroupPoint{{a}, {q}}, big) - cd(0, 1) * (fwd - bwd) / (2 * h)));
    const cd xf = pointwise_eval(u, GroupPoint{{a + h}, {q}}, big);
    const cd xb = pointwise_eval(u, GroupPoint{{a - h}, {q}}, big);
    worstx = std::max(worstx, std::abs(pointwise_eval(dx, GroupPoint{{a}, {q}}, big) - (xf - xb) / (2 * h)));
  }
  c.expect(worst0 <= 1e-4, "d0 deviation " + num(worst0));
  c.expect(worstx <= 1e-4, "dx1 deviation " + num(worstx));
  c.info << "max deviation d0 " << num(worst0) << ", dx1 " << num(worstx);
  return c;
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Check()> run;
  };
  const std::vector<Item> items = {
      {1, "ladder symbols vs finite differences", 10, c1_ladder},
      {2, "Ex3 finite zero set and floor", 5, c2_ex3},
      {3, "Ex1 infinite zero set", 5, c3_ex1},
      {4, "Ex2 empty zero set", 5, c4_ex2},
      {5, "Liouville failure", 30, c5_liouville},
      {6, "solver round trips", 60, c6_solvers},
      {7, "kernel constructions", 1e9, c7_kernel},
      {8, "Fourier plumbing", 1e9, c8_plumbing},
      {9, "pointwise cross-check", 1e9, c9_pointwise},
  };
  int failed = 0;
  for (const auto& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = it.run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= it.budget) c.expect(false, "runtime " + num(secs) + " s exceeds " + num(it.budget) + " s");
    if (!c.ok) ++failed;
    std::printf("%s criterion %d (%s) [%.2f s]: %s\n", c.ok ? "PASS" : "FAIL", it.id, it.name, secs, c.info.str().c_str());
    for (const auto& f : c.failures) std::printf("    - %s\n", f.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
