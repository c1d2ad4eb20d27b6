#include <cmath>
#include <random>
#include <set>

#include "catch_amalgamated.hpp"
#include "lieharm/analysis.hpp"
#include "lieharm/parser.hpp"

using namespace lieharm;
using Catch::Approx;

namespace {

const char* kEx1 = "group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n";
const char* kEx2 = "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n";
const char* kEx3 = "group S3^1\nP1 = 1*d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n";
const char* kLiou = "group T^2\nP1 = dx1 + liouville(10)*dx2\n";

using HitKey = std::pair<Frequency, std::int64_t>;

// Second route: slots where every diagonal symbol entry vanishes, read off the symbol tables.
std::set<HitKey, std::less<>> symbol_hits(const SystemDef& sys, double cap, double* min_m = nullptr) {
  std::set<HitKey, std::less<>> out;
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& xi : enumerate_frequencies(sys.group, cap)) {
    const auto t = diagonal_entries(sys, xi);
    for (Eigen::Index k = 0; k < t.values.cols(); ++k) {
      const double m = t.values.col(k).cwiseAbs().maxCoeff();
      if (m < 1e-12)
        out.insert({xi, k});
      else
        mn = std::min(mn, m);
    }
  }
  if (min_m) *min_m = mn;
  return out;
}

std::set<HitKey, std::less<>> as_set(const std::vector<Hit>& hits) {
  std::set<HitKey, std::less<>> out;
  for (const auto& h : hits) out.insert({h.freq, h.slot});
  return out;
}

}  // namespace

TEST_CASE("zero sets of the worked systems", "[analysis]") {
  const auto ex3 = parse_system(kEx3);
  const auto z3 = zset_scan(ex3, 20);
  REQUIRE(z3.hits.size() == 1);
  CHECK(z3.hits[0].freq == Frequency{{}, {0}});
  CHECK(z3.hits[0].slot == 0);
  CHECK(z3.exact);
  CHECK(z3.structural.kind == ZKind::FiniteCertified);
  CHECK(as_set(z3.hits) == symbol_hits(ex3, 20));

  const auto ex1 = parse_system(kEx1);
  const auto z1 = zset_scan(ex1, 20);
  CHECK(z1.structural.kind == ZKind::InfiniteCertified);
  CHECK(as_set(z1.hits) == symbol_hits(ex1, 20));
  for (const auto& h : z1.hits) {
    CHECK(h.freq.torus == std::vector<std::int64_t>{0});
    CHECK(h.freq.sphere2[0] % 2 == 0);
    CHECK(multi_index(h.freq, h.slot).sphere2n == std::vector<std::int64_t>{0});
  }
  std::set<std::int64_t> ells;
  for (const auto& h : z1.hits) ells.insert(h.freq.sphere2[0]);
  for (const auto& xi : enumerate_frequencies(ex1.group, 20))
    if (xi.torus[0] == 0 && xi.sphere2[0] % 2 == 0) CHECK(ells.count(xi.sphere2[0]) == 1);

  const auto ex2 = parse_system(kEx2);
  const auto z2 = zset_scan(ex2, 20);
  CHECK(z2.hits.empty());
  CHECK(z2.structural.kind == ZKind::EmptyCertified);
  CHECK(symbol_hits(ex2, 20).empty());

  const auto t1 = zset_structural(parse_system("group T^1\nP1 = dx1"));
  CHECK(t1.kind == ZKind::FiniteCertified);
  REQUIRE(t1.finite.size() == 1);
  CHECK(t1.finite[0].freq == Frequency{{0}, {}});

  CHECK(zset_structural(parse_system(kLiou)).kind == ZKind::TruncationOnly);
  CHECK_THROWS_AS(zset_scan(parse_system("group S3^1\nP1 = D1_1"), 5), UnsupportedError);
}

TEST_CASE("zero set hits are stable under cap increase", "[analysis]") {
  for (const char* src : {kEx1, kEx3, "group T^1xS3^1\nP1 = dx1 + 2i*d0_1 + 1\n"}) {
    const auto sys = parse_system(src);
    const auto a = as_set(zset_scan(sys, 8).hits), b = as_set(zset_scan(sys, 16).hits);
    for (const auto& h : a) CHECK(b.count(h) == 1);
    for (const auto& h : b)
      if (weight(h.first) <= 8) CHECK(a.count(h) == 1);
  }
}

TEST_CASE("dc scan floors", "[analysis]") {
  const auto ex3 = parse_system(kEx3);
  const auto d3 = dc_scan(ex3, 30);
  double brute = 0;
  symbol_hits(ex3, 30, &brute);
  CHECK(d3.global_min == Approx(brute).epsilon(1e-12));
  CHECK(d3.global_min >= 0.25);
  CHECK(d3.zero_slots == 1);
  CHECK(d3.M_hat <= 1e-9);
  REQUIRE(d3.certificate);
  CHECK(d3.certificate->kind == "constant-floor");
  CHECK(d3.certificate->M == 0);

  const auto ex2 = parse_system(kEx2);
  const auto d2 = dc_scan(ex2, 30);
  symbol_hits(ex2, 30, &brute);
  CHECK(d2.global_min == Approx(brute).epsilon(1e-12));
  CHECK(d2.global_min >= 1.0 / 6 - 1e-12);

  // shells already scanned are unchanged when the cap grows
  const auto small = dc_scan(ex2, 12);
  for (std::size_t i = 0; i + 1 < small.shells.size(); ++i) {
    CHECK(small.shells[i].index == d2.shells[i].index);
    CHECK(small.shells[i].min_m == d2.shells[i].min_m);
  }
}

TEST_CASE("dc certificates hold on every scanned slot", "[analysis]") {
  for (const char* src : {kEx1, kEx2, kEx3, "group T^2\nP1 = 2*dx1 + 1/3*dx2 + 1/5\n",
                          "group T^1xS3^1\nP1 = sqrt(3)*dx1 + i*d0_1 + 1/2i\n"}) {
    const auto sys = parse_system(src);
    const auto cert = dc_certificate(sys);
    INFO(src);
    REQUIRE(cert);
    for (const auto& xi : enumerate_frequencies(sys.group, 25)) {
      const auto t = diagonal_entries(sys, xi);
      for (Eigen::Index k = 0; k < t.values.cols(); ++k) {
        const double m = t.values.col(k).cwiseAbs().maxCoeff();
        if (m > 1e-12) CHECK(m >= cert->C * std::pow(weight(xi), -cert->M) * (1 - 1e-12));
      }
    }
  }
  const auto q = dc_certificate(parse_system(kEx1));
  CHECK(q->kind == "quadratic-irrational");
  CHECK(q->M <= 1);
  CHECK_FALSE(dc_certificate(parse_system(kLiou)));
}

TEST_CASE("witness search", "[analysis]") {
  const auto liou = parse_system(kLiou);
  const auto w = dc_witness_search(liou, 1e7, WitnessStrategy::ContinuedFraction);
  REQUIRE(w);
  CHECK(w->depth >= 2);
  std::set<Frequency> seen;
  for (std::size_t i = 0; i < w->entries.size(); ++i) {
    const auto& e = w->entries[i];
    CHECK(seen.insert(e.freq).second);
    CHECK(e.value > 0);
    CHECK(e.value == Approx(std::pow(e.weight, -e.exponent)).epsilon(1e-9));
    // |u + alpha v| with alpha = 10^-1 + 10^-2 + 10^-6 + ..., evaluated directly
    const double alpha = 0.110001;
    const double direct = std::abs(static_cast<double>(e.freq.torus[0]) + alpha * static_cast<double>(e.freq.torus[1]));
    if (std::abs(e.freq.torus[1]) < 1000) CHECK(e.value == Approx(direct).epsilon(1e-6));
    if (i > 0) {
      CHECK(e.exponent > w->entries[i - 1].exponent);
      CHECK(e.weight > w->entries[i - 1].weight);
    }
  }
  CHECK_THROWS_AS(dc_witness_search(parse_system(kEx3), 100, WitnessStrategy::ContinuedFraction), UnsupportedError);
  CHECK_FALSE(dc_witness_search(parse_system(kEx3), 30, WitnessStrategy::ShellScan));
  const auto root2 = dc_witness_search(parse_system("group T^2\nP1 = dx1 + sqrt(2)*dx2\n"), 1e5,
                                       WitnessStrategy::ContinuedFraction);
  if (root2)
    for (const auto& e : root2->entries) CHECK(e.exponent <= 1.0 + 1e-9);
}

TEST_CASE("classify the worked systems", "[analysis]") {
  const auto v3 = classify(parse_system(kEx3), 30);
  CHECK(v3.gh == Truth::Holds);
  CHECK(v3.gs == Truth::Holds);
  CHECK(v3.structure == StructureKind::Diagonal);

  const auto v1 = classify(parse_system(kEx1), 20);
  CHECK(v1.gh == Truth::Fails);
  CHECK((v1.gs == Truth::Holds || v1.gs == Truth::ConsistentUpToCap));

  const auto v2 = classify(parse_system(kEx2), 30);
  CHECK(v2.gh == Truth::Holds);
  CHECK(v2.gs == Truth::Holds);

  const auto vl = classify(parse_system(kLiou), 1e4);
  CHECK(vl.gh != Truth::Holds);
  CHECK(vl.gs != Truth::Holds);

  const auto vt = classify(parse_system("group S3^1\nP1 = dplus_1 + 1"), 10);
  CHECK(vt.structure == StructureKind::LowerTriangular);
  CHECK(vt.gh != Truth::Fails);
  CHECK(classify(parse_system("group S3^1\nP1 = D1_1"), 5).gh == Truth::Unknown);
}

TEST_CASE("classify agrees with brute force on tori", "[analysis]") {
  // P_j = i(c_j1 xi_1 + c_j2 xi_2) + q_j with small Gaussian-rational data; values lie on a
  // lattice, so the floor is automatic and GH reduces to finiteness of the common zero set.
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> num(-2, 2), den(1, 3), coin(0, 3), ops(1, 2);
  auto rat = [&] {
    const int n = num(rng), d = den(rng);
    return std::pair<int, int>{n, d};
  };
  int finite = 0, infinite = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = ops(rng);
    std::string src = "group T^2\n";
    std::vector<std::array<std::complex<double>, 3>> data;
    for (int j = 0; j < m; ++j) {
      std::array<std::complex<double>, 3> c{};
      std::string line = "P" + std::to_string(j + 1) + " = 0";
      for (int k = 0; k < 3; ++k) {
        const auto [a, b] = rat();
        const auto [e, f] = coin(rng) == 0 ? rat() : std::pair<int, int>{0, 1};
        c[static_cast<std::size_t>(k)] = {static_cast<double>(a) / b, static_cast<double>(e) / f};
        const std::string lit = "(" + std::to_string(a) + "/" + std::to_string(b) + ")+(" + std::to_string(e) + "/" +
                                std::to_string(f) + ")*i";
        line += " + (" + lit + ")" + (k < 2 ? "*dx" + std::to_string(k + 1) : "");
      }
      data.push_back(c);
      src += line + "\n";
    }
    INFO(src);
    const auto sys = parse_system(src);
    std::vector<std::pair<int, int>> hits;
    for (int x = -50; x <= 50; ++x)
      for (int y = -50; y <= 50; ++y) {
        bool zero = true;
        for (const auto& c : data) {
          const std::complex<double> v = std::complex<double>(0, 1) * (c[0] * double(x) + c[1] * double(y)) + c[2];
          zero = zero && std::abs(v) < 1e-9;
        }
        if (zero) hits.push_back({x, y});
      }
    bool outer = false;
    for (const auto& [x, y] : hits) outer = outer || std::max(std::abs(x), std::abs(y)) > 25;
    const auto v = classify(sys, 20);
    CHECK(v.gs == Truth::Holds);
    if (outer) {
      ++infinite;
      CHECK(v.gh == Truth::Fails);
    } else {
      ++finite;
      CHECK(v.gh == Truth::Holds);
    }
    if (v.gh == Truth::Holds) CHECK(v.gs == Truth::Holds);
  }
  CHECK(finite > 0);
  CHECK(infinite > 0);
}
