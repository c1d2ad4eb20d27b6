#pragma once

#include <random>
#include <vector>

#include "lieharm/opalg.hpp"

namespace lieharm::testing {

OperatorExpr random_expr(std::mt19937_64& rng, const GroupSpec& g, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 1);
  switch (pick(rng)) {
    case 0: {
      std::uniform_int_distribution<int> s(0, 5);
      std::uniform_int_distribution<std::int64_t> v(-9, 9), d(1, 7);
      switch (s(rng)) {
        case 0:
          return OperatorExpr::make_scalar(Scalar::sqrt_of(std::vector<std::int64_t>{2, 3, 5, 6, 7}[static_cast<std::size_t>(d(rng) % 5)]));
        case 1:
          return OperatorExpr::make_scalar(Scalar::pi());
        case 2:
          return OperatorExpr::make_scalar(Scalar::liouville(d(rng) + 1));
        default:
          return OperatorExpr::make_scalar(Scalar::exact(GaussRational(Rational(v(rng), d(rng)), Rational(v(rng), d(rng)))));
      }
    }
    case 1: {
      std::vector<GenKind> kinds;
      if (g.torus_rank > 0) kinds.push_back(GenKind::Dx);
      if (g.sphere_count > 0)
        for (GenKind k : {GenKind::D0, GenKind::Dplus, GenKind::Dminus, GenKind::D1, GenKind::D2, GenKind::D3})
          kinds.push_back(k);
      const GenKind k = kinds[std::uniform_int_distribution<std::size_t>(0, kinds.size() - 1)(rng)];
      const int lim = k == GenKind::Dx ? g.torus_rank : g.sphere_count;
      return OperatorExpr::make_gen(k, std::uniform_int_distribution<int>(1, lim)(rng));
    }
    case 2:
    case 3: {
      std::vector<OperatorExpr> c;
      const int n = std::uniform_int_distribution<int>(2, 3)(rng);
      for (int i = 0; i < n; ++i) c.push_back(random_expr(rng, g, depth - 1));
      return OperatorExpr::make_sum(std::move(c));
    }
    case 4: {
      std::vector<OperatorExpr> c;
      const int n = std::uniform_int_distribution<int>(2, 3)(rng);
      for (int i = 0; i < n; ++i) c.push_back(random_expr(rng, g, depth - 1));
      return OperatorExpr::make_prod(std::move(c));
    }
    default:
      return OperatorExpr::make_pow(random_expr(rng, g, depth - 1), std::uniform_int_distribution<int>(0, 3)(rng));
  }
}

}  // namespace lieharm::testing
