#pragma once

// Unitary dual of G = T^r x (S^3)^s: frequencies, weights, index sets.
// Half-integers (l, n) are stored doubled so all bookkeeping stays integral.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <regex>
#include <string>
#include <tuple>
#include <vector>

#include "lieharm/common.hpp"

namespace lieharm {

struct GroupSpec {
  int torus_rank = 0;
  int sphere_count = 0;

  GroupSpec() = default;
  GroupSpec(int r, int s) : torus_rank(r), sphere_count(s) {
    if (r < 0 || s < 0 || r + s < 1) throw DimensionError("group needs r, s >= 0 and r + s >= 1");
  }
  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

  std::string str() const {
    if (sphere_count == 0) return "T^" + std::to_string(torus_rank);
    if (torus_rank == 0) return "S3^" + std::to_string(sphere_count);
    return "T^" + std::to_string(torus_rank) + "xS3^" + std::to_string(sphere_count);
  }

  // Accepts `T^r`, `S3^s`, `T^r x S3^s` (whitespace around x optional).
  static GroupSpec parse(const std::string& text) {
    static const std::regex re(
        R"(^\s*(?:T\^(\d+)\s*(?:x\s*S3\^(\d+))?|S3\^(\d+))\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw InputError("malformed group spec '" + text + "'");
    int r = 0, s = 0;
    if (m[1].matched) r = std::stoi(m[1]);
    if (m[2].matched) s = std::stoi(m[2]);
    if (m[3].matched) s = std::stoi(m[3]);
    return GroupSpec(r, s);
  }
};

struct Frequency {
  std::vector<std::int64_t> torus;    // xi in Z^r
  std::vector<std::int64_t> sphere2;  // 2*l_k

  friend bool operator==(const Frequency&, const Frequency&) = default;
  friend bool operator<(const Frequency& a, const Frequency& b) {
    return std::tie(a.torus, a.sphere2) < std::tie(b.torus, b.sphere2);
  }
};

struct MultiIndex {
  std::vector<std::int64_t> sphere2n;  // 2*n_k
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

inline void validate(const GroupSpec& g, const Frequency& xi) {
  if (static_cast<int>(xi.torus.size()) != g.torus_rank ||
      static_cast<int>(xi.sphere2.size()) != g.sphere_count)
    throw DimensionError("frequency does not match group " + g.str());
  for (auto v : xi.sphere2)
    if (v < 0) throw DimensionError("negative sphere index");
}

inline std::int64_t dim(const Frequency& xi) {
  std::int64_t d = 1;
  for (auto t : xi.sphere2) d *= t + 1;
  return d;
}

inline std::int64_t dim(const GroupSpec& g, const Frequency& xi) {
  validate(g, xi);
  return dim(xi);
}

inline double torus_weight(const std::vector<std::int64_t>& t) {
  double s = 1.0;
  for (auto v : t) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

inline double sphere_weight(std::int64_t two_ell) {
  const double l = 0.5 * static_cast<double>(two_ell);
  return std::sqrt(1.0 + l * (l + 1.0));
}

// The torus block contributes only when r >= 1.
inline double weight(const Frequency& xi) {
  double w = xi.torus.empty() ? 0.0 : torus_weight(xi.torus);
  for (auto t : xi.sphere2) w += sphere_weight(t);
  return w;
}

inline double weight(const GroupSpec& g, const Frequency& xi) {
  validate(g, xi);
  return weight(xi);
}

// Total order used for every enumeration: (weight, torus, sphere2).
struct WeightOrder {
  bool operator()(const Frequency& a, const Frequency& b) const {
    const double wa = weight(a), wb = weight(b);
    if (wa != wb) return wa < wb;
    return a < b;
  }
};

namespace detail {
inline void enum_torus(int r, double budget, std::vector<std::int64_t>& cur, double sq,
                       std::vector<std::vector<std::int64_t>>& out) {
  if (static_cast<int>(cur.size()) == r) {
    out.push_back(cur);
    return;
  }
  // 1 + sq + v^2 <= budget^2
  const double room = budget * budget - 1.0 - sq;
  if (room < 0) return;
  const auto lim = static_cast<std::int64_t>(std::floor(std::sqrt(room))) + 1;
  for (std::int64_t v = -lim; v <= lim; ++v) {
    const double nsq = sq + static_cast<double>(v) * static_cast<double>(v);
    if (1.0 + nsq > budget * budget) continue;
    cur.push_back(v);
    enum_torus(r, budget, cur, nsq, out);
    cur.pop_back();
  }
}
}  // namespace detail

inline std::vector<Frequency> enumerate_frequencies(const GroupSpec& g, double cap) {
  if (!(cap >= 1.0)) throw DimensionError("cap must be >= 1");
  std::vector<Frequency> out;
  std::vector<std::int64_t> sph;
  // Recurse over sphere factors, then fill the torus block with the remaining budget.
  auto rec = [&](auto&& self, double used) -> void {
    if (static_cast<int>(sph.size()) == g.sphere_count) {
      if (g.torus_rank == 0) {
        if (used <= cap) out.push_back({{}, sph});
        return;
      }
      std::vector<std::vector<std::int64_t>> tor;
      std::vector<std::int64_t> cur;
      detail::enum_torus(g.torus_rank, cap - used + 1e-9, cur, 0.0, tor);
      for (auto& t : tor) {
        Frequency f{t, sph};
        if (weight(f) <= cap) out.push_back(std::move(f));
      }
      return;
    }
    for (std::int64_t t = 0;; ++t) {
      const double w = sphere_weight(t);
      if (used + w > cap) break;
      sph.push_back(t);
      self(self, used + w);
      sph.pop_back();
    }
  };
  rec(rec, 0.0);
  std::sort(out.begin(), out.end(), WeightOrder{});
  return out;
}

// Cartesian product of J_{l_k} in ascending lexicographic order.
inline std::vector<MultiIndex> index_set(const Frequency& xi) {
  std::vector<MultiIndex> out{MultiIndex{}};
  for (auto t : xi.sphere2) {
    std::vector<MultiIndex> next;
    next.reserve(out.size() * static_cast<std::size_t>(t + 1));
    for (const auto& a : out)
      for (std::int64_t n2 = -t; n2 <= t; n2 += 2) {
        MultiIndex b = a;
        b.sphere2n.push_back(n2);
        next.push_back(std::move(b));
      }
    out = std::move(next);
  }
  return out;
}

// Flat position of a multi-index (first factor most significant).
inline std::int64_t flat_index(const Frequency& xi, const MultiIndex& a) {
  std::int64_t k = 0;
  for (std::size_t f = 0; f < xi.sphere2.size(); ++f)
    k = k * (xi.sphere2[f] + 1) + (a.sphere2n[f] + xi.sphere2[f]) / 2;
  return k;
}

inline MultiIndex multi_index(const Frequency& xi, std::int64_t flat) {
  MultiIndex a;
  a.sphere2n.resize(xi.sphere2.size());
  for (std::size_t f = xi.sphere2.size(); f-- > 0;) {
    const std::int64_t d = xi.sphere2[f] + 1;
    a.sphere2n[f] = 2 * (flat % d) - xi.sphere2[f];
    flat /= d;
  }
  return a;
}

// Half-integer text: "3", "-1/2".
inline std::string half_str(std::int64_t twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

// "(xi1,...;l1,...)", l printed as half-integers.
inline std::string to_string(const Frequency& xi) {
  std::string out = "(";
  for (std::size_t j = 0; j < xi.torus.size(); ++j) out += (j ? "," : "") + std::to_string(xi.torus[j]);
  if (!xi.sphere2.empty()) {
    if (!xi.torus.empty()) out += ";";
    for (std::size_t k = 0; k < xi.sphere2.size(); ++k) out += (k ? "," : "") + half_str(xi.sphere2[k]);
  }
  return out + ")";
}

}  // namespace lieharm
