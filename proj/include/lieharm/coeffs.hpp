#pragma once

// Fourier-coefficient fields: storage, JSONL serialization, synthetic data,
// operator application and shell-based decay fitting.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lieharm/symbols.hpp"

namespace lieharm {

struct CoeffField {
  GroupSpec group;
  std::map<Frequency, Eigen::MatrixXcd, WeightOrder> data;
  std::string meta;

  CoeffField() = default;
  explicit CoeffField(GroupSpec g, std::string m = {}) : group(g), meta(std::move(m)) {}

  void set(const Frequency& xi, Eigen::MatrixXcd m) {
    validate(group, xi);
    const auto d = dim(xi);
    if (m.rows() != d || m.cols() != d)
      throw DimensionError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           " but the frequency has dimension " + std::to_string(d));
    data[xi] = std::move(m);
  }
  bool has(const Frequency& xi) const { return data.count(xi) != 0; }
  const Eigen::MatrixXcd& at(const Frequency& xi) const {
    auto it = data.find(xi);
    if (it == data.end()) throw DimensionError("frequency not present in field");
    return it->second;
  }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const CoeffField& a, const CoeffField& b) {
    if (!(a.group == b.group) || a.data.size() != b.data.size()) return false;
    auto ib = b.data.begin();
    for (const auto& [xi, m] : a.data) {
      if (!(xi == ib->first) || m.rows() != ib->second.rows() || m != ib->second) return false;
      ++ib;
    }
    return true;
  }
};

inline double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_norm(const CoeffField& f, const Frequency& xi) { return max_abs(f.at(xi)); }

// ---------------------------------------------------------------- decay fit

enum class DecayClass { SmoothConsistent, PolynomialGrowth, Inconclusive };

inline const char* to_string(DecayClass c) {
  switch (c) {
    case DecayClass::SmoothConsistent:
      return "SmoothConsistent";
    case DecayClass::PolynomialGrowth:
      return "PolynomialGrowth";
    default:
      return "Inconclusive";
  }
}

struct Shell {
  int index = 0;  // weights in [2^index, 2^(index+1))
  double max_norm = 0;
  double weight = 0;  // weight at the argmax
  std::size_t population = 0;
};

struct DecayEstimate {
  double fitted_order = 0;     // N-hat: shell maxima ~ C * weight^(-N-hat)
  double fitted_constant = 0;  // C-hat
  int shells_used = 0;
  DecayClass classification = DecayClass::Inconclusive;
  int probe_passed = -1;  // largest N <= probe order with bounded maxima * weight^N
  std::vector<Shell> shells;

  // Growth exponent reported with PolynomialGrowth.
  double growth_order() const { return -fitted_order; }
};

struct DecayOptions {
  int probe_order = 8;
  double slack = 4.0;
  double threshold = 1.0;  // minimum N-hat for SmoothConsistent
};

inline std::vector<Shell> shell_maxima(const CoeffField& f, double cap) {
  std::map<int, Shell> shells;
  for (const auto& [xi, m] : f.data) {
    const double w = weight(xi);
    if (w > cap) continue;
    const int t = static_cast<int>(std::floor(std::log2(w)));
    Shell& s = shells[t];
    s.index = t;
    ++s.population;
    const double v = max_abs(m);
    if (v > s.max_norm) {
      s.max_norm = v;
      s.weight = w;
    }
  }
  std::vector<Shell> out;
  for (auto& [t, s] : shells)
    if (s.max_norm > 0) out.push_back(s);
  return out;
}

// Least squares y = a + b x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) return {sy / n, 0.0};
  const double b = (n * sxy - sx * sy) / den;
  return {(sy - b * sx) / n, b};
}

inline DecayEstimate decay_fit(const CoeffField& f, double cap, const DecayOptions& opt = {}) {
  DecayEstimate est;
  est.shells = shell_maxima(f, cap);
  est.shells_used = static_cast<int>(est.shells.size());
  if (est.shells.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& s : est.shells) {
      x.push_back(std::log(s.weight));
      y.push_back(std::log(s.max_norm));
    }
    const auto [a, b] = linear_fit(x, y);
    est.fitted_order = -b;
    est.fitted_constant = std::exp(a);
  }
  if (est.shells.size() < 3) return est;

  const std::size_t T = est.shells.size();
  const std::size_t head = T / 2;
  for (int N = 0; N <= opt.probe_order; ++N) {
    double first = 0, last = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const double a = std::log(est.shells[t].max_norm) + N * std::log(est.shells[t].weight);
      if (t < head)
        first = t == 0 ? a : std::max(first, a);
      else
        last = t == head ? a : std::max(last, a);
    }
    if (last > first + std::log(opt.slack)) break;
    est.probe_passed = N;
  }
  est.classification =
      est.probe_passed >= 1 && est.fitted_order >= opt.threshold ? DecayClass::SmoothConsistent
                                                                 : DecayClass::PolynomialGrowth;
  return est;
}

// ---------------------------------------------------------------- synthesis

struct Profile {
  enum class Kind { ExpDecay, PolyDecay, PolyGrowth } kind = Kind::PolyDecay;
  double param = 0;

  static Profile exp_decay(double rate) { return {Kind::ExpDecay, rate}; }
  static Profile poly_decay(double n) { return {Kind::PolyDecay, n}; }
  static Profile poly_growth(double n) { return {Kind::PolyGrowth, n}; }

  double operator()(double w) const {
    switch (kind) {
      case Kind::ExpDecay:
        return std::exp(-param * w);
      case Kind::PolyDecay:
        return std::pow(w, -param);
      default:
        return std::pow(w, param);
    }
  }
  std::string str() const {
    std::ostringstream os;
    os << (kind == Kind::ExpDecay ? "exp_decay(" : kind == Kind::PolyDecay ? "poly_decay(" : "poly_growth(")
       << param << ")";
    return os.str();
  }
};

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline CoeffField synth(const GroupSpec& g, const Profile& profile, double cap, std::uint64_t seed) {
  CoeffField f(g, "synth " + profile.str() + " seed=" + std::to_string(seed));
  std::mt19937_64 rng(seed);
  const double two_pi = 2.0 * M_PI;
  for (const auto& xi : enumerate_frequencies(g, cap)) {
    const auto d = dim(xi);
    const double scale = profile(weight(xi));
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) {
        const double mag = (0.5 + 0.5 * unit_uniform(rng)) * scale;
        const double ph = two_pi * unit_uniform(rng);
        m(r, c) = std::polar(mag, ph);
      }
    f.data.emplace(xi, std::move(m));
  }
  return f;
}

// ---------------------------------------------------------------- apply

inline Eigen::MatrixXcd mul(const SparseSymbol& s, const Eigen::MatrixXcd& u) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(u.rows(), u.cols());
  for (std::int64_t c = 0; c < s.dim(); ++c)
    for (const auto& e : s.col(c)) out.row(e.row) += e.value * u.row(c);
  return out;
}

inline std::vector<CoeffField> apply(const SystemDef& sys, const CoeffField& u) {
  if (!(sys.group == u.group)) throw DimensionError("field group " + u.group.str() + " does not match system group " + sys.group.str());
  const SystemDef nsys = normalize(sys);
  std::vector<CoeffField> out;
  for (const auto& op : nsys.ops) out.emplace_back(u.group, "apply " + op.name + " to [" + u.meta + "]");
  std::vector<std::pair<Frequency, const Eigen::MatrixXcd*>> items;
  for (const auto& [xi, m] : u.data) items.emplace_back(xi, &m);
  std::vector<std::vector<Eigen::MatrixXcd>> res(nsys.ops.size(), std::vector<Eigen::MatrixXcd>(items.size()));
  parallel_for(items.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nsys.ops.size(); ++j)
      res[j][i] = mul(symbol_sparse(nsys.ops[j].expr, items[i].first), *items[i].second);
  });
  for (std::size_t j = 0; j < nsys.ops.size(); ++j)
    for (std::size_t i = 0; i < items.size(); ++i) out[j].data.emplace(items[i].first, std::move(res[j][i]));
  return out;
}

// ---------------------------------------------------------------- file format

inline void write_field(const CoeffField& f, std::ostream& os, const char* kind = "coeff") {
  using oj = nlohmann::ordered_json;
  oj head;
  head["kind"] = kind;
  head["version"] = 1;
  head["group"] = {{"r", f.group.torus_rank}, {"s", f.group.sphere_count}};
  if (!f.meta.empty()) head["meta"] = f.meta;
  os << head.dump() << '\n';
  for (const auto& [xi, m] : f.data) {
    oj rec;
    rec["t"] = xi.torus;
    rec["s2"] = xi.sphere2;
    oj rows = oj::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      oj row = oj::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const cd z = m(r, c);
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
          throw InputError("cannot serialize non-finite coefficient");
        row.push_back({z.real(), z.imag()});
      }
      rows.push_back(std::move(row));
    }
    rec["m"] = std::move(rows);
    os << rec.dump() << '\n';
  }
}

inline void write_field(const CoeffField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  write_field(f, os);
}

inline CoeffField read_field(std::istream& is, const std::string& label = "<stream>") {
  using nlohmann::json;
  auto err = [&](int line, const std::string& msg) {
    return InputError(label + ":" + std::to_string(line) + ": " + msg);
  };
  std::string text;
  int line = 0;
  CoeffField f;
  bool have_head = false;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw err(line, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_head) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "coeff" && kind != "symbol") throw err(line, "unknown kind '" + kind + "'");
        if (j.at("version").get<int>() != 1) throw err(line, "unsupported version " + j.at("version").dump());
        f.group = GroupSpec(j.at("group").at("r").get<int>(), j.at("group").at("s").get<int>());
        if (j.contains("meta")) f.meta = j.at("meta").get<std::string>();
        have_head = true;
        continue;
      }
      Frequency xi{j.at("t").get<std::vector<std::int64_t>>(), j.at("s2").get<std::vector<std::int64_t>>()};
      try {
        validate(f.group, xi);
      } catch (const DimensionError& e) {
        throw err(line, e.what());
      }
      const auto& rows = j.at("m");
      const auto d = dim(xi);
      if (!rows.is_array() || static_cast<std::int64_t>(rows.size()) != d)
        throw err(line, "dimension mismatch: expected " + std::to_string(d) + " rows");
      Eigen::MatrixXcd m(d, d);
      for (std::int64_t r = 0; r < d; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<std::int64_t>(row.size()) != d)
          throw err(line, "dimension mismatch: expected " + std::to_string(d) + " columns");
        for (std::int64_t c = 0; c < d; ++c) {
          const auto& z = row[static_cast<std::size_t>(c)];
          if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
            throw err(line, "entry must be [re, im]");
          m(r, c) = {z[0].get<double>(), z[1].get<double>()};
        }
      }
      if (f.data.count(xi)) throw err(line, "duplicate frequency");
      f.data.emplace(std::move(xi), std::move(m));
    } catch (const json::exception& e) {
      throw err(line, std::string("malformed record: ") + e.what());
    } catch (const DimensionError& e) {
      throw err(line, e.what());
    }
  }
  if (!have_head) throw err(line, "missing header");
  return f;
}

inline CoeffField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  return read_field(is, path);
}

}  // namespace lieharm
