#pragma once

// JSON and text renderings of analysis and solver results.

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lieharm/oracle.hpp"
#include "lieharm/solve.hpp"

namespace lieharm::report {

using Json = nlohmann::ordered_json;

inline Json num(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

inline Json freq(const Frequency& xi) {
  Json j;
  j["t"] = xi.torus;
  j["s2"] = xi.sphere2;
  return j;
}

inline Json hit(const Hit& h) {
  Json j = freq(h.freq);
  j["slot"] = h.slot;
  j["n2"] = multi_index(h.freq, h.slot).sphere2n;
  return j;
}

inline Json zset(const ZsetReport& z) {
  Json j;
  j["cap"] = z.cap;
  j["exact"] = z.exact;
  j["hits"] = Json::array();
  for (const auto& h : z.hits) j["hits"].push_back(hit(h));
  Json s;
  s["kind"] = to_string(z.structural.kind);
  if (!z.structural.rule.empty()) s["rule"] = z.structural.rule;
  if (z.structural.kind == ZKind::FiniteCertified) {
    s["points"] = Json::array();
    for (const auto& h : z.structural.finite) s["points"].push_back(hit(h));
  }
  if (z.structural.generator) s["generator"] = hit(*z.structural.generator);
  j["structural"] = s;
  return j;
}

inline Json witness(const WitnessSequence& w) {
  Json j;
  j["strategy"] = w.strategy;
  j["depth"] = w.depth;
  j["entries"] = Json::array();
  for (const auto& e : w.entries) {
    Json x = freq(e.freq);
    x["slot"] = e.slot;
    x["value"] = num(e.value);
    x["weight"] = num(e.weight);
    x["exponent"] = num(e.exponent);
    j["entries"].push_back(x);
  }
  return j;
}

inline Json dc(const DCReport& r) {
  Json j;
  j["cap"] = r.cap;
  j["exact"] = r.exact;
  j["fast_path"] = r.fast_path;
  j["C_hat"] = num(r.C_hat);
  j["M_hat"] = num(r.M_hat);
  j["global_min"] = num(r.global_min);
  if (r.global_argmin) j["global_argmin"] = hit(*r.global_argmin);
  j["zero_slots"] = r.zero_slots;
  j["shells"] = Json::array();
  for (const auto& s : r.shells) {
    Json x;
    x["shell"] = s.index;
    x["min"] = num(s.min_m);
    x["weight"] = num(s.weight);
    x["argmin"] = hit({s.freq, s.slot});
    x["population"] = s.population;
    j["shells"].push_back(x);
  }
  if (r.certificate) {
    Json c;
    c["kind"] = r.certificate->kind;
    c["C"] = num(r.certificate->C);
    c["M"] = num(r.certificate->M);
    c["detail"] = r.certificate->detail;
    j["certificate"] = c;
  } else {
    j["certificate"] = nullptr;
  }
  j["witness"] = r.witness ? witness(*r.witness) : Json(nullptr);
  return j;
}

inline Json verdict(const Verdict& v) {
  Json j;
  j["gh"] = to_string(v.gh);
  j["gs"] = to_string(v.gs);
  j["structure"] = to_string(v.structure);
  j["reversed_basis"] = v.reversed_basis;
  j["certificates"] = v.certificates;
  j["notes"] = v.notes;
  if (v.zset) j["zset"] = zset(*v.zset);
  if (v.dc) j["dc"] = dc(*v.dc);
  return j;
}

inline Json decay(const DecayEstimate& d) {
  Json j;
  j["classification"] = to_string(d.classification);
  j["fitted_order"] = num(d.fitted_order);
  j["fitted_constant"] = num(d.fitted_constant);
  j["probe_passed"] = d.probe_passed;
  j["shells_used"] = d.shells_used;
  j["shells"] = Json::array();
  for (const auto& s : d.shells) {
    Json x;
    x["shell"] = s.index;
    x["max_norm"] = num(s.max_norm);
    x["weight"] = num(s.weight);
    x["population"] = s.population;
    j["shells"].push_back(x);
  }
  return j;
}

inline Json compat(const CompatReport& c) {
  Json j;
  j["ok"] = c.ok;
  j["violations"] = Json::array();
  for (const auto& v : c.violations) {
    Json x = freq(v.freq);
    x["relation"] = v.relation;
    x["magnitude"] = num(v.magnitude);
    j["violations"].push_back(x);
  }
  return j;
}

inline Json conformance(const std::vector<ConformanceRow>& rows) {
  Json j = Json::array();
  for (const auto& r : rows) {
    Json x;
    x["generator"] = Generator{r.gen, 1}.str();
    x["two_ell"] = r.two_ell;
    x["residual"] = num(r.residual);
    j.push_back(x);
  }
  return j;
}

// ---------------------------------------------------------------- text

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

inline std::string hit_text(const Hit& h) {
  std::string out = to_string(h.freq) + " n=(";
  const auto a = multi_index(h.freq, h.slot);
  for (std::size_t k = 0; k < a.sphere2n.size(); ++k) out += (k ? "," : "") + half_str(a.sphere2n[k]);
  return out + ")";
}

inline std::string zset_text(const ZsetReport& z) {
  std::ostringstream os;
  os << "zero set (cap " << z.cap << ", " << (z.exact ? "exact" : "tolerance") << "): " << z.hits.size()
     << " hits\n";
  const std::size_t shown = std::min<std::size_t>(z.hits.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << "  " << hit_text(z.hits[i]) << "\n";
  if (shown < z.hits.size()) os << "  ... " << z.hits.size() - shown << " more\n";
  os << "structural: " << to_string(z.structural.kind);
  if (!z.structural.rule.empty()) os << " (" << z.structural.rule << ")";
  os << "\n";
  if (z.structural.generator) os << "  generator " << hit_text(*z.structural.generator) << "\n";
  for (const auto& h : z.structural.finite) os << "  point " << hit_text(h) << "\n";
  return os.str();
}

inline std::string witness_text(const WitnessSequence& w) {
  std::ostringstream os;
  os << "witness sequence (" << w.strategy << "), depth " << w.depth << "\n";
  for (const auto& e : w.entries)
    os << "  " << to_string(e.freq) << " slot " << e.slot << "  m=" << fmt(e.value) << "  weight=" << fmt(e.weight)
       << "  exponent=" << fmt(e.exponent) << "\n";
  return os.str();
}

inline std::string dc_text(const DCReport& r) {
  std::ostringstream os;
  os << "DC scan (cap " << r.cap << (r.fast_path ? ", nearest-root path" : "") << ")\n";
  os << "  shell  weight        min m        argmin\n";
  for (const auto& s : r.shells)
    os << "  " << std::setw(5) << s.index << "  " << std::setw(12) << fmt(s.weight) << "  " << std::setw(11)
       << fmt(s.min_m) << "  " << hit_text({s.freq, s.slot}) << "\n";
  os << "  fit: C_hat=" << fmt(r.C_hat) << " M_hat=" << fmt(r.M_hat) << "  global min " << fmt(r.global_min) << "\n";
  if (r.certificate)
    os << "  certificate: " << r.certificate->kind << " m >= " << fmt(r.certificate->C) << " * weight^-"
       << fmt(r.certificate->M) << "\n";
  else
    os << "  certificate: none\n";
  if (r.witness) os << witness_text(*r.witness);
  return os.str();
}

inline std::string verdict_text(const Verdict& v) {
  std::ostringstream os;
  os << "structure: " << to_string(v.structure) << (v.reversed_basis ? " (reversed basis)" : "") << "\n";
  os << "gh: " << to_string(v.gh) << "\n";
  os << "gs: " << to_string(v.gs) << "\n";
  for (const auto& c : v.certificates) os << "  certificate: " << c << "\n";
  for (const auto& n : v.notes) os << "  note: " << n << "\n";
  if (v.zset) os << zset_text(*v.zset);
  if (v.dc) os << dc_text(*v.dc);
  return os.str();
}

inline std::string decay_text(const DecayEstimate& d) {
  std::ostringstream os;
  os << "decay: " << to_string(d.classification) << "  N_hat=" << fmt(d.fitted_order)
     << "  C_hat=" << fmt(d.fitted_constant) << "  probe=" << d.probe_passed << "  shells=" << d.shells_used << "\n";
  return os.str();
}

inline std::string compat_text(const CompatReport& c) {
  std::ostringstream os;
  os << "compatible: " << (c.ok ? "yes" : "no") << "\n";
  for (const auto& v : c.violations)
    os << "  " << v.relation << " at " << to_string(v.freq) << "  magnitude " << fmt(v.magnitude) << "\n";
  return os.str();
}

inline std::string conformance_text(const std::vector<ConformanceRow>& rows) {
  std::ostringstream os;
  os << "generator  l     residual\n";
  for (const auto& r : rows)
    os << std::left << std::setw(10) << Generator{r.gen, 1}.str() << " " << std::setw(5) << half_str(r.two_ell)
       << " " << fmt(r.residual) << "\n";
  return os.str();
}

}  // namespace lieharm::report
