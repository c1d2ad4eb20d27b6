#pragma once

// Command-line front end. run() is the whole program; tools/lieharm.cpp
// only forwards argv.
//
// Exit codes: 0 success, 1 an --expect clause is unmet, 2 input error.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lieharm/parser.hpp"
#include "lieharm/report.hpp"

namespace lieharm::cli {

struct RunConfig {
  std::string system_path;
  double cap = 20;
  bool exact = false;
  bool json = false;
  double tol = tol::kResidual;
  std::uint64_t seed = 0;
  std::vector<std::string> out;
  std::vector<std::string> rhs;
  std::string in;
  std::string expect;
  std::string group;
  std::string profile = "poly_decay:6";
  std::string strategy;
  std::string mode = "distributional";
  std::int64_t ell_max = 3;
  double step = 1e-5;
  int count = 10;
  int n_min = 3;
  double witness_cap = 1e7;
  std::int64_t bd = 0;
};

using Facts = std::map<std::string, std::string>;

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline SystemDef load_system(const RunConfig& cfg, bool require_exact) {
  if (cfg.system_path.empty()) throw InputError("--system is required");
  std::ifstream is(cfg.system_path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + cfg.system_path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  SystemDef sys;
  try {
    sys = parse_system(ss.str());
  } catch (const ParseError& e) {
    throw InputError(cfg.system_path + ":" + e.what());
  }
  if (require_exact)
    for (const auto& op : sys.ops)
      if (!op.expr.is_exact())
        throw InputError("--exact: operator " + op.name + " has coefficients without an exact representation");
  return sys;
}

inline Profile parse_profile(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("profile must look like poly_decay:6");
  const std::string kind = text.substr(0, colon);
  double p = 0;
  try {
    p = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad profile parameter in '" + text + "'");
  }
  if (kind == "poly_decay") return Profile::poly_decay(p);
  if (kind == "poly_growth") return Profile::poly_growth(p);
  if (kind == "exp_decay") return Profile::exp_decay(p);
  throw InputError("unknown profile '" + kind + "'");
}

inline std::vector<CoeffField> read_all(const std::vector<std::string>& paths) {
  std::vector<CoeffField> out;
  for (const auto& p : paths) out.push_back(read_field(p));
  return out;
}

inline void write_outputs(const std::vector<CoeffField>& fields, const std::vector<std::string>& paths) {
  if (paths.empty()) return;
  if (paths.size() != fields.size())
    throw InputError("expected " + std::to_string(fields.size()) + " --out paths, got " + std::to_string(paths.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) write_field(fields[i], paths[i]);
}

// Witness for the counterexample constructions: continued fractions when
// the system has the two-term shape, shell minima otherwise.
inline std::optional<WitnessSequence> find_witness(const SystemDef& sys, const RunConfig& cfg) {
  std::string why;
  const auto sp = system_polys(sys);
  if (lieharm::detail::two_term_shape(sp, why)) {
    try {
      return dc_witness_search(sys, cfg.witness_cap, WitnessStrategy::ContinuedFraction);
    } catch (const UnsupportedError&) {
    }
  }
  return dc_witness_search(sys, cfg.cap, WitnessStrategy::ShellScan);
}

// "gh=holds,gs=holds" against the facts of the run.
inline int check_expect(const std::string& expect, const Facts& facts, std::ostream& err) {
  if (expect.empty()) return 0;
  int rc = 0;
  std::stringstream ss(expect);
  std::string clause;
  while (std::getline(ss, clause, ',')) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos) throw InputError("--expect clause '" + clause + "' is not key=value");
    const std::string key = lower(clause.substr(0, eq)), want = lower(clause.substr(eq + 1));
    auto it = facts.find(key);
    if (it == facts.end()) throw InputError("--expect key '" + key + "' is not reported by this subcommand");
    if (lower(it->second) != want) {
      err << "expectation unmet: " << key << "=" << it->second << " (expected " << want << ")\n";
      rc = 1;
    }
  }
  return rc;
}

}  // namespace detail

inline int dispatch(const std::string& cmd, const std::string& sub, const RunConfig& cfg, std::ostream& out,
                    std::ostream& err) {
  using report::Json;
  Json j;
  std::string text;
  Facts facts;
  if (cmd == "classify") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    ClassifyOptions opt;
    opt.n_min = cfg.n_min;
    opt.witness_cap = cfg.witness_cap;
    opt.bd_asserted = cfg.bd > 0;
    opt.d_bound = cfg.bd;
    const Verdict v = classify(sys, cfg.cap, opt);
    j = report::verdict(v);
    text = report::verdict_text(v);
    facts = {{"gh", to_string(v.gh)}, {"gs", to_string(v.gs)}, {"structure", to_string(v.structure)}};
    if (v.zset) facts["zset"] = to_string(v.zset->structural.kind);
  } else if (cmd == "zset") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    const ZsetReport z = zset_scan(sys, cfg.cap);
    j = report::zset(z);
    text = report::zset_text(z);
    facts = {{"zset", to_string(z.structural.kind)}, {"hits", std::to_string(z.hits.size())}};
  } else if (cmd == "dcscan") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    const DCReport r = dc_scan(sys, cfg.cap);
    j = report::dc(r);
    text = report::dc_text(r);
    facts = {{"certificate", r.certificate ? r.certificate->kind : "none"}};
  } else if (cmd == "witness") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    std::optional<WitnessSequence> w;
    if (cfg.strategy == "continued_fraction")
      w = dc_witness_search(sys, cfg.cap, WitnessStrategy::ContinuedFraction);
    else if (cfg.strategy == "shell_scan" || cfg.strategy.empty())
      w = dc_witness_search(sys, cfg.cap, WitnessStrategy::ShellScan);
    else
      throw InputError("unknown strategy '" + cfg.strategy + "'");
    j["witness"] = w ? report::witness(*w) : Json(nullptr);
    text = w ? report::witness_text(*w) : "no witness sequence\n";
    facts = {{"found", w ? "yes" : "no"}, {"depth", std::to_string(w ? w->depth : 0)}};
  } else if (cmd == "solve") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    const auto f = detail::read_all(cfg.rhs);
    const auto sp = system_polys(sys);
    CoeffField u;
    if (sp.structural == StructureKind::Diagonal) {
      SolveMode mode = SolveMode::Distributional;
      if (cfg.mode == "smooth")
        mode = SolveMode::Smooth;
      else if (cfg.mode != "distributional")
        throw InputError("unknown mode '" + cfg.mode + "'");
      const DiagonalSolution sol = solve_diagonal(sys, f, mode);
      u = sol.u;
      j["solver"] = "diagonal";
      if (sol.decay) {
        j["decay"] = report::decay(*sol.decay);
        text += report::decay_text(*sol.decay);
        facts["decay"] = to_string(sol.decay->classification);
      }
    } else {
      TriangularDiag diag;
      diag.d_bound = cfg.bd;
      const TriangularSolution sol = solve_triangular(sys, f, diag);
      u = sol.u;
      j["solver"] = "triangular";
      j["chain_ok"] = sol.chain_ok;
      j["max_ratio"] = report::num(sol.max_ratio);
      j["linear_bound_ok"] = sol.linear_ok ? Json(*sol.linear_ok) : Json(nullptr);
      j["notes"] = sol.notes;
      text += "amplification chain " + std::string(sol.chain_ok ? "within" : "EXCEEDS") + " bound (max ratio " +
              report::fmt(sol.max_ratio) + ")\n";
    }
    j["frequencies"] = u.size();
    text = "solved " + std::to_string(u.size()) + " frequencies (" + j["solver"].get<std::string>() + ")\n" + text;
    detail::write_outputs({u}, cfg.out);
  } else if (cmd == "apply") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    if (cfg.in.empty()) throw InputError("--in is required");
    const CoeffField u = read_field(cfg.in);
    const auto f = apply(sys, u);
    detail::write_outputs(f, cfg.out);
    j["frequencies"] = u.size();
    text = "applied " + std::to_string(sys.ops.size()) + " operators to " + std::to_string(u.size()) + " frequencies\n";
    if (!cfg.rhs.empty()) {
      const auto ref = detail::read_all(cfg.rhs);
      if (ref.size() != f.size()) throw InputError("--rhs count does not match the number of operators");
      double worst = 0;
      for (std::size_t k = 0; k < f.size(); ++k)
        for (const auto& [xi, m] : f[k].data) {
          if (!ref[k].has(xi)) throw InputError("--rhs is missing a frequency of the input field");
          const double sc = std::max(max_abs(ref[k].at(xi)), 1e-300);
          worst = std::max(worst, max_abs(m - ref[k].at(xi)) / sc);
        }
      j["max_relative_diff"] = report::num(worst);
      text += "max relative difference to --rhs: " + report::fmt(worst) + "\n";
      facts["match"] = worst <= 1e-10 ? "yes" : "no";
    }
  } else if (cmd == "synth") {
    GroupSpec g;
    if (!cfg.group.empty())
      g = GroupSpec::parse(cfg.group);
    else
      g = detail::load_system(cfg, false).group;
    const CoeffField u = synth(g, detail::parse_profile(cfg.profile), cfg.cap, cfg.seed);
    if (cfg.out.size() > 1) throw InputError("synth writes one field");
    if (cfg.out.empty())
      write_field(u, out);
    else
      write_field(u, cfg.out.front());
    if (cfg.out.empty()) return 0;
    j["frequencies"] = u.size();
    text = "wrote " + std::to_string(u.size()) + " frequencies\n";
  } else if (cmd == "compat") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    const CompatReport c = compat_check(sys, detail::read_all(cfg.rhs), cfg.tol);
    j = report::compat(c);
    text = report::compat_text(c);
    facts = {{"ok", c.ok ? "yes" : "no"}};
  } else if (cmd == "oracle") {
    if (cfg.ell_max < 0) throw InputError("--ell-max must be >= 0");
    const auto rows = conformance_table(2 * cfg.ell_max, cfg.step);
    double worst = 0;
    for (const auto& r : rows) worst = std::max(worst, r.residual);
    j["rows"] = report::conformance(rows);
    j["max_residual"] = report::num(worst);
    text = report::conformance_text(rows) + "max residual " + report::fmt(worst) + "\n";
    facts = {{"pass", worst <= 1e-6 ? "yes" : "no"}};
  } else if (cmd == "counterexample") {
    const SystemDef sys = detail::load_system(cfg, cfg.exact);
    if (sub == "kernel") {
      const ZsetReport z = zset_scan(sys, cfg.cap);
      const CoeffField u = counterexample_kernel(sys, z, cfg.count);
      const DecayEstimate d = decay_fit(u, max_weight(u));
      detail::write_outputs({u}, cfg.out);
      double worst = 0;
      for (const auto& fj : apply(sys, u))
        for (const auto& [xi, m] : fj.data) worst = std::max(worst, max_abs(m));
      j["frequencies"] = u.size();
      j["max_abs_Pu"] = report::num(worst);
      j["decay"] = report::decay(d);
      text = "kernel field on " + std::to_string(u.size()) + " frequencies, max |Pu| = " + report::fmt(worst) + "\n" +
             report::decay_text(d);
      facts = {{"decay", to_string(d.classification)}};
    } else if (sub == "unsolvable" || sub == "smooth-rhs") {
      const auto w = detail::find_witness(sys, cfg);
      if (!w) throw InputError("no witness sequence found; the construction needs one");
      const WitnessRhs r = sub == "unsolvable" ? counterexample_unsolvable(sys, *w) : counterexample_smooth_rhs(sys, *w);
      detail::write_outputs(r.f, cfg.out);
      j["witness"] = report::witness(*w);
      j["forced"] = Json::array();
      for (std::size_t n = 0; n < r.freqs.size(); ++n) {
        Json x = report::freq(r.freqs[n]);
        x["value"] = report::num(r.forced[n]);
        j["forced"].push_back(x);
      }
      j["decay"] = Json::array();
      text = report::witness_text(*w);
      for (std::size_t n = 0; n < r.freqs.size(); ++n)
        text += "  forced u" + to_string(r.freqs[n]) + " = " + report::fmt(r.forced[n]) + "\n";
      for (const auto& fj : r.f) {
        const DecayEstimate d = decay_fit(fj, max_weight(fj));
        j["decay"].push_back(report::decay(d));
        text += report::decay_text(d);
        facts["decay"] = to_string(d.classification);
      }
    } else {
      throw InputError("counterexample needs one of kernel, unsolvable, smooth-rhs");
    }
  } else {
    throw InputError("unknown subcommand '" + cmd + "'");
  }
  if (cfg.json)
    out << j.dump(2) << "\n";
  else
    out << text;
  return detail::check_expect(cfg.expect, facts, err);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global hypoellipticity and solvability checks for invariant systems on T^r x (S^3)^s", "lieharm"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto common = [&](CLI::App* sc, bool system) {
    if (system) sc->add_option("--system", cfg.system_path, "system file");
    sc->add_option("--cap", cfg.cap, "weight cutoff")->check(CLI::Range(1.0, 1e12));
    sc->add_flag("--exact", cfg.exact, "require exact coefficients");
    sc->add_flag("--json", cfg.json, "JSON output");
    sc->add_option("--tol", cfg.tol, "residual tolerance")->check(CLI::PositiveNumber);
    sc->add_option("--seed", cfg.seed, "random seed");
    sc->add_option("--out", cfg.out, "output path (repeatable)");
    sc->add_option("--expect", cfg.expect, "key=value[,key=value] checks; unmet gives exit 1");
  };
  auto* classify_cmd = app.add_subcommand("classify", "GH/GS verdict with evidence");
  common(classify_cmd, true);
  classify_cmd->add_option("--n-min", cfg.n_min, "witness depth for a failure certificate")->check(CLI::PositiveNumber);
  classify_cmd->add_option("--witness-cap", cfg.witness_cap, "continued-fraction denominator bound");
  classify_cmd->add_option("--bd", cfg.bd, "assert (BD) with this dimension bound");
  common(app.add_subcommand("zset", "zero-set scan and structural certificate"), true);
  common(app.add_subcommand("dcscan", "shell minima, fitted (C, M) and exact bounds"), true);
  auto* witness_cmd = app.add_subcommand("witness", "search for a DC violation sequence");
  common(witness_cmd, true);
  witness_cmd->add_option("--strategy", cfg.strategy, "shell_scan | continued_fraction");
  auto* solve_cmd = app.add_subcommand("solve", "solve P u = f");
  common(solve_cmd, true);
  solve_cmd->add_option("--rhs", cfg.rhs, "right-hand side field, one per operator");
  solve_cmd->add_option("--mode", cfg.mode, "distributional | smooth");
  solve_cmd->add_option("--bd", cfg.bd, "dimension bound for the triangular solver");
  auto* apply_cmd = app.add_subcommand("apply", "apply the system to a field");
  common(apply_cmd, true);
  apply_cmd->add_option("--in", cfg.in, "input field");
  apply_cmd->add_option("--rhs", cfg.rhs, "compare against these fields");
  auto* synth_cmd = app.add_subcommand("synth", "synthetic coefficient field");
  common(synth_cmd, true);
  synth_cmd->add_option("--group", cfg.group, "group, e.g. T^1xS3^1");
  synth_cmd->add_option("--profile", cfg.profile, "poly_decay:N | poly_growth:N | exp_decay:R");
  auto* compat_cmd = app.add_subcommand("compat", "check f against the compatibility conditions");
  common(compat_cmd, true);
  compat_cmd->add_option("--rhs", cfg.rhs, "field, one per operator");
  auto* oracle_cmd = app.add_subcommand("oracle", "symbol vs finite-difference conformance table");
  common(oracle_cmd, false);
  oracle_cmd->add_option("--ell-max", cfg.ell_max, "largest l (integer)");
  oracle_cmd->add_option("--step", cfg.step, "difference step");
  auto* ce_cmd = app.add_subcommand("counterexample", "fields from the failure constructions");
  ce_cmd->require_subcommand(1);
  std::string ce_sub;
  for (const char* name : {"kernel", "unsolvable", "smooth-rhs"}) {
    auto* sc = ce_cmd->add_subcommand(name);
    common(sc, true);
    sc->add_option("--count", cfg.count, "number of zero-set frequencies")->check(CLI::PositiveNumber);
    sc->add_option("--witness-cap", cfg.witness_cap, "continued-fraction denominator bound");
    sc->callback([&ce_sub, name] { ce_sub = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, ce_sub, cfg, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace lieharm::cli
