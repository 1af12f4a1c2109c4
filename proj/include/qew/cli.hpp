// cli.hpp
// JSON schemas and command bodies behind the `qew` executable. Commands
// return their report and throw input_error on bad input; the executable
// maps outcomes to exit codes.

#pragma once

#include "qew/networks.hpp"
#include "qew/oracle.hpp"
#include "qew/qmat.hpp"
#include "qew/states.hpp"
#include "qew/witnesses.hpp"
#include "qew/zkp.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>

namespace qew::cli {

using json = nlohmann::json;

/// 12 significant digits, the CSV number format.
inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Parsing helpers

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw input_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw input_error(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::size_t count(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw input_error(std::string("field '") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::vector<double> numbers(const json& v, const char* what) {
  if (!v.is_array()) throw input_error(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw input_error(std::string(what) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw input_error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw input_error(std::string("malformed JSON: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

// ---------------------------------------------------------------------------
// State

inline json to_json(const StateSpec& s) {
  switch (s.kind) {
    case StateKind::Epr: return {{"kind", "epr"}, {"theta", s.theta}};
    case StateKind::Ghz: return {{"kind", "ghz"}, {"n", s.n}, {"theta", s.theta}};
    case StateKind::W: return {{"kind", "w"}, {"a", s.amplitudes}};
    case StateKind::QuditGhz: return {{"kind", "qudit_ghz"}, {"n", s.n}, {"d", s.d}, {"alpha", s.amplitudes}};
  }
  return {};
}

inline StateSpec state_from_json(const json& j) {
  const auto kind = detail::text(j, "kind");
  StateSpec s;
  if (kind == "epr") s = StateSpec::epr(detail::number(j, "theta"));
  else if (kind == "ghz") s = StateSpec::ghz(detail::count(j, "n"), detail::number(j, "theta"));
  else if (kind == "w") s = StateSpec::w(detail::numbers(detail::field(j, "a"), "a"));
  else if (kind == "qudit_ghz")
    s = StateSpec::qudit_ghz(detail::count(j, "n"), detail::count(j, "d"), detail::numbers(detail::field(j, "alpha"), "alpha"));
  else throw input_error("unknown state kind '" + kind + "'");
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Blind channel

inline json to_json(const BlindChannel& ch) {
  json terms = json::array();
  for (const auto& t : ch.terms) terms.push_back({{"p", t.p}, {"site_phases", t.site_phases}});
  return {{"terms", terms}};
}

inline BlindChannel channel_from_json(const json& j) {
  const auto& terms = detail::field(j, "terms");
  if (!terms.is_array()) throw input_error("'terms' must be an array");
  BlindChannel ch;
  for (const auto& t : terms) {
    BlindChannel::Term term;
    term.p = detail::number(t, "p");
    const auto& sp = detail::field(t, "site_phases");
    if (!sp.is_array()) throw input_error("'site_phases' must be an array of arrays");
    for (const auto& site : sp) term.site_phases.push_back(detail::numbers(site, "site phase vector"));
    ch.terms.push_back(std::move(term));
  }
  return ch;
}

// ---------------------------------------------------------------------------
// Network

inline json to_json(const NetworkSpec& spec) {
  json sources = json::array(), gates = json::array();
  for (const auto& s : spec.sources) sources.push_back({{"state", to_json(s.state)}, {"owners", s.owners}});
  for (const auto& g : spec.cp_gates)
    gates.push_back({{"party", g.party}, {"theta", g.theta}, {"qubits", {g.qubits[0], g.qubits[1]}}});
  return {{"parties", spec.parties}, {"sources", sources}, {"cp_gates", gates}};
}

inline NetworkSpec network_from_json(const json& j) {
  NetworkSpec spec;
  const auto& parties = detail::field(j, "parties");
  if (!parties.is_array()) throw input_error("'parties' must be an array");
  for (const auto& p : parties) {
    if (!p.is_string()) throw input_error("party names must be strings");
    spec.parties.push_back(p.get<std::string>());
  }
  const auto& sources = detail::field(j, "sources");
  if (!sources.is_array()) throw input_error("'sources' must be an array");
  for (const auto& s : sources) {
    NetworkSource src{state_from_json(detail::field(s, "state")), {}};
    const auto& owners = detail::field(s, "owners");
    if (!owners.is_array()) throw input_error("'owners' must be an array");
    for (const auto& o : owners) {
      if (!o.is_string()) throw input_error("owners must be party names");
      src.owners.push_back(o.get<std::string>());
    }
    spec.sources.push_back(std::move(src));
  }
  if (j.contains("cp_gates")) {
    const auto& gates = j.at("cp_gates");
    if (!gates.is_array()) throw input_error("'cp_gates' must be an array");
    for (const auto& g : gates) {
      CpGateSpec gate;
      gate.party = detail::text(g, "party");
      gate.theta = detail::number(g, "theta");
      const auto& q = detail::field(g, "qubits");
      if (!q.is_array() || q.size() != 2 || !q[0].is_number_integer() || !q[1].is_number_integer() ||
          q[0].get<long long>() < 0 || q[1].get<long long>() < 0)
        throw input_error("gate 'qubits' must be two qubit indices");
      gate.qubits = {q[0].get<std::size_t>(), q[1].get<std::size_t>()};
      spec.cp_gates.push_back(std::move(gate));
    }
  }
  validate(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Prover strategy

inline json to_json(const ProverStrategy& s) {
  if (const auto* h = std::get_if<HonestProver>(&s)) {
    json j{{"kind", "honest"}, {"state", to_json(h->state)}};
    if (!h->channel.terms.empty()) j["channel"] = to_json(h->channel);
    if (h->noise != 1.0) j["noise"] = h->noise;
    return j;
  }
  if (const auto* d = std::get_if<SeparableDiagProver>(&s)) return {{"kind", "separable_diag"}, {"p0", d->p0}};
  const auto& f = std::get<FixedOutcomesProver>(s);
  return {{"kind", "fixed_outcomes"}, {"answers", {f.answers[0], f.answers[1]}}};
}

inline ProverStrategy strategy_from_json(const json& j) {
  const auto kind = detail::text(j, "kind");
  ProverStrategy s;
  if (kind == "honest") {
    HonestProver h;
    h.state = state_from_json(detail::field(j, "state"));
    if (j.contains("channel")) h.channel = channel_from_json(j.at("channel"));
    if (j.contains("noise")) h.noise = detail::number(j, "noise");
    s = h;
  } else if (kind == "separable_diag") {
    SeparableDiagProver d;
    if (j.contains("p0")) d.p0 = detail::number(j, "p0");
    s = d;
  } else if (kind == "fixed_outcomes") {
    const auto a = detail::numbers(detail::field(j, "answers"), "answers");
    if (a.size() != 2) throw input_error("'answers' needs one outcome per challenge");
    s = FixedOutcomesProver{{static_cast<int>(a[0]), static_cast<int>(a[1])}};
  } else {
    throw input_error("unknown strategy kind '" + kind + "'");
  }
  born_table(s);  // validates parameters
  return s;
}

// ---------------------------------------------------------------------------
// witness

enum class FamilyChoice { Auto, Epr, Ghz, W, Qudit };

inline FamilyChoice family_choice(std::string_view name) {
  if (name == "auto") return FamilyChoice::Auto;
  if (name == "epr") return FamilyChoice::Epr;
  if (name == "ghz") return FamilyChoice::Ghz;
  if (name == "w") return FamilyChoice::W;
  if (name == "qudit") return FamilyChoice::Qudit;
  throw input_error("unknown family '" + std::string(name) + "'");
}

/// Smallest leakage among the families compatible with the site shape. A
/// tie within leakage_tol is ambiguous and needs an explicit family.
inline Family resolve_family(const DensityMatrix& rho, double leakage_tol) {
  std::vector<Family> candidates;
  const auto n = rho.num_sites();
  if (rho.all_qubits()) {
    candidates.push_back(n == 2 ? Family::Epr : Family::Ghz);
    if (n == 3) candidates.push_back(Family::W);
  } else {
    candidates.push_back(Family::Qudit);
  }
  std::vector<double> leak;
  for (auto f : candidates) leak.push_back(subspace_elements(rho, f).leakage);
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (leak[k] < leak[best]) best = k;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (k != best && std::abs(leak[k] - leak[best]) <= leakage_tol)
      throw input_error(std::string("family is ambiguous between ") + family_name(candidates[best]) + " and " +
                        family_name(candidates[k]) + "; pass --family");
  return candidates[best];
}

inline json to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

inline json battery_json(const ParadoxBattery& b, const BatteryReport& r) {
  json items = json::array();
  for (std::size_t k = 0; k < b.items.size(); ++k) {
    const auto& it = b.items[k];
    const auto& ir = r.items[k];
    json j{{"observable", it.obs.to_string()},
           {"contract", contract_name(it.contract)},
           {"value", to_json(ir.value)},
           {"magnitude", ir.magnitude},
           {"pass", ir.pass}};
    if (it.contract == Contract::Exact) j["target"] = it.target;
    if (it.companion) {
      j["companion"] = it.companion->to_string();
      j["companion_value"] = to_json(*ir.companion_value);
    }
    items.push_back(std::move(j));
  }
  return {{"pass", r.pass}, {"failures", r.failures()}, {"items", items}};
}

inline json report_json(const WitnessReport& r) {
  json elements = json::object();
  for (const auto& [k, v] : r.elements.named()) elements[k] = to_json(v);
  json j{{"family", family_name(r.family)},
         {"lhs", r.lhs},
         {"bound", r.bound},
         {"margin", r.margin()},
         {"verdict", verdict_name(r.verdict)},
         {"leakage", r.leakage},
         {"iff_valid", r.iff_valid},
         {"elements", elements}};
  if (r.secondary_bound) j["secondary_bound"] = *r.secondary_bound;
  return j;
}

struct WitnessOptions {
  std::optional<BlindChannel> channel;
  std::optional<double> noise;
  FamilyChoice family = FamilyChoice::Auto;
  Tolerances tol;
  double noise_coefficient = 2.0;
};

inline void check_tolerances(const Tolerances& tol) {
  if (!(tol.eps_eq > 0.0) || !(tol.eps_nz > 0.0) || !(tol.leakage_tol > 0.0))
    throw input_error("tolerances must be positive");
}

inline json cmd_witness(const StateSpec& spec, const WitnessOptions& opt) {
  check_tolerances(opt.tol);
  validate(spec);
  DensityMatrix rho = build_state(spec);
  if (opt.channel) rho = apply_blind_channel(rho, *opt.channel);
  if (opt.noise) rho = werner_mix(rho, *opt.noise);

  Family family{};
  switch (opt.family) {
    case FamilyChoice::Auto: family = resolve_family(rho, opt.tol.leakage_tol); break;
    case FamilyChoice::Epr: family = Family::Epr; break;
    case FamilyChoice::Ghz: family = Family::Ghz; break;
    case FamilyChoice::W: family = Family::W; break;
    case FamilyChoice::Qudit: family = Family::Qudit; break;
  }

  const auto n = rho.num_sites();
  WitnessReport wr;
  ParadoxBattery battery;
  switch (family) {
    case Family::Epr:
      wr = witness_epr(rho, opt.tol);
      battery = battery_epr();
      break;
    case Family::Ghz:
      wr = witness_ghz(rho, opt.tol);
      battery = battery_ghz(n);
      break;
    case Family::W:
      wr = witness_w(rho, opt.tol);
      battery = battery_w();
      break;
    case Family::Qudit: {
      const auto d = rho.dims().front();
      wr = witness_qudit(rho, n, d, opt.tol);
      battery = n == 2 ? battery_qudit_2(d) : battery_qudit_n(n, d);
      break;
    }
  }
  battery.eps_eq = opt.tol.eps_eq;
  battery.eps_nz = opt.tol.eps_nz;

  json out{{"state", to_json(spec)},
           {"boundary", is_boundary(spec)},
           {"witness", report_json(wr)},
           {"battery", battery_json(battery, evaluate_battery(rho, battery))}};
  if (opt.noise) out["noise"] = *opt.noise;
  if (n == 2 && rho.all_qubits()) {
    const auto nw = noise_witness(rho, opt.tol, opt.noise_coefficient);
    out["noise_witness"] = {{"zx", nw.zx}, {"xz", nw.xz}, {"zz", nw.zz}, {"xx", nw.xx},
                            {"coefficient", nw.coefficient}, {"s", nw.s},
                            {"zero_lines_hold", nw.zero_lines_hold}, {"verdict", verdict_name(nw.verdict)}};
  }
  return out;
}

// ---------------------------------------------------------------------------
// scan-visibility

struct ScanRange {
  double start = 0.0, stop = 0.5, step = 0.01;
};

/// "start:stop:step".
inline ScanRange parse_range(const std::string& s) {
  ScanRange r;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> r.start >> c1 >> r.stop >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof())
    throw input_error("range must be start:stop:step");
  return r;
}

inline std::vector<VisibilityKind> parse_kinds(const std::string& s) {
  std::vector<VisibilityKind> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok == "witness") out.push_back(VisibilityKind::Witness);
    else if (tok == "chsh") out.push_back(VisibilityKind::Chsh);
    else if (tok == "svetlichny3") out.push_back(VisibilityKind::Svetlichny3);
    else throw input_error("unknown visibility kind '" + tok + "'");
  }
  if (out.empty()) throw input_error("no visibility kinds given");
  return out;
}

inline std::string cmd_scan_visibility(const ScanRange& r, std::vector<VisibilityKind> kinds) {
  if (!(r.start >= 0.0 && r.stop <= 0.5 && r.start <= r.stop)) throw input_error("range must lie within [0, 1/2]");
  if (!(r.step > 0.0)) throw input_error("step must be positive");
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  static const char* column[] = {"v_witness", "v_chsh", "v_svetlichny3"};
  std::string csv = "offdiag";
  for (auto k : kinds) csv += std::string(",") + column[static_cast<int>(k)];
  csv += '\n';
  for (std::size_t i = 0;; ++i) {
    double x = r.start + static_cast<double>(i) * r.step;
    if (x > r.stop + 1e-12 * std::max(1.0, r.step)) break;
    x = std::min(x, r.stop);
    csv += fmt12(x);
    for (auto k : kinds) csv += "," + fmt12(critical_visibility(x, k));
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// zkp

struct ZkpRun {
  Transcript transcript;
  json report;
};

inline ZkpRun cmd_zkp(const ProverStrategy& strategy, std::size_t N, std::uint64_t seed, double z,
                      unsigned workers = 1) {
  ZkpRun run;
  run.transcript = run_protocol(strategy, N, seed, workers);
  const auto v = verify_transcript(run.transcript, z);
  json cells = json::object();
  const char* names[2][2] = {{"xx", "xz"}, {"zx", "zz"}};
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s) {
      const auto& c = v.stats.cell[k][s];
      cells[names[k][s]] = {{"count", c.count}, {"est", c.est}, {"se", c.se}};
    }
  run.report = {{"strategy", to_json(strategy)},
                {"N", N},
                {"seed", seed},
                {"z", z},
                {"accepted", v.accepted},
                {"lines", {{"zz_exact", v.lines[0]}, {"zx_zero", v.lines[1]}, {"xz_zero", v.lines[2]}, {"xx_significant", v.lines[3]}}},
                {"cells", cells}};
  return run;
}

// ---------------------------------------------------------------------------
// network

inline json cmd_network(const NetworkSpec& spec, const std::optional<BlindChannel>& channel,
                        const Tolerances& tol = {}) {
  check_tolerances(tol);
  const auto warnings = validate(spec);
  const auto rho = channel ? generate_cluster(spec, *channel) : generate_cluster(spec);
  auto batteries = theorem3_battery(spec);
  json sources = json::array();
  bool all = true;
  for (std::size_t k = 0; k < batteries.size(); ++k) {
    batteries[k].eps_eq = tol.eps_eq;
    batteries[k].eps_nz = tol.eps_nz;
    const auto r = evaluate_battery(rho, batteries[k]);
    all = all && r.pass;
    sources.push_back({{"source", k}, {"qubits", spec.source_qubits(k)}, {"battery", battery_json(batteries[k], r)}});
  }
  const auto conn = connectivity_check(spec);
  return {{"qubits", spec.num_qubits()},
          {"warnings", warnings},
          {"sources", sources},
          {"pass", all},
          {"connected", conn.connected},
          {"components", conn.components}};
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOptions {
  std::string witness = "epr";
  std::size_t n = 3;
  std::size_t d = 3;
  std::size_t samples = 1000;
  std::optional<std::size_t> iters;  // maximization starts; defaults to min(samples, 10^4)
  std::size_t terms = 2;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double tol = 1e-9;
};

struct OracleRun {
  json report;
  bool violated = false;
};

inline OracleRun cmd_oracle(const OracleOptions& opt) {
  const auto target = witness_target(opt.witness, opt.n, opt.d);
  if (opt.samples < 1) throw input_error("samples must be >= 1");
  SamplerConfig cfg;
  cfg.dims = target.dims();
  cfg.terms = opt.terms;
  cfg.seed = opt.seed;
  cfg.all_partitions = true;
  const auto set = target.natural_set();

  const auto t0 = std::chrono::steady_clock::now();
  const auto campaign = bound_campaign(target, cfg, opt.samples, set, opt.workers, opt.tol);
  MaximizeOptions mo;
  mo.set = set;
  mo.workers = opt.workers;
  const auto iters = opt.iters.value_or(std::min<std::size_t>(opt.samples, 10000));
  const auto best = maximize_witness(target, cfg, iters, mo);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  OracleRun run;
  const bool max_violates = best.max_value > target.bound() + opt.tol;
  run.violated = campaign.violations > 0 || max_violates;
  run.report = {{"witness", witness_name(target.name)},
                {"n", target.n},
                {"d", target.d},
                {"set", set == SearchSet::Separable ? "separable" : "biseparable"},
                {"bound", target.bound()},
                {"samples", opt.samples},
                {"seed", opt.seed},
                {"max_lhs", campaign.max_lhs},
                {"argmax_sample", campaign.argmax_index},
                {"violations", campaign.violations},
                {"maximize", {{"iters", iters}, {"max_value", best.max_value}, {"start_index", best.start_index}}},
                {"runtime_s", seconds},
                {"pass", !run.violated}};
  return run;
}

}  // namespace qew::cli
