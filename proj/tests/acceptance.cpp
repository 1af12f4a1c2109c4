// Prints one line per acceptance criterion and exits nonzero if any fails.

#include "qew/cli.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace qew;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool same_bits(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

unsigned workers() { return std::max(2u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

void separable_epr_bound() {
  const auto t0 = Clock::now();
  SamplerConfig cfg;
  cfg.dims = {2, 2};
  cfg.terms = 4;
  cfg.seed = 101;
  const auto r = bound_campaign(witness_target("epr"), cfg, 100000, SearchSet::Separable, workers(), 1e-9);
  const double dt = seconds_since(t0);
  report(1, r.samples == 100000 && r.violations == 0 && r.max_lhs <= 1e-9 && dt < 60.0,
         fmt("separable two-qubit bound: max lhs %.3e over 1e5 samples, %.2f s", r.max_lhs, dt));
}

void iff_on_epr_family() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0), ph(-M_PI, M_PI);
  std::size_t kept = 0, agree = 0, attempts = 0;
  while (kept < 10000 && attempts < 1000000) {
    ++attempts;
    const double theta = u(rng) * M_PI / 2;
    BlindChannel ch;
    const std::size_t terms = 1 + rng() % 4;
    double total = 0.0;
    for (std::size_t k = 0; k < terms; ++k) {
      const double p = u(rng) + 1e-3;
      total += p;
      ch.terms.push_back({p, {{ph(rng), ph(rng)}, {ph(rng), ph(rng)}}});
    }
    for (auto& t : ch.terms) t.p /= total;
    const auto rho = apply_blind_channel(build_state(StateSpec::epr(theta)), ch);
    if (std::abs(rho(0, 3)) < 0.05) continue;
    ++kept;
    const bool witnessed = witness_epr(rho).verdict == Verdict::Entangled;
    agree += witnessed == ppt_check(rho).npt;
  }
  report(2, kept == 10000 && agree == kept,
         fmt("witness verdict agrees with PPT on %.0f of %.0f blind-channel images", double(agree), double(kept)));
}

void visibility_golden_values() {
  const double w = critical_visibility(0.5, VisibilityKind::Witness);
  const double c = critical_visibility(0.5, VisibilityKind::Chsh);
  const auto csv =
      cli::cmd_scan_visibility(cli::parse_range("0:0.5:0.001"), {VisibilityKind::Witness, VisibilityKind::Chsh,
                                                                  VisibilityKind::Svetlichny3});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> prev;
  bool monotone = true;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!prev.empty())
      for (std::size_t k = 1; k < row.size(); ++k) monotone = monotone && row[k] <= prev[k];
    prev = row;
    ++rows;
  }
  const bool ok = std::abs(w - 1.0 / 3.0) <= 1e-12 && std::abs(c - 1.0 / std::sqrt(2.0)) <= 1e-12 && monotone &&
                  rows == 501;
  report(3, ok, fmt("critical visibility at 0.5: witness %.15f, chsh %.15f; scan monotone=%.0f", w, c, monotone));
}

void werner_threshold() {
  const auto epr = build_state(StateSpec::epr(M_PI / 4));
  auto npt = [&](double v) { return ppt_check(werner_mix(epr, v)).npt; };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-13) (npt(0.5 * (lo + hi)) ? hi : lo) = 0.5 * (lo + hi);
  const double edge = 0.5 * (lo + hi);
  const double formula = critical_visibility(0.5, VisibilityKind::Witness);
  report(4, std::abs(edge - 1.0 / 3.0) <= 1e-9 && std::abs(edge - formula) <= 1e-9,
         fmt("Werner PPT transition at %.12f, witness threshold %.12f", edge, formula));
}

void ghz_biseparable_bound() {
  std::size_t total = 0, violations = 0;
  double worst = -1.0;
  for (std::size_t n : {3u, 4u}) {
    std::vector<std::vector<std::size_t>> cuts;
    for (std::size_t a = 0; a < n; ++a) cuts.push_back({a});
    if (n == 4)
      for (std::size_t b = 1; b < n; ++b) cuts.push_back({0, b});
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      SamplerConfig cfg;
      cfg.dims = SiteDims(n, 2);
      cfg.terms = 3;
      cfg.seed = 500 + 10 * n + c;
      cfg.partition = cuts[c];
      const auto r = bound_campaign(witness_target("ghz", n), cfg, 10000, SearchSet::Biseparable, workers(), 1e-9);
      total += r.samples;
      violations += r.violations;
      worst = std::max(worst, r.max_lhs);
    }
  }
  bool witnessed = true;
  std::size_t checked = 0;
  for (std::size_t n = 3; n <= 6; ++n)
    for (int k = 0; k <= 400; ++k) {
      const double theta = k * (M_PI / 2) / 400;
      if (std::sin(2 * theta) < 0.1) continue;
      ++checked;
      witnessed = witnessed && witness_ghz(build_state(StateSpec::ghz(n, theta))).verdict == Verdict::Entangled;
    }
  report(5, violations == 0 && worst <= 1e-9 && witnessed,
         fmt("GHZ biseparable bound: max lhs %.3e over %.0f samples; %.0f coherent GHZ states witnessed", worst,
             double(total), double(checked)));
}

void svetlichny_golden_value() {
  const auto angles = optimal_svetlichny_angles();
  const auto ghz = build_state(StateSpec::ghz(3, M_PI / 4));
  const double s = svetlichny_value(ghz, angles);
  bool linear = true;
  for (int k = 0; k <= 20; ++k) {
    const double v = k / 20.0;
    linear = linear && std::abs(svetlichny_value(werner_mix(ghz, v), angles) - v * s) <= 1e-9;
  }
  const double vis = critical_visibility(0.5, VisibilityKind::Svetlichny3);
  report(6, std::abs(s - 4 * std::sqrt(2.0)) <= 1e-9 && linear && std::abs(vis - 1 / std::sqrt(2.0)) <= 1e-12,
         fmt("Svetlichny value %.12f, linear in visibility=%.0f, critical visibility %.12f", s, linear, vis));
}

void w_type() {
  const double a = 1.0 / std::sqrt(3.0);
  const double lhs = witness_w(build_state(StateSpec::w({a, a, a, 0.0}))).lhs;
  SamplerConfig cfg;
  cfg.dims = {2, 2, 2};
  cfg.terms = 3;
  cfg.seed = 707;
  cfg.all_partitions = true;
  const auto target = witness_target("w");
  const auto r = bound_campaign(target, cfg, 10000, SearchSet::Biseparable, workers(), 1e-9);
  cfg.terms = 1;
  const auto m = maximize_witness(target, cfg, 2000, {SearchSet::Biseparable, workers()});
  report(7, std::abs(lhs - 2.0 / 3.0) <= 1e-12 && r.violations == 0 && r.max_lhs <= 0.5 + 1e-9 &&
                m.max_value >= 0.5 - 1e-3,
         fmt("W lhs %.15f; biseparable max %.9f; maximizer reached %.9f", lhs, r.max_lhs, m.max_value));
}

void qudit() {
  bool ok = true;
  std::string detail;
  for (std::size_t d : {3u, 4u}) {
    SamplerConfig cfg;
    cfg.dims = {d, d};
    cfg.terms = 3;
    cfg.seed = 800 + d;
    const auto r = bound_campaign(witness_target("qudit", 2, d), cfg, 10000, SearchSet::Separable, workers(), 1e-9);
    const double lhs =
        witness_qudit(build_state(StateSpec::qudit_ghz(2, d, std::vector<double>(d, 1.0 / std::sqrt(double(d))))), 2, d)
            .lhs;
    const auto shift = local_operator(Op::Shift, d);
    ComplexMatrix power = ComplexMatrix::Identity(d, d);
    for (std::size_t k = 0; k < d; ++k) power = shift * power;
    const bool identity = same_bits(power, ComplexMatrix::Identity(d, d)) &&
                          same_bits(local_operator(Op::Shift, d, int(d)), ComplexMatrix::Identity(d, d));
    ok = ok && r.violations == 0 && r.max_lhs <= 1e-9 && std::abs(lhs - double(d - 1)) <= 1e-12 && identity;
    detail += fmt("d=%.0f: separable max %.3e, maximal lhs %.12f; ", double(d), r.max_lhs, lhs);
  }
  report(8, ok, detail + "shift^d == I exactly");
}

void networks() {
  const auto epr = build_state(StateSpec::epr(M_PI / 4));
  double swap_err = 0.0;
  const auto branches = entanglement_swap(epr, epr);
  for (const auto& b : branches) swap_err = std::max(swap_err, (b.state.matrix() - epr.matrix()).cwiseAbs().maxCoeff());
  const bool swap_ok = branches.size() == 4 && swap_err <= 1e-10;

  double reduce_err = 0.0;
  for (std::size_t n : {3u, 4u, 5u})
    for (double theta : {0.2, 0.6, M_PI / 4, 1.1}) {
      const auto ghz = build_state(StateSpec::ghz(n, theta));
      const double c = std::abs(ghz(0, ghz.matrix().rows() - 1));
      for (const auto& r : reduce_ghz_to_epr(ghz, {0, n - 1}))
        reduce_err = std::max(reduce_err, std::abs(std::abs(r.state(0, 3)) - c));
    }

  NetworkSpec s;
  s.parties = {"A", "B", "C", "D"};
  s.sources = {{StateSpec::epr(0.5), {"A", "B"}},
               {StateSpec::ghz(3, 0.9), {"B", "C", "D"}},
               {StateSpec::epr(1.2), {"D", "A"}}};
  s.cp_gates = {{"B", M_PI / 2, {1, 2}}, {"D", 1.0, {4, 5}}};
  BlindChannel ch = BlindChannel::identity(SiteDims(s.num_qubits(), 2));
  ch.terms[0].p = 0.6;
  auto other = ch.terms[0];
  other.p = 0.4;
  for (auto& ph : other.site_phases) ph = {0.0, 0.08};
  ch.terms.push_back(other);
  const auto rho = generate_cluster(s, ch);
  const auto batteries = theorem3_battery(s);
  bool passes = true;
  for (const auto& b : batteries) passes = passes && evaluate_battery(rho, b).pass;
  bool dephased_fails = true;
  for (std::size_t k = 0; k < s.sources.size(); ++k) {
    BlindChannel twirl = BlindChannel::identity(rho.dims());
    auto flipped = twirl.terms[0];
    flipped.site_phases[s.source_qubits(k)[0]] = {0.0, M_PI};
    twirl.terms[0].p = 0.5;
    flipped.p = 0.5;
    twirl.terms.push_back(flipped);
    dephased_fails = dephased_fails && !evaluate_battery(apply_blind_channel(rho, twirl), batteries[k]).pass;
  }
  report(9, swap_ok && reduce_err <= 1e-10 && passes && dephased_fails,
         fmt("swap error %.3e, GHZ reduction coherence error %.3e; network battery pass=%.0f", swap_err, reduce_err,
             passes) +
             (dephased_fails ? ", each dephased source fails" : ", a dephased source still passes"));
}

void classical_contradiction() {
  bool ok = true;
  std::string detail;
  for (auto [name, battery] : {std::pair{"epr", battery_epr()}, std::pair{"ghz3", battery_ghz(3)}}) {
    const auto full = classical_assignment_search(battery, 0.25, 1e-6, workers());
    auto reduced = battery;
    std::erase_if(reduced.items, [](const BatteryItem& it) { return it.contract == Contract::NonZero; });
    const auto relaxed = classical_assignment_search(reduced, 0.25, 1e-6, workers());
    ok = ok && full.empty() && !relaxed.empty() && reduced.items.size() + 1 == battery.items.size();
    detail += std::string(name) + fmt(": %.0f assignments, %.0f without the nonzero line; ", double(full.size()),
                                      double(relaxed.size()));
  }
  detail.resize(detail.size() - 2);
  report(10, ok, detail);
}

void zkp_statistics() {
  const auto t0 = Clock::now();
  int honest = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    honest += verify_transcript(run_protocol(HonestProver{}, 10000, 11000 + seed, workers()), 5.0).accepted;
    rejected += !verify_transcript(run_protocol(SeparableDiagProver{0.5}, 10000, 12000 + seed, workers()), 5.0).accepted;
  }
  const double dt = seconds_since(t0);
  report(11, honest >= 99 && rejected >= 99 && dt < 120.0,
         fmt("honest accepted %.0f/100, separable rejected %.0f/100, %.2f s", honest, rejected, dt));
}

void determinism() {
  bool ok = true;
  std::vector<std::string> broken;
  auto check = [&](bool same, const char* what) {
    if (!same) broken.push_back(what);
    ok = ok && same;
  };

  SamplerConfig cfg;
  cfg.dims = {2, 2, 2};
  cfg.terms = 5;
  cfg.seed = 1234;
  cfg.all_partitions = true;
  bool samplers = true;
  for (std::size_t i = 0; i < 200; ++i) {
    samplers = samplers && same_bits(sample_separable(cfg, i).matrix(), sample_separable(cfg, i).matrix()) &&
               same_bits(sample_biseparable(cfg, i).matrix(), sample_biseparable(cfg, i).matrix());
  }
  check(samplers, "samplers");

  const auto target = witness_target("ghz", 3);
  const auto c1 = bound_campaign(target, cfg, 3000, SearchSet::Biseparable, 1);
  bool campaigns = true;
  for (unsigned w : {1u, 3u, 8u}) {
    const auto c = bound_campaign(target, cfg, 3000, SearchSet::Biseparable, w);
    campaigns = campaigns && c.max_lhs == c1.max_lhs && c.argmax_index == c1.argmax_index &&
                c.violations == c1.violations;
  }
  check(campaigns, "bound campaigns");

  SamplerConfig mcfg;
  mcfg.dims = {2, 2, 2};
  mcfg.seed = 99;
  mcfg.all_partitions = true;
  const auto wt = witness_target("w");
  const auto m1 = maximize_witness(wt, mcfg, 300, {SearchSet::Biseparable, 1});
  bool maximize = true;
  for (unsigned w : {1u, 4u}) {
    const auto m = maximize_witness(wt, mcfg, 300, {SearchSet::Biseparable, w});
    maximize = maximize && m.max_value == m1.max_value && m.start_index == m1.start_index &&
               m.evaluations == m1.evaluations && same_bits(m.argmax.matrix(), m1.argmax.matrix());
  }
  check(maximize, "maximizer");

  bool protocol = true;
  for (const ProverStrategy& s : {ProverStrategy{HonestProver{StateSpec::epr(0.6), {}, 0.9}},
                                  ProverStrategy{SeparableDiagProver{0.3}}, ProverStrategy{FixedOutcomesProver{{1, -1}}}}) {
    const auto t1 = run_protocol(s, 20000, 4321, 1);
    for (unsigned w : {1u, 2u, 7u}) protocol = protocol && run_protocol(s, 20000, 4321, w) == t1;
  }
  check(protocol, "protocol transcripts");

  auto b = battery_ghz(3);
  b.items.pop_back();
  const auto a1 = classical_assignment_search(b, 0.5, 1e-6, 1);
  check(classical_assignment_search(b, 0.5, 1e-6, 6) == a1 && classical_assignment_search(b, 0.5, 1e-6, 1) == a1,
        "classical search");

  cli::OracleOptions o;
  o.witness = "epr";
  o.samples = 2000;
  o.iters = 100;
  o.seed = 5;
  o.workers = 1;
  auto without_timing = [](nlohmann::json j) {
    j.erase("runtime_s");
    return j.dump();
  };
  const auto r1 = without_timing(cli::cmd_oracle(o).report);
  o.workers = 5;
  check(without_timing(cli::cmd_oracle(o).report) == r1, "oracle report");

  std::string detail = "repeated runs and worker counts give identical results";
  if (!broken.empty()) {
    detail = "differences in:";
    for (const auto& s : broken) detail += " " + s;
  }
  report(12, ok, detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  separable_epr_bound();
  iff_on_epr_family();
  visibility_golden_values();
  werner_threshold();
  ghz_biseparable_bound();
  svetlichny_golden_value();
  w_type();
  qudit();
  networks();
  classical_contradiction();
  zkp_statistics();
  determinism();
  std::printf("%d of 12 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
