// Command-line front end. Exit codes: 0 success, 1 oracle bound violated,
// 2 input error. Verdicts are reported in the output, never in the exit code.

#include <CLI11.hpp>

#include "qew/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using qew::input_error;

std::filesystem::path out_dir() {
  const char* env = std::getenv("QEW_OUT_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
}

/// Explicit path wins; otherwise QEW_OUT_DIR/<fallback> when the variable is
/// set; otherwise stdout.
void emit(const std::string& body, const std::string& explicit_path, const std::string& fallback) {
  std::filesystem::path target;
  if (!explicit_path.empty()) target = explicit_path;
  else if (const char* env = std::getenv("QEW_OUT_DIR"); env && *env) target = std::filesystem::path(env) / fallback;
  if (target.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(target);
  if (!out) throw input_error("cannot write " + target.string());
  out << body;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement witness, paradox battery and network toolkit"};
  app.require_subcommand(1);

  qew::Tolerances tol;
  std::string out_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol-eq", tol.eps_eq, "Equality tolerance")->capture_default_str();
    sub->add_option("--tol-nz", tol.eps_nz, "Nonzero tolerance")->capture_default_str();
    sub->add_option("--leakage-tol", tol.leakage_tol, "Subspace leakage tolerance")->capture_default_str();
    sub->add_option("-o,--out", out_path, "Report path (default: stdout, or QEW_OUT_DIR)");
  };

  // witness
  auto* w = app.add_subcommand("witness", "Evaluate the family witness and paradox battery on a state");
  std::string state_file, channel_file, family = "auto";
  std::optional<double> noise;
  double noise_coefficient = 2.0;
  w->add_option("state", state_file, "State JSON file")->required();
  w->add_option("--channel", channel_file, "Blind channel JSON file");
  w->add_option("--noise", noise, "White-noise visibility v");
  w->add_option("--family", family, "auto|epr|ghz|w|qudit")->capture_default_str();
  w->add_option("--noise-coefficient", noise_coefficient, "Weight of <XX> in the two-qubit noise witness")
      ->capture_default_str();
  add_common(w);

  // scan-visibility
  auto* sv = app.add_subcommand("scan-visibility", "Critical white-noise visibilities as CSV");
  std::string range = "0:0.5:0.01", kinds = "witness,chsh,svetlichny3";
  sv->add_option("--range", range, "start:stop:step within [0, 0.5]")->capture_default_str();
  sv->add_option("--kinds", kinds, "Comma list of witness,chsh,svetlichny3")->capture_default_str();
  sv->add_option("-o,--out", out_path, "CSV path (default: stdout, or QEW_OUT_DIR)");

  // zkp
  auto* zk = app.add_subcommand("zkp", "Simulate and verify the interactive entanglement proof");
  std::string strategy_file, transcript_path;
  std::size_t rounds = 10000;
  std::uint64_t seed = 0;
  double z = 5.0;
  unsigned workers = 1;
  zk->add_option("strategy", strategy_file, "Prover strategy JSON file")->required();
  zk->add_option("-N,--rounds", rounds, "Number of rounds")->capture_default_str();
  zk->add_option("--seed", seed, "Random seed")->required();
  zk->add_option("-z", z, "z threshold")->capture_default_str();
  zk->add_option("--workers", workers, "Worker threads")->capture_default_str();
  zk->add_option("--transcript", transcript_path, "Transcript path (default: QEW_OUT_DIR or ./zkp_transcript.csv)");
  zk->add_option("-o,--out", out_path, "Verdict path (default: stdout, or QEW_OUT_DIR)");

  // network
  auto* nw = app.add_subcommand("network", "Generate a cluster state and run the per-source batteries");
  std::string network_file;
  nw->add_option("spec", network_file, "Network JSON file")->required();
  nw->add_option("--channel", channel_file, "Blind channel JSON file over all network qubits");
  add_common(nw);

  // oracle
  auto* orc = app.add_subcommand("oracle", "Random-sampling and maximization check of a witness bound");
  qew::cli::OracleOptions oo;
  std::optional<std::size_t> iters;
  orc->add_option("witness", oo.witness, "epr|ghz|w|qudit")->required();
  orc->add_option("--samples", oo.samples, "Random samples")->capture_default_str();
  orc->add_option("--seed", oo.seed, "Random seed")->required();
  orc->add_option("-n", oo.n, "Parties (ghz, qudit)")->capture_default_str();
  orc->add_option("-d", oo.d, "Local dimension (qudit)")->capture_default_str();
  orc->add_option("--terms", oo.terms, "Mixture terms per sample")->capture_default_str();
  orc->add_option("--iters", iters, "Maximization starts");
  orc->add_option("--workers", oo.workers, "Worker threads")->capture_default_str();
  orc->add_option("--tol", oo.tol, "Bound tolerance")->capture_default_str();
  orc->add_option("-o,--out", out_path, "Summary path (default: stdout, or QEW_OUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*w) {
      qew::cli::WitnessOptions opt;
      opt.tol = tol;
      opt.family = qew::cli::family_choice(family);
      opt.noise = noise;
      opt.noise_coefficient = noise_coefficient;
      if (!channel_file.empty()) opt.channel = qew::cli::channel_from_json(qew::cli::read_json_file(channel_file));
      const auto spec = qew::cli::state_from_json(qew::cli::read_json_file(state_file));
      emit(qew::cli::cmd_witness(spec, opt).dump(2) + "\n", out_path, "witness_report.json");
    } else if (*sv) {
      emit(qew::cli::cmd_scan_visibility(qew::cli::parse_range(range), qew::cli::parse_kinds(kinds)), out_path,
           "visibility.csv");
    } else if (*zk) {
      const auto strategy = qew::cli::strategy_from_json(qew::cli::read_json_file(strategy_file));
      const auto run = qew::cli::cmd_zkp(strategy, rounds, seed, z, workers);
      const auto tpath = transcript_path.empty() ? out_dir() / "zkp_transcript.csv" : std::filesystem::path(transcript_path);
      std::ofstream tout(tpath);
      if (!tout) throw input_error("cannot write " + tpath.string());
      qew::write_transcript(tout, run.transcript);
      auto report = run.report;
      report["transcript"] = tpath.string();
      emit(report.dump(2) + "\n", out_path, "zkp_verdict.json");
    } else if (*nw) {
      std::optional<qew::BlindChannel> ch;
      if (!channel_file.empty()) ch = qew::cli::channel_from_json(qew::cli::read_json_file(channel_file));
      const auto spec = qew::cli::network_from_json(qew::cli::read_json_file(network_file));
      emit(qew::cli::cmd_network(spec, ch, tol).dump(2) + "\n", out_path, "network_report.json");
    } else if (*orc) {
      oo.iters = iters;
      const auto run = qew::cli::cmd_oracle(oo);
      emit(run.report.dump(2) + "\n", out_path, "oracle_summary.json");
      return run.violated ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
