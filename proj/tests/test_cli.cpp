#include <gtest/gtest.h>

#include "qew/cli.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qew;
using namespace qew::cli;
namespace fs = std::filesystem;

namespace {

const std::string kData = QEW_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(QEW_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qew_cli_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& csv, std::string* header) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON round trips

TEST(JsonRoundTrip, StateSpecs) {
  for (const auto& s : {StateSpec::epr(0.7853981633974483), StateSpec::ghz(4, 1.1), StateSpec::w({0.5, 0.5, 0.5, 0.5}),
                        StateSpec::qudit_ghz(3, 3, {0.6, 0.0, 0.8})}) {
    const auto text = to_json(s).dump();
    EXPECT_EQ(state_from_json(parse_json_text(text)), s) << text;
  }
}

TEST(JsonRoundTrip, ChannelsNetworksAndStrategies) {
  const BlindChannel ch{{{0.25, {{0.0, 0.1}, {0.3, -2.0}}}, {0.75, {{1.0, 2.0}, {0.0, 0.0}}}}};
  const auto ch2 = channel_from_json(parse_json_text(to_json(ch).dump()));
  ASSERT_EQ(ch2.terms.size(), 2u);
  EXPECT_EQ(ch2.terms[1].p, 0.75);
  EXPECT_EQ(ch2.terms[0].site_phases, ch.terms[0].site_phases);

  NetworkSpec net{{"A", "B", "C"},
                  {{StateSpec::epr(0.3), {"A", "B"}}, {StateSpec::ghz(3, 0.9), {"B", "C", "A"}}},
                  {{"B", 1.25, {1, 2}}}};
  EXPECT_EQ(network_from_json(parse_json_text(to_json(net).dump())), net);

  for (const ProverStrategy& s : {ProverStrategy{HonestProver{StateSpec::epr(0.4), ch, 0.9}},
                                  ProverStrategy{SeparableDiagProver{0.25}}, ProverStrategy{FixedOutcomesProver{{-1, 1}}}}) {
    const auto text = to_json(s).dump();
    EXPECT_EQ(to_json(strategy_from_json(parse_json_text(text))).dump(), text);
  }
}

TEST(JsonRoundTrip, SampleFilesParse) {
  EXPECT_EQ(state_from_json(read_json_file(data("epr_pi4.json"))).kind, StateKind::Epr);
  EXPECT_EQ(state_from_json(read_json_file(data("qudit3_max.json"))).d, 3u);
  EXPECT_EQ(network_from_json(read_json_file(data("chain_cp.json"))).cp_gates.size(), 1u);
  EXPECT_EQ(channel_from_json(read_json_file(data("dephase_2q.json"))).terms.size(), 2u);
  EXPECT_EQ(strategy_from_json(read_json_file(data("prover_fixed.json"))).index(), 2u);
}

TEST(JsonParsing, MalformedInputsRejected) {
  EXPECT_THROW(parse_json_text("{"), input_error);
  EXPECT_THROW(state_from_json(parse_json_text(R"({"kind":"bell"})")), input_error);
  EXPECT_THROW(state_from_json(parse_json_text(R"({"kind":"epr"})")), input_error);
  EXPECT_THROW(state_from_json(parse_json_text(R"({"kind":"epr","theta":"x"})")), input_error);
  EXPECT_THROW(state_from_json(parse_json_text(R"({"kind":"ghz","n":-3,"theta":0.1})")), input_error);
  EXPECT_THROW(state_from_json(parse_json_text(R"({"kind":"w","a":[1,0,0]})")), input_error);
  EXPECT_THROW(channel_from_json(parse_json_text(R"({"terms":[{"p":1.0,"site_phases":[1,2]}]})")), input_error);
  EXPECT_THROW(network_from_json(parse_json_text(R"({"parties":["A"],"sources":[{"state":{"kind":"epr","theta":0.5},"owners":["A","Z"]}]})")), input_error);
  EXPECT_THROW(network_from_json(parse_json_text(
                   R"({"parties":["A","B"],"sources":[{"state":{"kind":"epr","theta":0.5},"owners":["A","B"]}],
                       "cp_gates":[{"party":"A","theta":1.0,"qubits":[0,-1]}]})")),
               input_error);
  EXPECT_THROW(strategy_from_json(parse_json_text(R"({"kind":"fixed_outcomes","answers":[1]})")), input_error);
  EXPECT_THROW(strategy_from_json(parse_json_text(R"({"kind":"oracle"})")), input_error);
  EXPECT_THROW(read_json_file(data("does_not_exist.json")), input_error);
}

// ---------------------------------------------------------------------------
// witness

TEST(CmdWitness, EprQuarterPi) {
  const auto r = cmd_witness(StateSpec::epr(M_PI / 4), {});
  EXPECT_EQ(r["witness"]["family"], "epr");
  EXPECT_NEAR(r["witness"]["lhs"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(r["witness"]["verdict"], "entangled");
  EXPECT_EQ(r["battery"]["pass"], true);
  EXPECT_EQ(r["boundary"], false);
  EXPECT_NEAR(r["noise_witness"]["s"].get<double>(), 3.0, 1e-12);
}

TEST(CmdWitness, DephasedEprNotWitnessed) {
  WitnessOptions opt;
  opt.channel = channel_from_json(read_json_file(data("dephase_2q.json")));
  const auto r = cmd_witness(StateSpec::epr(M_PI / 4), opt);
  EXPECT_EQ(r["witness"]["verdict"], "not-witnessed");
  EXPECT_NEAR(r["witness"]["lhs"].get<double>(), 0.0, 1e-12);
  EXPECT_EQ(r["battery"]["pass"], false);
  EXPECT_EQ(r["battery"]["failures"], 1);
}

TEST(CmdWitness, NoisyGhzStillEntangled) {
  WitnessOptions opt;
  opt.noise = 0.9;
  const auto r = cmd_witness(StateSpec::ghz(3, M_PI / 4), opt);
  EXPECT_EQ(r["witness"]["family"], "ghz");
  EXPECT_EQ(r["witness"]["verdict"], "entangled");
  EXPECT_EQ(r["noise"], 0.9);
  EXPECT_FALSE(r.contains("noise_witness"));
}

TEST(CmdWitness, AutoFamilyPicksWAndQudit) {
  const double a = 1.0 / std::sqrt(3.0);
  const auto w = cmd_witness(StateSpec::w({a, a, a, 0.0}), {});
  EXPECT_EQ(w["witness"]["family"], "w");
  EXPECT_NEAR(w["witness"]["lhs"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(w["witness"]["secondary_bound"], 0.25);
  const auto q = cmd_witness(StateSpec::qudit_ghz(2, 3, {a, a, a}), {});
  EXPECT_EQ(q["witness"]["family"], "qudit");
  EXPECT_NEAR(q["witness"]["lhs"].get<double>(), 2.0, 1e-12);
  EXPECT_EQ(q["battery"]["pass"], true);
}

TEST(CmdWitness, AmbiguousAutoFamilyNeedsAFlag) {
  // At visibility 1/3 the balanced three-qubit GHZ mixture leaks 1/2 out of both subspaces.
  WitnessOptions opt;
  opt.noise = 1.0 / 3.0;
  EXPECT_THROW(cmd_witness(StateSpec::ghz(3, M_PI / 4), opt), input_error);
  opt.family = FamilyChoice::Ghz;
  EXPECT_EQ(cmd_witness(StateSpec::ghz(3, M_PI / 4), opt)["witness"]["family"], "ghz");
  opt.family = FamilyChoice::Auto;
  opt.noise = 0.0;
  EXPECT_EQ(cmd_witness(StateSpec::ghz(3, M_PI / 4), opt)["witness"]["family"], "w");
}

TEST(CmdWitness, ExplicitFamilyAndBadTolerances) {
  WitnessOptions opt;
  opt.family = FamilyChoice::W;
  const auto r = cmd_witness(StateSpec::ghz(3, M_PI / 4), opt);
  EXPECT_EQ(r["witness"]["family"], "w");
  EXPECT_EQ(r["witness"]["iff_valid"], false);
  opt.family = FamilyChoice::Epr;
  EXPECT_THROW(cmd_witness(StateSpec::ghz(3, M_PI / 4), opt), input_error);
  WitnessOptions bad;
  bad.tol.eps_nz = 0.0;
  EXPECT_THROW(cmd_witness(StateSpec::epr(0.5), bad), input_error);
  EXPECT_THROW(family_choice("cluster"), input_error);
}

TEST(CmdWitness, NoiseCoefficientOption) {
  WitnessOptions opt;
  opt.noise = 0.25;
  EXPECT_EQ(cmd_witness(StateSpec::epr(M_PI / 4), opt)["noise_witness"]["verdict"], "not-witnessed");
  opt.noise_coefficient = 4.0;
  EXPECT_EQ(cmd_witness(StateSpec::epr(M_PI / 4), opt)["noise_witness"]["verdict"], "entangled");
}

// ---------------------------------------------------------------------------
// scan-visibility

TEST(CmdScan, GoldenRowsAndHeader) {
  std::string header;
  const auto rows = parse_csv(cmd_scan_visibility(parse_range("0:0.5:0.25"), parse_kinds("witness,chsh,svetlichny3")),
                              &header);
  EXPECT_EQ(header, "offdiag,v_witness,v_chsh,v_svetlichny3");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<double>{0.0, 1.0, 1.0, 1.0}));
  EXPECT_NEAR(rows[1][1], 0.5, 1e-12);
  EXPECT_NEAR(rows[2][1], 1.0 / 3.0, 1e-11);
  EXPECT_NEAR(rows[2][2], 1.0 / std::sqrt(2.0), 1e-11);
  EXPECT_NEAR(rows[2][3], 1.0 / std::sqrt(2.0), 1e-11);
}

TEST(CmdScan, TwelveSignificantDigitsAndColumnSelection) {
  const auto csv = cmd_scan_visibility(parse_range("0.5:0.5:0.1"), parse_kinds("chsh,witness"));
  EXPECT_EQ(csv, "offdiag,v_witness,v_chsh\n0.5,0.333333333333,0.707106781187\n");
}

TEST(CmdScan, MonotoneAndStable) {
  const auto a = cmd_scan_visibility(parse_range("0:0.5:0.001"), parse_kinds("witness,chsh,svetlichny3"));
  EXPECT_EQ(a, cmd_scan_visibility(parse_range("0:0.5:0.001"), parse_kinds("witness,chsh,svetlichny3")));
  const auto rows = parse_csv(a, nullptr);
  EXPECT_EQ(rows.size(), 501u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    for (int c = 1; c <= 3; ++c) EXPECT_LE(rows[i][c], rows[i - 1][c]);
  EXPECT_EQ(rows.back()[0], 0.5);
}

TEST(CmdScan, RangeErrors) {
  EXPECT_THROW(parse_range("0:0.5"), input_error);
  EXPECT_THROW(parse_range("a:b:c"), input_error);
  EXPECT_THROW(cmd_scan_visibility(parse_range("0:0.6:0.1"), parse_kinds("witness")), input_error);
  EXPECT_THROW(cmd_scan_visibility(parse_range("0.3:0.2:0.1"), parse_kinds("witness")), input_error);
  EXPECT_THROW(cmd_scan_visibility(parse_range("0:0.5:0"), parse_kinds("witness")), input_error);
  EXPECT_THROW(parse_kinds("witness,bell"), input_error);
}

// ---------------------------------------------------------------------------
// zkp / network / oracle

TEST(CmdZkp, HonestAcceptedSeparableRejected) {
  EXPECT_EQ(cmd_zkp(HonestProver{}, 10000, 1, 5.0).report["accepted"], true);
  const auto sep = cmd_zkp(SeparableDiagProver{0.5}, 10000, 1, 5.0);
  EXPECT_EQ(sep.report["accepted"], false);
  EXPECT_EQ(sep.report["lines"]["xx_significant"], false);
  EXPECT_EQ(sep.transcript.rounds.size(), 10000u);
  EXPECT_THROW(cmd_zkp(HonestProver{}, 10, 1, 5.0), input_error);
}

TEST(CmdNetwork, ChainWithPartialPhaseGatePasses) {
  const auto r = cmd_network(network_from_json(read_json_file(data("chain_cp.json"))), std::nullopt);
  EXPECT_EQ(r["pass"], true);
  EXPECT_EQ(r["connected"], true);
  EXPECT_EQ(r["sources"].size(), 2u);
  EXPECT_TRUE(r["warnings"].empty());
}

TEST(CmdNetwork, ControlledZChainFailsTheAllXLines) {
  const auto r = cmd_network(network_from_json(read_json_file(data("chain_cz.json"))), std::nullopt);
  EXPECT_EQ(r["pass"], false);
  for (const auto& s : r["sources"]) EXPECT_EQ(s["battery"]["items"].back()["pass"], false);
  EXPECT_EQ(r["warnings"].size(), 1u);  // theta = pi sits on the edge of (0, pi)
}

TEST(CmdNetwork, DephasedSourceFailsItsNonZeroLine) {
  const auto spec = network_from_json(read_json_file(data("chain_cp.json")));
  const auto r = cmd_network(spec, channel_from_json(read_json_file(data("dephase_chain_source0.json"))));
  EXPECT_EQ(r["pass"], false);
  EXPECT_EQ(r["sources"][0]["battery"]["pass"], false);
  EXPECT_EQ(r["sources"][0]["battery"]["items"].back()["contract"], "nonzero");
  EXPECT_EQ(r["sources"][0]["battery"]["items"].back()["pass"], false);
  EXPECT_EQ(r["sources"][1]["battery"]["pass"], true);
}

TEST(CmdNetwork, DisconnectedReported) {
  const auto r = cmd_network(network_from_json(read_json_file(data("two_pairs.json"))), std::nullopt);
  EXPECT_EQ(r["connected"], false);
  EXPECT_EQ(r["components"].size(), 2u);
  EXPECT_EQ(r["pass"], true);
}

TEST(CmdOracle, SmallCampaignsPass) {
  OracleOptions o;
  o.samples = 500;
  o.iters = 100;
  o.seed = 3;
  o.workers = 2;
  for (const char* w : {"epr", "ghz", "w", "qudit"}) {
    o.witness = w;
    const auto run = cmd_oracle(o);
    EXPECT_FALSE(run.violated) << w;
    EXPECT_EQ(run.report["violations"], 0) << w;
    EXPECT_LE(run.report["max_lhs"].get<double>(), run.report["bound"].get<double>() + 1e-9) << w;
  }
  o.witness = "bogus";
  EXPECT_THROW(cmd_oracle(o), input_error);
}

// ---------------------------------------------------------------------------
// Binary: exit codes and output routing

TEST(Binary, WitnessSucceedsAndWritesJson) {
  const auto r = run_cli("witness " + data("epr_pi4.json"));
  EXPECT_EQ(r.code, 0);
  const auto j = parse_json_text(r.out);
  EXPECT_EQ(j["witness"]["verdict"], "entangled");
}

TEST(Binary, NotWitnessedVerdictStillExitsZero) {
  const auto r = run_cli("witness " + data("epr_pi4.json") + " --channel " + data("dephase_2q.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(parse_json_text(r.out)["witness"]["verdict"], "not-witnessed");
}

TEST(Binary, InputErrorsExitTwo) {
  EXPECT_EQ(run_cli("witness " + data("missing.json")).code, 2);
  EXPECT_EQ(run_cli("witness " + data("epr_pi4.json") + " --family nope").code, 2);
  EXPECT_EQ(run_cli("witness " + data("epr_pi4.json") + " --tol-eq -1").code, 2);
  EXPECT_EQ(run_cli("scan-visibility --range 0:0.9:0.1").code, 2);
  EXPECT_EQ(run_cli("zkp " + data("prover_honest.json") + " -N 1000").code, 2);  // --seed is mandatory
  EXPECT_EQ(run_cli("oracle epr --samples 10").code, 2);
  EXPECT_EQ(run_cli("oracle bogus --seed 1").code, 2);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST(Binary, OracleViolationExitsOne) {
  EXPECT_EQ(run_cli("oracle epr --samples 50 --iters 10 --seed 1").code, 0);
  EXPECT_EQ(run_cli("oracle epr --samples 50 --iters 10 --seed 1 --tol -2").code, 1);
}

TEST(Binary, ScanCsvOnStdout) {
  const auto r = run_cli("scan-visibility --range 0.25:0.5:0.25 --kinds witness");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "offdiag,v_witness\n0.25,0.5\n0.5,0.333333333333\n");
}

TEST(Binary, OutputDirectoryRouting) {
  const auto dir = scratch_dir("outdir");
  const std::string env = "QEW_OUT_DIR=" + dir.string();
  EXPECT_EQ(run_cli("scan-visibility --range 0:0.5:0.25", env).code, 0);
  EXPECT_TRUE(fs::exists(dir / "visibility.csv"));
  const auto z = run_cli("zkp " + data("prover_honest.json") + " -N 2000 --seed 7", env);
  EXPECT_EQ(z.code, 0);
  EXPECT_TRUE(z.out.empty());
  const auto verdict = parse_json_text(slurp(dir / "zkp_verdict.json"));
  EXPECT_EQ(verdict["accepted"], true);
  std::ifstream tin(dir / "zkp_transcript.csv");
  const auto t = read_transcript(tin);
  EXPECT_EQ(t.N, 2000u);
  EXPECT_EQ(t.seed, 7u);
  EXPECT_EQ(t, run_protocol(HonestProver{}, 2000, 7));
  EXPECT_EQ(run_cli("network " + data("two_pairs.json"), env).code, 0);
  EXPECT_EQ(parse_json_text(slurp(dir / "network_report.json"))["connected"], false);
  // explicit -o wins over the directory
  const auto explicit_path = dir / "custom.json";
  EXPECT_EQ(run_cli("witness " + data("ghz3_pi4.json") + " -o " + explicit_path.string(), env).code, 0);
  EXPECT_TRUE(fs::exists(explicit_path));
  EXPECT_FALSE(fs::exists(dir / "witness_report.json"));
  fs::remove_all(dir);
}

TEST(Binary, ZkpRejectionIsAVerdictNotAnError) {
  const auto dir = scratch_dir("zkp");
  const auto r = run_cli("zkp " + data("prover_separable.json") + " -N 10000 --seed 3 --transcript " +
                         (dir / "t.csv").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(parse_json_text(r.out)["accepted"], false);
  EXPECT_EQ(run_cli("zkp " + data("prover_honest.json") + " -N 10 --seed 3 --transcript " + (dir / "u.csv").string()).code,
            2);
  fs::remove_all(dir);
}
