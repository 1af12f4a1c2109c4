// zkp.hpp
// Monte-Carlo model of the interactive entanglement proof. The prover keeps
// qubit A, the verifier receives qubit B. Each round the verifier announces
// k, the prover reports a = outcome of sigma_k on A, then the verifier
// measures sigma_s on B with s uniform. sigma_0 = X, sigma_1 = Z.

#pragma once

#include "qew/parallel.hpp"
#include "qew/qmat.hpp"
#include "qew/states.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <variant>

namespace qew {

struct HonestProver {
  StateSpec state = StateSpec::epr(M_PI / 4);
  BlindChannel channel;  // empty means identity
  double noise = 1.0;    // Werner visibility
};

/// p0 |00><00| + (1 - p0) |11><11|.
struct SeparableDiagProver {
  double p0 = 0.5;
};

/// Reports a fixed answer per challenge and sends B in |0>.
struct FixedOutcomesProver {
  std::array<int, 2> answers{+1, +1};  // a for k = 0, 1
};

using ProverStrategy = std::variant<HonestProver, SeparableDiagProver, FixedOutcomesProver>;

inline const char* strategy_name(const ProverStrategy& s) {
  switch (s.index()) {
    case 0: return "honest";
    case 1: return "separable_diag";
    default: return "fixed_outcomes";
  }
}

/// Two-qubit state shared by prover and verifier for the state-based strategies.
inline std::optional<DensityMatrix> strategy_state(const ProverStrategy& s) {
  if (const auto* h = std::get_if<HonestProver>(&s)) {
    validate(h->state);
    if (h->state.dims() != SiteDims{2, 2}) throw input_error("honest prover needs a two-qubit state");
    DensityMatrix rho = build_state(h->state);
    if (!h->channel.terms.empty()) rho = apply_blind_channel(rho, h->channel);
    if (h->noise != 1.0) rho = werner_mix(rho, h->noise);
    return rho;
  }
  if (const auto* d = std::get_if<SeparableDiagProver>(&s)) {
    if (!(d->p0 >= 0.0 && d->p0 <= 1.0)) throw input_error("separable_diag p0 must lie in [0, 1]");
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = d->p0;
    m(3, 3) = 1.0 - d->p0;
    return DensityMatrix::trusted({2, 2}, m);
  }
  return std::nullopt;
}

/// probs[k][s][o], o = 2 * (a == -1) + (b == -1).
using BornTable = std::array<std::array<std::array<double, 4>, 2>, 2>;

inline BornTable born_table(const ProverStrategy& strategy) {
  BornTable t{};
  const ComplexMatrix I2 = ComplexMatrix::Identity(2, 2);
  const std::array<ComplexMatrix, 2> sigma{local_operator(Op::X, 2), local_operator(Op::Z, 2)};
  if (const auto* f = std::get_if<FixedOutcomesProver>(&strategy)) {
    for (int a : f->answers)
      if (a != 1 && a != -1) throw input_error("fixed outcomes must be +1 or -1");
    // B = |0>: Z gives +1, X gives +-1 evenly.
    for (int k = 0; k < 2; ++k) {
      const int ai = f->answers[k] == 1 ? 0 : 1;
      t[k][0][2 * ai + 0] = 0.5;
      t[k][0][2 * ai + 1] = 0.5;
      t[k][1][2 * ai + 0] = 1.0;
    }
    return t;
  }
  const auto rho = *strategy_state(strategy);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      for (int o = 0; o < 4; ++o) {
        const double a = (o & 2) ? -1.0 : 1.0, b = (o & 1) ? -1.0 : 1.0;
        const ComplexMatrix pa = (I2 + a * sigma[k]) / 2.0, pb = (I2 + b * sigma[s]) / 2.0;
        const double p = expectation(rho, tensor_product(pa, pb)).real();
        t[k][s][o] = p < 1e-15 ? 0.0 : p;
      }
  return t;
}

struct Round {
  int k = 0;
  int a = 1;
  int s = 0;
  int b = 1;
  bool operator==(const Round&) const = default;
};

struct Transcript {
  std::uint64_t seed = 0;
  std::size_t N = 0;
  std::vector<Round> rounds;
  bool operator==(const Transcript&) const = default;
};

/// Round j draws from CounterRng(seed, j) only, so the transcript does not
/// depend on the worker count. The strategy enters only through its Born table.
inline Transcript run_protocol(const ProverStrategy& strategy, std::size_t N, std::uint64_t seed,
                               unsigned workers = 1) {
  if (N < 1) throw input_error("N must be >= 1");
  const auto table = born_table(strategy);
  Transcript t{seed, N, std::vector<Round>(N)};
  parallel_for(N, workers, [&](std::size_t j) {
    CounterRng rng(seed, j);
    Round r;
    r.k = rng.bit();
    r.s = rng.bit();
    const double u = rng.uniform();
    const auto& p = table[r.k][r.s];
    int o = 0;
    double acc = p[0];
    while (o < 3 && u >= acc) acc += p[++o];
    r.a = (o & 2) ? -1 : 1;
    r.b = (o & 1) ? -1 : 1;
    t.rounds[j] = r;
  });
  return t;
}

inline void write_transcript(std::ostream& os, const Transcript& t) {
  os << "# seed=" << t.seed << " N=" << t.N << "\n";
  os << "round,k,a,s,b\n";
  for (std::size_t j = 0; j < t.rounds.size(); ++j) {
    const auto& r = t.rounds[j];
    os << j << ',' << r.k << ',' << r.a << ',' << r.s << ',' << r.b << '\n';
  }
}

inline Transcript read_transcript(std::istream& is) {
  Transcript t;
  std::string line;
  if (!std::getline(is, line) || std::sscanf(line.c_str(), "# seed=%" SCNu64 " N=%zu", &t.seed, &t.N) != 2)
    throw input_error("transcript header missing");
  if (!std::getline(is, line) || line != "round,k,a,s,b") throw input_error("transcript column line missing");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t idx = 0;
    Round r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ls >> idx >> c1 >> r.k >> c2 >> r.a >> c3 >> r.s >> c4 >> r.b) || c1 != ',' || c2 != ',' || c3 != ',' ||
        c4 != ',')
      throw input_error("malformed transcript line: " + line);
    if (idx != t.rounds.size()) throw input_error("transcript rounds out of order");
    if ((r.k != 0 && r.k != 1) || (r.s != 0 && r.s != 1) || (r.a != 1 && r.a != -1) || (r.b != 1 && r.b != -1))
      throw input_error("transcript entry outside its alphabet: " + line);
    t.rounds.push_back(r);
  }
  if (t.rounds.size() != t.N) throw input_error("transcript length does not match N");
  return t;
}

// ---------------------------------------------------------------------------
// Verification

struct CellStat {
  std::size_t count = 0;
  double est = 0.0;
  double se = 0.0;
};

/// Cells indexed [k][s]; "zx" is prover Z (k = 1) against verifier X (s = 0).
struct CellTable {
  std::array<std::array<CellStat, 2>, 2> cell{};
  const CellStat& xx() const { return cell[0][0]; }
  const CellStat& xz() const { return cell[0][1]; }
  const CellStat& zx() const { return cell[1][0]; }
  const CellStat& zz() const { return cell[1][1]; }
};

inline CellTable cell_statistics(const Transcript& t) {
  CellTable c;
  std::array<std::array<long long, 2>, 2> sum{};
  for (const auto& r : t.rounds) {
    ++c.cell[r.k][r.s].count;
    sum[r.k][r.s] += r.a * r.b;
  }
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s) {
      auto& cs = c.cell[k][s];
      if (cs.count == 0) continue;
      cs.est = static_cast<double>(sum[k][s]) / static_cast<double>(cs.count);
      cs.se = std::sqrt(std::max(0.0, 1.0 - cs.est * cs.est) / static_cast<double>(cs.count));
    }
  return c;
}

inline constexpr std::size_t min_cell_samples = 30;

struct ZkpVerdict {
  bool accepted = false;
  CellTable stats;
  double z_threshold = 5.0;
  std::array<bool, 4> lines{};  // zz exact, zx zero, xz zero, xx significant
};

inline ZkpVerdict verify_transcript(const Transcript& t, double z = 5.0) {
  if (!(z > 0.0)) throw input_error("z threshold must be positive");
  ZkpVerdict v;
  v.z_threshold = z;
  v.stats = cell_statistics(t);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      if (v.stats.cell[k][s].count < min_cell_samples)
        throw input_error("undersampled cell (k=" + std::to_string(k) + ", s=" + std::to_string(s) + "): " +
                          std::to_string(v.stats.cell[k][s].count) + " < " + std::to_string(min_cell_samples));
  const auto& st = v.stats;
  v.lines = {std::abs(st.zz().est - 1.0) <= z * st.zz().se, std::abs(st.zx().est) <= z * st.zx().se,
             std::abs(st.xz().est) <= z * st.xz().se, std::abs(st.xx().est) > z * st.xx().se};
  v.accepted = v.lines[0] && v.lines[1] && v.lines[2] && v.lines[3];
  return v;
}

/// What the verifier can learn from a transcript. Assumes support on
/// span{|00>, |11>}: <XX> = 2 Re rho_{00;11}, populations from the prover's
/// Z answers, and |Im rho_{00;11}| bounded by positivity.
struct LeakageView {
  CellTable cells;
  double prover_z_plus = 0.0;  // fraction of a = +1 on k = 1
  double re_coherence = 0.0;
  double im_coherence_bound = 0.0;
  bool operator==(const LeakageView& o) const {
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < 2; ++s) {
        const auto &x = cells.cell[k][s], &y = o.cells.cell[k][s];
        if (x.count != y.count || x.est != y.est || x.se != y.se) return false;
      }
    return prover_z_plus == o.prover_z_plus && re_coherence == o.re_coherence &&
           im_coherence_bound == o.im_coherence_bound;
  }
};

inline LeakageView leakage_view(const Transcript& t) {
  LeakageView v;
  v.cells = cell_statistics(t);
  std::size_t zrounds = 0, zplus = 0;
  for (const auto& r : t.rounds)
    if (r.k == 1) {
      ++zrounds;
      if (r.a == 1) ++zplus;
    }
  v.prover_z_plus = zrounds ? static_cast<double>(zplus) / static_cast<double>(zrounds) : 0.0;
  v.re_coherence = v.cells.xx().est / 2.0;
  const double p00 = v.prover_z_plus, p11 = 1.0 - v.prover_z_plus;
  v.im_coherence_bound = std::sqrt(std::max(0.0, p00 * p11 - v.re_coherence * v.re_coherence));
  return v;
}

}  // namespace qew
