// networks.hpp
// Networks of EPR/GHZ sources joined by local controlled-phase gates:
// state assembly, cluster generation, LOCC reductions to bipartite states
// (GHZ projection and entanglement swapping), per-source verification
// batteries and party connectivity.

#pragma once

#include "qew/qmat.hpp"
#include "qew/states.hpp"
#include "qew/witnesses.hpp"

#include <array>
#include <string>

namespace qew {

inline constexpr std::size_t max_network_qubits = 12;

struct NetworkSource {
  StateSpec state;
  std::vector<std::string> owners;  // party owning each qubit of the source, in order
  bool operator==(const NetworkSource&) const = default;
};

/// CP(theta) applied by `party` to two of its qubits (global qubit indices).
struct CpGateSpec {
  std::string party;
  double theta = M_PI;
  std::array<std::size_t, 2> qubits{0, 1};
  bool operator==(const CpGateSpec&) const = default;
};

/// Qubits are numbered globally in source order: source 0's qubits first.
struct NetworkSpec {
  std::vector<std::string> parties;
  std::vector<NetworkSource> sources;
  std::vector<CpGateSpec> cp_gates;

  bool operator==(const NetworkSpec&) const = default;

  std::size_t num_qubits() const {
    std::size_t n = 0;
    for (const auto& s : sources) n += s.state.n;
    return n;
  }

  std::vector<std::size_t> source_qubits(std::size_t k) const {
    std::size_t first = 0;
    for (std::size_t i = 0; i < k; ++i) first += sources.at(i).state.n;
    std::vector<std::size_t> out(sources.at(k).state.n);
    std::iota(out.begin(), out.end(), first);
    return out;
  }

  const std::string& owner(std::size_t qubit) const {
    for (const auto& s : sources) {
      if (qubit < s.owners.size()) return s.owners[qubit];
      qubit -= s.owners.size();
    }
    throw input_error("qubit index out of range");
  }
};

/// Throws on structural errors; returns warnings (e.g. gate angles outside (0, pi)).
inline std::vector<std::string> validate(const NetworkSpec& spec) {
  std::vector<std::string> warnings;
  auto known = [&](const std::string& p) { return std::find(spec.parties.begin(), spec.parties.end(), p) != spec.parties.end(); };
  for (std::size_t i = 0; i < spec.parties.size(); ++i)
    for (std::size_t j = i + 1; j < spec.parties.size(); ++j)
      if (spec.parties[i] == spec.parties[j]) throw input_error("duplicate party '" + spec.parties[i] + "'");
  for (const auto& s : spec.sources) {
    if (s.state.kind != StateKind::Epr && s.state.kind != StateKind::Ghz)
      throw input_error("network sources must be epr or ghz states");
    validate(s.state);
    if (s.owners.size() != s.state.n) throw input_error("every source qubit needs exactly one owner");
    for (const auto& o : s.owners)
      if (!known(o)) throw input_error("unknown party '" + o + "'");
  }
  const auto nq = spec.num_qubits();
  if (nq > max_network_qubits) throw input_error("network exceeds the " + std::to_string(max_network_qubits) + "-qubit budget");
  for (const auto& g : spec.cp_gates) {
    if (!known(g.party)) throw input_error("unknown gate party '" + g.party + "'");
    if (g.qubits[0] >= nq || g.qubits[1] >= nq || g.qubits[0] == g.qubits[1])
      throw input_error("gate qubits must be two distinct network qubits");
    if (spec.owner(g.qubits[0]) != g.party || spec.owner(g.qubits[1]) != g.party)
      throw input_error("gate qubits are not both held by party '" + g.party + "'");
    if (!std::isfinite(g.theta)) throw input_error("gate angle must be finite");
    if (!(g.theta > 0.0 && g.theta < M_PI)) warnings.push_back("gate angle " + std::to_string(g.theta) + " outside (0, pi)");
  }
  return warnings;
}

/// Tensor product of all source states in declared qubit order.
inline DensityMatrix build_network_state(const NetworkSpec& spec) {
  validate(spec);
  if (spec.sources.empty()) throw input_error("network has no sources");
  StateVector psi = StateVector::Ones(1);
  for (const auto& s : spec.sources) psi = tensor_product(psi, state_vector(s.state));
  return DensityMatrix::trusted(SiteDims(spec.num_qubits(), 2), psi * psi.adjoint());
}

/// diag(1, 1, 1, e^{i theta}).
inline ComplexMatrix cp_gate(double theta) {
  ComplexMatrix m = ComplexMatrix::Identity(4, 4);
  m(3, 3) = std::polar(1.0, theta);
  return m;
}

/// All CP gates of the spec; they are diagonal and therefore commute.
inline DensityMatrix apply_cp_gates(const DensityMatrix& rho, const NetworkSpec& spec) {
  validate(spec);
  if (rho.num_sites() != spec.num_qubits() || !rho.all_qubits()) throw input_error("state does not match network");
  const auto D = rho.dim();
  const auto n = rho.num_sites();
  Eigen::VectorXcd diag(D);
  for (std::size_t i = 0; i < D; ++i) {
    double phase = 0.0;
    for (const auto& g : spec.cp_gates) {
      const bool b0 = (i >> (n - 1 - g.qubits[0])) & 1U;
      const bool b1 = (i >> (n - 1 - g.qubits[1])) & 1U;
      if (b0 && b1) phase += g.theta;
    }
    diag(i) = std::polar(1.0, phase);
  }
  return DensityMatrix::trusted(rho.dims(), conjugate_diagonal(rho.matrix(), diag));
}

/// Blind channel applied after all CP gates of the network.
inline DensityMatrix generate_cluster(const NetworkSpec& spec, const BlindChannel& ch) {
  return apply_blind_channel(apply_cp_gates(build_network_state(spec), spec), ch);
}

inline DensityMatrix generate_cluster(const NetworkSpec& spec) {
  return apply_cp_gates(build_network_state(spec), spec);
}

// ---------------------------------------------------------------------------
// Reductions

struct ReductionResult {
  std::pair<std::size_t, std::size_t> pair;
  DensityMatrix state;
  std::vector<std::string> corrections;
  double probability = 0.0;
  std::vector<int> outcomes;  // +/-1 per measured qubit, or the Bell label index
  std::string label;
};

/// Measures every qubit except `keep` in the {|+>, |->} basis and applies
/// Z to the first kept qubit when the outcome parity is odd, which restores
/// rho_{00;11} = rho_{0..0;1..1} on every branch. Returns all nonzero branches
/// in outcome order, or only the branch matching `outcomes` (one +/-1 per
/// measured qubit in ascending qubit order).
inline std::vector<ReductionResult> reduce_ghz_to_epr(const DensityMatrix& rho, std::pair<std::size_t, std::size_t> keep,
                                                      std::optional<std::vector<int>> outcomes = std::nullopt,
                                                      double leakage_tol = 1e-8) {
  const auto n = rho.num_sites();
  if (!rho.all_qubits() || n < 2) throw input_error("reduction needs an n >= 2 qubit state");
  if (keep.first >= n || keep.second >= n || keep.first == keep.second) throw input_error("keep indices out of range");
  const auto e = subspace_elements(rho, Family::Ghz);
  if (e.leakage > leakage_tol) throw input_error("state leaks out of span{|0..0>, |1..1>}");

  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < n; ++k)
    if (k != keep.first && k != keep.second) others.push_back(k);
  const std::size_t m = others.size();
  if (outcomes && outcomes->size() != m) throw input_error("need one outcome per measured qubit");

  const auto pm = plus_minus_basis();
  std::vector<StateVector> basis;
  for (std::size_t code = 0; code < (std::size_t{1} << m); ++code) {
    StateVector v = StateVector::Ones(1);
    for (std::size_t k = 0; k < m; ++k) v = tensor_product(v, pm[(code >> (m - 1 - k)) & 1U]);
    basis.push_back(v);
  }
  const auto branches = measure_sites(rho, others, basis);

  std::vector<ReductionResult> out;
  for (std::size_t code = 0; code < branches.size(); ++code) {
    std::vector<int> signs(m);
    int parity = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const int bit = static_cast<int>((code >> (m - 1 - k)) & 1U);
      signs[k] = bit ? -1 : +1;
      parity ^= bit;
    }
    if (outcomes && *outcomes != signs) continue;
    const auto& br = branches[code];
    if (br.zero_probability()) continue;
    DensityMatrix post = *br.post;  // kept qubits in ascending order
    if (keep.first > keep.second) {
      const std::size_t perm[] = {1, 0};
      post = permute_sites(post, perm);
    }
    ReductionResult r{keep, post, {}, br.probability, signs, {}};
    for (int s : signs) r.label += s > 0 ? '+' : '-';
    if (parity) {
      ComplexMatrix z = local_operator(Op::Z, 2);
      r.state = apply_local_unitaries(r.state, {{0, z}});
      r.corrections.push_back("Z on qubit " + std::to_string(keep.first));
    }
    out.push_back(std::move(r));
  }
  if (outcomes && out.empty()) throw input_error("requested outcome branch has zero probability");
  return out;
}

/// Bell measurement on (B, C) of rho_AB (x) rho_CD, followed by the fixed
/// correction table that maps every branch back into span{|00>, |11>} on (A, D):
///   phi+  none
///   phi-  Z on A
///   psi+  X on D
///   psi-  X on D, then Z on A
/// Corrected coherence: rho_{00;11} rho'_{00;11} / N for phi+-, and
/// rho_{00;11} rho'_{11;00} / N for psi+-, N the branch normalizer.
inline std::vector<ReductionResult> entanglement_swap(const DensityMatrix& rho_ab, const DensityMatrix& rho_cd,
                                                      std::optional<BellState> outcome = std::nullopt,
                                                      double leakage_tol = 1e-8) {
  for (const auto* r : {&rho_ab, &rho_cd}) {
    if (r->num_sites() != 2 || !r->all_qubits()) throw input_error("entanglement swap needs two-qubit inputs");
    if (subspace_elements(*r, Family::Epr).leakage > leakage_tol)
      throw input_error("input leaks out of span{|00>, |11>}");
  }
  const auto joint = tensor_product(rho_ab, rho_cd);
  const std::size_t bc[] = {1, 2};
  const auto bell = bell_basis();
  const auto branches = measure_sites(joint, bc, bell);
  const ComplexMatrix z = local_operator(Op::Z, 2), x = local_operator(Op::X, 2);

  std::vector<ReductionResult> out;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto label = static_cast<BellState>(k);
    if (outcome && *outcome != label) continue;
    const auto& br = branches[k];
    if (br.zero_probability()) {
      if (outcome) throw input_error(std::string("Bell outcome ") + bell_name(label) + " has zero probability");
      continue;
    }
    ReductionResult r{{0, 3}, *br.post, {}, br.probability, {static_cast<int>(k)}, bell_name(label)};
    if (label == BellState::PsiPlus || label == BellState::PsiMinus) {
      r.state = apply_local_unitaries(r.state, {{1, x}});
      r.corrections.push_back("X on D");
    }
    if (label == BellState::PhiMinus || label == BellState::PsiMinus) {
      r.state = apply_local_unitaries(r.state, {{0, z}});
      r.corrections.push_back("Z on A");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification battery and connectivity

/// One battery per source, over global qubit indices: ZZ = 1, ZX = 0, XZ = 0
/// on the source's pair (EPR) or ring pairs (GHZ), plus the all-X nonzero line.
inline std::vector<ParadoxBattery> theorem3_battery(const NetworkSpec& spec, BatteryMode mode = BatteryMode::Companion) {
  validate(spec);
  std::vector<ParadoxBattery> out;
  for (std::size_t k = 0; k < spec.sources.size(); ++k) out.push_back(ghz_chain_battery(spec.source_qubits(k), mode));
  return out;
}

struct ConnectivityResult {
  bool connected = false;
  std::vector<std::vector<std::string>> components;  // in order of first party appearance
};

/// Parties are linked when they hold qubits of a common source.
inline ConnectivityResult connectivity_check(const NetworkSpec& spec) {
  const auto P = spec.parties.size();
  std::vector<std::size_t> parent(P);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto index_of = [&](const std::string& p) {
    auto it = std::find(spec.parties.begin(), spec.parties.end(), p);
    if (it == spec.parties.end()) throw input_error("unknown party '" + p + "'");
    return static_cast<std::size_t>(it - spec.parties.begin());
  };
  for (const auto& s : spec.sources) {
    if (s.owners.empty()) continue;
    const auto first = index_of(s.owners.front());
    for (const auto& o : s.owners) {
      const auto a = find(first), b = find(index_of(o));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  ConnectivityResult r;
  std::vector<std::ptrdiff_t> slot(P, -1);
  for (std::size_t i = 0; i < P; ++i) {
    const auto root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(r.components.size());
      r.components.emplace_back();
    }
    r.components[static_cast<std::size_t>(slot[root])].push_back(spec.parties[i]);
  }
  r.connected = r.components.size() <= 1;
  return r;
}

}  // namespace qew
