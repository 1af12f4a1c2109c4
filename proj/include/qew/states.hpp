// states.hpp
// State families, blind phase channels, diagonal Kraus channels, white-noise
// mixing and subspace matrix-element extraction.

#pragma once

#include "qew/qmat.hpp"

#include <map>

namespace qew {

// ---------------------------------------------------------------------------
// State specifications

enum class StateKind { Epr, Ghz, W, QuditGhz };

inline const char* state_kind_name(StateKind k) {
  switch (k) {
    case StateKind::Epr: return "epr";
    case StateKind::Ghz: return "ghz";
    case StateKind::W: return "w";
    case StateKind::QuditGhz: return "qudit_ghz";
  }
  return "?";
}

/// Parameterized pure-state family.
///   epr(theta):          cos(theta)|00> + sin(theta)|11>
///   ghz(n, theta):       cos(theta)|0..0> + sin(theta)|1..1>
///   w(a0..a3):           a0|001> + a1|010> + a2|100> + a3|111>
///   qudit_ghz(n,d,alpha): sum_j alpha_j |j..j>
struct StateSpec {
  StateKind kind = StateKind::Epr;
  std::size_t n = 2;
  std::size_t d = 2;
  double theta = M_PI / 4;
  std::vector<double> amplitudes;

  bool operator==(const StateSpec&) const = default;

  static StateSpec epr(double theta) { return {StateKind::Epr, 2, 2, theta, {}}; }
  static StateSpec ghz(std::size_t n, double theta) { return {StateKind::Ghz, n, 2, theta, {}}; }
  static StateSpec w(std::vector<double> a) { return {StateKind::W, 3, 2, 0.0, std::move(a)}; }
  static StateSpec qudit_ghz(std::size_t n, std::size_t d, std::vector<double> alpha) {
    return {StateKind::QuditGhz, n, d, 0.0, std::move(alpha)};
  }

  SiteDims dims() const { return SiteDims(n, d); }
};

inline void validate(const StateSpec& s) {
  auto normalized = [](const std::vector<double>& a) {
    double sum = 0.0;
    for (double x : a) {
      if (!std::isfinite(x)) return false;
      sum += x * x;
    }
    return std::abs(sum - 1.0) <= 1e-12;
  };
  switch (s.kind) {
    case StateKind::Epr:
      if (s.n != 2 || s.d != 2) throw input_error("epr state is two qubits");
      if (!std::isfinite(s.theta)) throw input_error("theta must be finite");
      break;
    case StateKind::Ghz:
      if (s.n < 2) throw input_error("ghz state needs n >= 2");
      if (s.d != 2) throw input_error("ghz state is on qubits");
      if (!std::isfinite(s.theta)) throw input_error("theta must be finite");
      break;
    case StateKind::W:
      if (s.n != 3 || s.d != 2) throw input_error("w state is three qubits");
      if (s.amplitudes.size() != 4) throw input_error("w state needs four amplitudes");
      if (!normalized(s.amplitudes)) throw input_error("w amplitudes are not normalized");
      break;
    case StateKind::QuditGhz:
      if (s.n < 2) throw input_error("qudit ghz state needs n >= 2");
      if (s.d < 2) throw input_error("qudit ghz state needs d >= 2");
      if (s.amplitudes.size() != s.d) throw input_error("qudit ghz state needs d amplitudes");
      if (!normalized(s.amplitudes)) throw input_error("qudit amplitudes are not normalized");
      break;
  }
}

/// True on the edges of a family where the pure state is not entangled in the
/// family's sense: sin(2 theta) = 0 for epr/ghz, fewer than two nonzero
/// amplitudes for w and qudit_ghz.
inline bool is_boundary(const StateSpec& s) {
  switch (s.kind) {
    case StateKind::Epr:
    case StateKind::Ghz: return std::abs(std::sin(2.0 * s.theta)) <= 1e-12;
    case StateKind::W:
    case StateKind::QuditGhz:
      return std::count_if(s.amplitudes.begin(), s.amplitudes.end(), [](double a) { return std::abs(a) > 1e-12; }) < 2;
  }
  return false;
}

inline StateVector state_vector(const StateSpec& s) {
  validate(s);
  const auto dims = s.dims();
  StateVector psi = StateVector::Zero(total_dim(dims));
  switch (s.kind) {
    case StateKind::Epr:
    case StateKind::Ghz:
      psi(repeated_index(dims, 0)) = std::cos(s.theta);
      psi(repeated_index(dims, 1)) = std::sin(s.theta);
      break;
    case StateKind::W:
      psi(bits_index("001")) = s.amplitudes[0];
      psi(bits_index("010")) = s.amplitudes[1];
      psi(bits_index("100")) = s.amplitudes[2];
      psi(bits_index("111")) = s.amplitudes[3];
      break;
    case StateKind::QuditGhz:
      for (std::size_t j = 0; j < s.d; ++j) psi(repeated_index(dims, j)) = s.amplitudes[j];
      break;
  }
  return psi;
}

inline DensityMatrix build_state(const StateSpec& s) {
  const auto psi = state_vector(s);
  return DensityMatrix::trusted(s.dims(), psi * psi.adjoint());
}

// ---------------------------------------------------------------------------
// Blind phase channels

/// Mixture of local diagonal phase unitaries. Each term carries one phase
/// vector per site: (theta, vartheta) -> diag(e^{i theta}, e^{i vartheta}) on
/// qubits, a length-d vector on qudits.
struct BlindChannel {
  struct Term {
    double p = 1.0;
    std::vector<std::vector<double>> site_phases;
    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  bool operator==(const BlindChannel&) const = default;

  static BlindChannel identity(const SiteDims& dims) {
    Term t;
    for (auto d : dims) t.site_phases.emplace_back(d, 0.0);
    return {{t}};
  }
};

inline void validate(const BlindChannel& ch, const SiteDims& dims) {
  if (ch.terms.empty()) throw input_error("blind channel has no terms");
  double total = 0.0;
  for (const auto& t : ch.terms) {
    if (!(t.p >= 0.0) || !std::isfinite(t.p)) throw input_error("blind channel probability must be nonnegative");
    total += t.p;
    if (t.site_phases.size() != dims.size()) throw input_error("blind channel site count does not match state");
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (t.site_phases[k].size() != dims[k]) throw input_error("phase vector length does not match site dimension");
      for (double ph : t.site_phases[k])
        if (!std::isfinite(ph)) throw input_error("blind channel phases must be finite");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw input_error("blind channel probabilities do not sum to 1");
}

/// Full diagonal of the product unitary for one channel term.
inline Eigen::VectorXcd phase_diagonal(const BlindChannel::Term& t, const SiteDims& dims) {
  const auto D = total_dim(dims);
  Eigen::VectorXcd diag(D);
  for (std::size_t i = 0; i < D; ++i) {
    const auto dg = index_digits(dims, i);
    double phase = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) phase += t.site_phases[k][dg[k]];
    diag(i) = std::polar(1.0, phase);
  }
  return diag;
}

/// sum_j p_j U_j rho U_j^dagger with U_j = tensor of per-site phase diagonals.
/// Populations are untouched; each coherence rho_ab is multiplied by
/// sum_j p_j e^{i(phi_j(a) - phi_j(b))}.
inline DensityMatrix apply_blind_channel(const DensityMatrix& rho, const BlindChannel& ch) {
  validate(ch, rho.dims());
  const auto D = rho.dim();
  ComplexMatrix factor = ComplexMatrix::Zero(D, D);
  for (const auto& t : ch.terms) {
    if (t.p == 0.0) continue;
    const auto diag = phase_diagonal(t, rho.dims());
    factor += t.p * (diag * diag.adjoint());
  }
  ComplexMatrix out = rho.matrix().cwiseProduct(factor);
  for (std::size_t i = 0; i < D; ++i) out(i, i) = rho(i, i);
  return DensityMatrix::trusted(rho.dims(), std::move(out));
}

/// Channel equal to applying `first` and then `second`.
inline BlindChannel compose(const BlindChannel& first, const BlindChannel& second) {
  BlindChannel out;
  for (const auto& a : first.terms)
    for (const auto& b : second.terms) {
      BlindChannel::Term t;
      t.p = a.p * b.p;
      if (a.site_phases.size() != b.site_phases.size()) throw input_error("cannot compose channels of different size");
      for (std::size_t k = 0; k < a.site_phases.size(); ++k) {
        if (a.site_phases[k].size() != b.site_phases[k].size()) throw input_error("site dimension mismatch in compose");
        std::vector<double> ph(a.site_phases[k].size());
        for (std::size_t j = 0; j < ph.size(); ++j) ph[j] = a.site_phases[k][j] + b.site_phases[k][j];
        t.site_phases.push_back(std::move(ph));
      }
      out.terms.push_back(std::move(t));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Diagonal Kraus channels

/// sum_j (M_j1 (x) M_j2 (x) ...) rho (...)^dagger with diagonal nonnegative
/// per-site Kraus operators M_js = diag(weights).
struct KrausChannel {
  struct Term {
    std::vector<std::vector<double>> site_weights;
  };
  std::vector<Term> terms;
};

/// Checks trace preservation: sum_j prod_s w_js(i_s)^2 = 1 for every basis index.
inline void validate(const KrausChannel& ch, const SiteDims& dims) {
  if (ch.terms.empty()) throw input_error("kraus channel has no terms");
  const auto D = total_dim(dims);
  std::vector<double> completeness(D, 0.0);
  for (const auto& t : ch.terms) {
    if (t.site_weights.size() != dims.size()) throw input_error("kraus channel site count does not match state");
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (t.site_weights[k].size() != dims[k]) throw input_error("kraus weight vector length mismatch");
      for (double w : t.site_weights[k])
        if (!(w >= 0.0) || !std::isfinite(w)) throw input_error("kraus weights must be nonnegative");
    }
    for (std::size_t i = 0; i < D; ++i) {
      const auto dg = index_digits(dims, i);
      double w = 1.0;
      for (std::size_t k = 0; k < dims.size(); ++k) w *= t.site_weights[k][dg[k]];
      completeness[i] += w * w;
    }
  }
  for (double c : completeness)
    if (std::abs(c - 1.0) > 1e-10) throw input_error("kraus channel violates completeness");
}

inline DensityMatrix apply_kraus_channel(const DensityMatrix& rho, const KrausChannel& ch) {
  validate(ch, rho.dims());
  const auto D = rho.dim();
  ComplexMatrix out = ComplexMatrix::Zero(D, D);
  for (const auto& t : ch.terms) {
    Eigen::VectorXcd diag(D);
    for (std::size_t i = 0; i < D; ++i) {
      const auto dg = index_digits(rho.dims(), i);
      double w = 1.0;
      for (std::size_t k = 0; k < dg.size(); ++k) w *= t.site_weights[k][dg[k]];
      diag(i) = w;
    }
    out += conjugate_diagonal(rho.matrix(), diag);
  }
  return DensityMatrix::trusted(rho.dims(), std::move(out));
}

// ---------------------------------------------------------------------------
// White noise

/// v rho + (1 - v) I / D.
inline DensityMatrix werner_mix(const DensityMatrix& rho, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw input_error("visibility must lie in [0, 1]");
  const auto D = rho.dim();
  ComplexMatrix out = v * rho.matrix() + ((1.0 - v) / static_cast<double>(D)) * ComplexMatrix::Identity(D, D);
  return DensityMatrix::trusted(rho.dims(), std::move(out));
}

// ---------------------------------------------------------------------------
// Subspace matrix elements

enum class Family { Epr, Ghz, W, Qudit };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Epr: return "epr";
    case Family::Ghz: return "ghz";
    case Family::W: return "w";
    case Family::Qudit: return "qudit";
  }
  return "?";
}

/// Restriction of rho to a family's support subspace.
///   epr/ghz: {|0..0>, |1..1>}
///   w:       {|001>, |010>, |100>, |111>}
///   qudit:   {|j..j>, j = 0..d-1}
struct SubspaceElements {
  Family family = Family::Epr;
  std::vector<std::size_t> basis;   // computational indices spanning the subspace
  std::vector<std::string> labels;  // digit strings, e.g. "001"
  ComplexMatrix block;              // block(a, b) = rho(basis[a], basis[b])
  double leakage = 0.0;             // population outside the subspace

  /// rho_{a;b} for labels a, b of basis states in the subspace.
  cplx element(std::string_view a, std::string_view b) const {
    return block(position(a), position(b));
  }

  std::size_t position(std::string_view label) const {
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels[k] == label) return k;
    throw input_error("label " + std::string(label) + " is not in the subspace");
  }

  std::map<std::string, cplx> named() const {
    std::map<std::string, cplx> out;
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = 0; b < labels.size(); ++b) out[labels[a] + ";" + labels[b]] = block(a, b);
    return out;
  }
};

inline std::string index_label(const SiteDims& dims, std::size_t index) {
  std::string out;
  for (auto dg : index_digits(dims, index)) out += static_cast<char>('0' + dg);
  return out;
}

inline SubspaceElements subspace_elements(const DensityMatrix& rho, Family family) {
  const auto& dims = rho.dims();
  SubspaceElements e;
  e.family = family;
  switch (family) {
    case Family::Epr:
      if (rho.num_sites() != 2 || !rho.all_qubits()) throw input_error("epr family needs two qubits");
      [[fallthrough]];
    case Family::Ghz:
      if (rho.num_sites() < 2 || !rho.all_qubits()) throw input_error("ghz family needs n >= 2 qubits");
      e.basis = {repeated_index(dims, 0), repeated_index(dims, 1)};
      break;
    case Family::W:
      if (rho.num_sites() != 3 || !rho.all_qubits()) throw input_error("w family needs three qubits");
      e.basis = {bits_index("001"), bits_index("010"), bits_index("100"), bits_index("111")};
      break;
    case Family::Qudit: {
      if (rho.num_sites() < 2) throw input_error("qudit family needs n >= 2 sites");
      const auto d = dims.front();
      for (auto dk : dims)
        if (dk != d) throw input_error("qudit family needs a uniform local dimension");
      for (std::size_t j = 0; j < d; ++j) e.basis.push_back(repeated_index(dims, j));
      break;
    }
  }
  const auto m = e.basis.size();
  e.block.resize(m, m);
  double inside = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    e.labels.push_back(index_label(dims, e.basis[a]));
    inside += rho(e.basis[a], e.basis[a]).real();
    for (std::size_t b = 0; b < m; ++b) e.block(a, b) = rho(e.basis[a], e.basis[b]);
  }
  e.leakage = std::max(0.0, 1.0 - inside);
  return e;
}

}  // namespace qew
