// qmat.hpp
// Dense complex-matrix kernel for small multi-site systems: density matrices,
// tensor products, local operators, expectations and projective measurements.
//
// Site ordering: site 0 is the most significant digit of the computational
// index, i.e. |i_0 i_1 ... i_{n-1}> maps to sum_k i_k * prod_{m>k} d_m.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qew {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using SiteDims = std::vector<std::size_t>;

/// Raised for malformed inputs: dimension mismatches, invalid parameters,
/// violated preconditions.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double psd = -1e-10;
inline constexpr double unitary = 1e-12;
inline constexpr double orthonormal = 1e-12;
inline constexpr double probability_sum = 1e-10;
/// Branches with probability at or below this are flagged instead of normalized.
inline constexpr double zero_branch = 1e-14;
}  // namespace tol

inline std::size_t total_dim(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

/// Digits of a computational index, most significant site first.
inline std::vector<std::size_t> index_digits(std::span<const std::size_t> dims, std::size_t index) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
  return out;
}

inline std::size_t digits_index(std::span<const std::size_t> dims, std::span<const std::size_t> digits) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
  return idx;
}

/// Index of |j j ... j>.
inline std::size_t repeated_index(std::span<const std::size_t> dims, std::size_t j) {
  std::vector<std::size_t> digits(dims.size(), j);
  return digits_index(dims, digits);
}

/// Index of a bit string such as "001" on qubit sites.
inline std::size_t bits_index(std::string_view bits) {
  std::size_t idx = 0;
  for (char c : bits) idx = idx * 2 + static_cast<std::size_t>(c == '1');
  return idx;
}

// ---------------------------------------------------------------------------
// Tensor products

/// Kronecker product: entry (i*p+k, j*q+l) = a(i,j) * b(k,l) for b of size p x q.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto p = b.rows(), q = b.cols();
  ComplexMatrix out(a.rows() * p, a.cols() * q);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * p, j * q, p, q) = a(i, j) * b;
  return out;
}

inline ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (const auto& f : factors) out = tensor_product(out, f);
  return out;
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
  StateVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// ---------------------------------------------------------------------------
// Density matrices

struct InvariantReport {
  double hermitian_deviation = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermitian_deviation <= tol::hermitian && trace_deviation <= tol::trace &&
           min_eigenvalue >= tol::psd;
  }
};

inline InvariantReport check_invariants(const ComplexMatrix& m) {
  InvariantReport r;
  if (m.rows() != m.cols() || m.rows() == 0) {
    r.hermitian_deviation = r.trace_deviation = INFINITY;
    r.min_eigenvalue = -INFINITY;
    return r;
  }
  r.hermitian_deviation = (m - m.adjoint()).cwiseAbs().maxCoeff();
  r.trace_deviation = std::abs(m.trace() - cplx{1.0, 0.0});
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

/// Hermitian, unit-trace, positive semidefinite matrix over an ordered list of
/// sites. The checked constructor enforces all three invariants.
class DensityMatrix {
 public:
  DensityMatrix(SiteDims dims, ComplexMatrix m) : dims_(std::move(dims)), m_(std::move(m)) {
    check_shape();
    const auto r = check_invariants(m_);
    if (!r.ok()) {
      throw input_error("density matrix invariants violated (hermitian dev " +
                        std::to_string(r.hermitian_deviation) + ", trace dev " +
                        std::to_string(r.trace_deviation) + ", min eigenvalue " +
                        std::to_string(r.min_eigenvalue) + ")");
    }
  }

  /// Skips the spectral check; for internal constructions that preserve the
  /// invariants by construction (mixtures, conjugations, normalized projections).
  static DensityMatrix trusted(SiteDims dims, ComplexMatrix m) {
    DensityMatrix out(std::move(dims), std::move(m), Trusted{});
    out.check_shape();
    return out;
  }

  static DensityMatrix from_pure(SiteDims dims, const StateVector& psi) {
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-12) throw input_error("pure state is not normalized");
    return trusted(std::move(dims), psi * psi.adjoint());
  }

  static DensityMatrix maximally_mixed(SiteDims dims) {
    const auto d = total_dim(dims);
    return trusted(std::move(dims), ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  }

  static DensityMatrix basis_state(SiteDims dims, std::size_t index) {
    const auto d = total_dim(dims);
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(index, index) = 1.0;
    return trusted(std::move(dims), std::move(m));
  }

  const SiteDims& dims() const { return dims_; }
  std::size_t num_sites() const { return dims_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  bool all_qubits() const {
    return std::all_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 2; });
  }

 private:
  struct Trusted {};
  DensityMatrix(SiteDims dims, ComplexMatrix m, Trusted) : dims_(std::move(dims)), m_(std::move(m)) {}

  void check_shape() const {
    for (auto d : dims_)
      if (d < 2) throw input_error("site dimensions must be >= 2");
    const auto d = total_dim(dims_);
    if (static_cast<std::size_t>(m_.rows()) != d || static_cast<std::size_t>(m_.cols()) != d)
      throw input_error("matrix size does not match product of site dimensions");
  }

  SiteDims dims_;
  ComplexMatrix m_;
};

// ---------------------------------------------------------------------------
// Local operators and observables

enum class Op { I, X, Y, Z, Shift, Clock };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::I: return "I";
    case Op::X: return "X";
    case Op::Y: return "Y";
    case Op::Z: return "Z";
    case Op::Shift: return "Shift";
    case Op::Clock: return "Clock";
  }
  return "?";
}

struct Factor {
  std::size_t site = 0;
  Op op = Op::I;
  int power = 1;  // Shift^power or Clock^power; ignored for Paulis

  bool operator==(const Factor&) const = default;
};

/// Tensor product of single-site operators; unlisted sites carry identity.
struct ObservableExpr {
  std::vector<Factor> factors;

  bool operator==(const ObservableExpr&) const = default;

  /// One character per site from {I,X,Y,Z}, e.g. "ZIX".
  static ObservableExpr pauli(std::string_view s) {
    ObservableExpr o;
    for (std::size_t k = 0; k < s.size(); ++k) {
      switch (s[k]) {
        case 'I': break;
        case 'X': o.factors.push_back({k, Op::X}); break;
        case 'Y': o.factors.push_back({k, Op::Y}); break;
        case 'Z': o.factors.push_back({k, Op::Z}); break;
        default: throw input_error(std::string("unknown Pauli letter '") + s[k] + "'");
      }
    }
    return o;
  }

  std::string to_string() const {
    if (factors.empty()) return "I";
    std::string out;
    for (const auto& f : factors) {
      if (!out.empty()) out += " ";
      out += op_name(f.op);
      if ((f.op == Op::Shift || f.op == Op::Clock) && f.power != 1) out += "^" + std::to_string(f.power);
      out += "(" + std::to_string(f.site) + ")";
    }
    return out;
  }
};

/// Single-site operator matrix. Shift = sum_j |j+1 mod d><j|, Clock = diag(w^j)
/// with w = exp(2 pi i / d).
inline ComplexMatrix local_operator(Op op, std::size_t d, int power = 1) {
  const bool pauli = op == Op::X || op == Op::Y || op == Op::Z;
  if (pauli && d != 2) throw input_error(std::string("Pauli ") + op_name(op) + " on a site of dimension " + std::to_string(d));
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  switch (op) {
    case Op::I: m.setIdentity(); break;
    case Op::X: m << 0, 1, 1, 0; break;
    case Op::Y: m << 0, cplx{0, -1}, cplx{0, 1}, 0; break;
    case Op::Z: m << 1, 0, 0, -1; break;
    case Op::Shift: {
      const auto p = static_cast<std::size_t>(((power % static_cast<int>(d)) + static_cast<int>(d)) % static_cast<int>(d));
      for (std::size_t j = 0; j < d; ++j) m((j + p) % d, j) = 1.0;
      break;
    }
    case Op::Clock: {
      const double w = 2.0 * M_PI / static_cast<double>(d);
      const auto p = ((power % static_cast<int>(d)) + static_cast<int>(d)) % static_cast<int>(d);
      for (std::size_t j = 0; j < d; ++j) m(j, j) = std::polar(1.0, w * static_cast<double>((static_cast<std::size_t>(p) * j) % d));
      break;
    }
  }
  return m;
}

inline void validate_observable(const ObservableExpr& obs, std::span<const std::size_t> dims) {
  std::vector<bool> seen(dims.size(), false);
  for (const auto& f : obs.factors) {
    if (f.site >= dims.size()) throw input_error("observable site " + std::to_string(f.site) + " out of range");
    if (seen[f.site]) throw input_error("observable repeats site " + std::to_string(f.site));
    seen[f.site] = true;
    if ((f.op == Op::X || f.op == Op::Y || f.op == Op::Z) && dims[f.site] != 2)
      throw input_error("Pauli operator on non-qubit site " + std::to_string(f.site));
  }
}

/// Dense realization of an observable over the given sites.
inline ComplexMatrix dense_operator(const ObservableExpr& obs, std::span<const std::size_t> dims) {
  validate_observable(obs, dims);
  std::vector<ComplexMatrix> locals;
  for (std::size_t k = 0; k < dims.size(); ++k) locals.push_back(ComplexMatrix::Identity(dims[k], dims[k]));
  for (const auto& f : obs.factors) locals[f.site] = local_operator(f.op, dims[f.site], f.power);
  return tensor_product(locals);
}

/// Tr(rho * O). Every supported local operator is monomial (one nonzero per
/// column), so O|b> = c_b |pi(b)> and the trace is sum_b c_b rho(b, pi(b)).
inline cplx expectation(const DensityMatrix& rho, const ObservableExpr& obs) {
  const auto& dims = rho.dims();
  validate_observable(obs, dims);
  std::vector<ComplexMatrix> locals(dims.size());
  std::vector<bool> has(dims.size(), false);
  for (const auto& f : obs.factors) {
    locals[f.site] = local_operator(f.op, dims[f.site], f.power);
    has[f.site] = true;
  }
  const auto D = rho.dim();
  const auto& m = rho.matrix();
  cplx sum = 0.0;
  std::vector<std::size_t> digits(dims.size()), image(dims.size());
  for (std::size_t b = 0; b < D; ++b) {
    // digits of b
    std::size_t rest = b;
    for (std::size_t k = dims.size(); k-- > 0;) {
      digits[k] = rest % dims[k];
      rest /= dims[k];
    }
    cplx coeff = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (!has[k]) {
        image[k] = digits[k];
        continue;
      }
      const auto& L = locals[k];
      std::size_t row = 0;
      for (; row < dims[k]; ++row)
        if (L(row, digits[k]) != cplx{0.0, 0.0}) break;
      image[k] = row;
      coeff *= L(row, digits[k]);
    }
    std::size_t pb = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) pb = pb * dims[k] + image[k];
    sum += coeff * m(b, pb);
  }
  return sum;
}

/// Tr(rho * O) for an arbitrary dense operator.
inline cplx expectation(const DensityMatrix& rho, const ComplexMatrix& op) {
  if (static_cast<std::size_t>(op.rows()) != rho.dim() || op.rows() != op.cols())
    throw input_error("operator dimension mismatch");
  return (rho.matrix() * op).trace();
}

// ---------------------------------------------------------------------------
// Local unitaries

inline bool is_unitary(const ComplexMatrix& u, double eps = tol::unitary) {
  if (u.rows() != u.cols()) return false;
  return ((u * u.adjoint()) - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= eps;
}

namespace detail {

/// In place: M <- (I (x) ... (x) U_site (x) ... (x) I) * M.
inline void apply_left_local(ComplexMatrix& m, const ComplexMatrix& u, std::span<const std::size_t> dims,
                             std::size_t site) {
  const std::size_t d = dims[site];
  std::size_t inner = 1;
  for (std::size_t k = site + 1; k < dims.size(); ++k) inner *= dims[k];
  const std::size_t outer = static_cast<std::size_t>(m.rows()) / (d * inner);
  std::vector<cplx> tmp(d);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * d * inner + in;
        for (std::size_t i = 0; i < d; ++i) {
          cplx s = 0.0;
          for (std::size_t j = 0; j < d; ++j) s += u(i, j) * m(base + j * inner, c);
          tmp[i] = s;
        }
        for (std::size_t i = 0; i < d; ++i) m(base + i * inner, c) = tmp[i];
      }
}

}  // namespace detail

/// (U_1 (x) ... (x) U_n) M (U_1 (x) ... (x) U_n)^dagger for an arbitrary square M,
/// with identity on unlisted sites. No unitarity check.
inline ComplexMatrix conjugate_local(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                     std::span<const std::pair<std::size_t, ComplexMatrix>> ops) {
  ComplexMatrix out = m;
  for (const auto& [site, u] : ops) detail::apply_left_local(out, u, dims, site);
  ComplexMatrix adj = out.adjoint();
  for (const auto& [site, u] : ops) detail::apply_left_local(adj, u, dims, site);
  return adj.adjoint();
}

/// (tensor of U) rho (tensor of U)^dagger; identity on unlisted sites.
inline DensityMatrix apply_local_unitaries(const DensityMatrix& rho,
                                           std::span<const std::pair<std::size_t, ComplexMatrix>> us) {
  const auto& dims = rho.dims();
  std::vector<bool> seen(dims.size(), false);
  for (const auto& [site, u] : us) {
    if (site >= dims.size()) throw input_error("unitary site out of range");
    if (seen[site]) throw input_error("unitary listed twice for one site");
    seen[site] = true;
    if (static_cast<std::size_t>(u.rows()) != dims[site] || u.rows() != u.cols())
      throw input_error("unitary dimension does not match site dimension");
    if (!is_unitary(u)) throw input_error("operator on site " + std::to_string(site) + " is not unitary");
  }
  return DensityMatrix::trusted(dims, conjugate_local(rho.matrix(), dims, us));
}

inline DensityMatrix apply_local_unitaries(const DensityMatrix& rho,
                                           std::initializer_list<std::pair<std::size_t, ComplexMatrix>> us) {
  std::vector<std::pair<std::size_t, ComplexMatrix>> v(us);
  return apply_local_unitaries(rho, std::span<const std::pair<std::size_t, ComplexMatrix>>(v));
}

/// rho_ab -> d_a rho_ab conj(d_b) for a diagonal operator given by its full diagonal.
inline ComplexMatrix conjugate_diagonal(const ComplexMatrix& m, const Eigen::VectorXcd& diag) {
  return diag.asDiagonal() * m * diag.conjugate().asDiagonal();
}

// ---------------------------------------------------------------------------
// Site manipulation

/// Reorders sites: output site k is input site perm[k].
inline DensityMatrix permute_sites(const DensityMatrix& rho, std::span<const std::size_t> perm) {
  const auto& dims = rho.dims();
  if (perm.size() != dims.size()) throw input_error("permutation size mismatch");
  SiteDims new_dims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims.at(perm[k]);
  const auto D = rho.dim();
  std::vector<std::size_t> map(D);  // new index -> old index
  std::vector<std::size_t> old_digits(dims.size());
  for (std::size_t n = 0; n < D; ++n) {
    const auto nd = index_digits(new_dims, n);
    for (std::size_t k = 0; k < perm.size(); ++k) old_digits[perm[k]] = nd[k];
    map[n] = digits_index(dims, old_digits);
  }
  ComplexMatrix out(D, D);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) out(i, j) = rho(map[i], map[j]);
  return DensityMatrix::trusted(std::move(new_dims), std::move(out));
}

inline DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  SiteDims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix::trusted(std::move(dims), tensor_product(a.matrix(), b.matrix()));
}

namespace detail {

/// Splits every full index into (index over `rest` sites, index over `sel` sites).
struct SiteSplit {
  SiteDims rest_dims, sel_dims;
  std::vector<std::size_t> rest_of, sel_of;  // indexed by full index
  std::vector<std::vector<std::size_t>> full;  // full[rest][sel]
};

inline SiteSplit split_sites(std::span<const std::size_t> dims, std::span<const std::size_t> sel) {
  SiteSplit s;
  std::vector<bool> chosen(dims.size(), false);
  for (auto k : sel) {
    if (k >= dims.size()) throw input_error("site index out of range");
    if (chosen[k]) throw input_error("site listed twice");
    chosen[k] = true;
    s.sel_dims.push_back(dims[k]);
  }
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!chosen[k]) s.rest_dims.push_back(dims[k]);
  const auto D = total_dim(dims);
  s.rest_of.resize(D);
  s.sel_of.resize(D);
  s.full.assign(total_dim(s.rest_dims), std::vector<std::size_t>(total_dim(s.sel_dims)));
  std::vector<std::size_t> rd, sd(sel.size());
  for (std::size_t i = 0; i < D; ++i) {
    const auto dg = index_digits(dims, i);
    rd.clear();
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (!chosen[k]) rd.push_back(dg[k]);
    for (std::size_t k = 0; k < sel.size(); ++k) sd[k] = dg[sel[k]];
    s.rest_of[i] = digits_index(s.rest_dims, rd);
    s.sel_of[i] = digits_index(s.sel_dims, sd);
    s.full[s.rest_of[i]][s.sel_of[i]] = i;
  }
  return s;
}

}  // namespace detail

/// Traces out every site not listed in `keep`; kept sites stay in ascending order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  std::vector<std::size_t> drop;
  for (std::size_t k = 0; k < rho.num_sites(); ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) drop.push_back(k);
  const auto s = detail::split_sites(rho.dims(), drop);
  const auto R = total_dim(s.rest_dims), S = total_dim(s.sel_dims);
  ComplexMatrix out = ComplexMatrix::Zero(R, R);
  for (std::size_t a = 0; a < R; ++a)
    for (std::size_t b = 0; b < R; ++b)
      for (std::size_t t = 0; t < S; ++t) out(a, b) += rho(s.full[a][t], s.full[b][t]);
  return DensityMatrix::trusted(s.rest_dims, std::move(out));
}

// ---------------------------------------------------------------------------
// Projective measurement

struct MeasurementBranch {
  double probability = 0.0;
  /// Normalized state of the unmeasured sites; empty when the branch has
  /// (numerically) zero probability.
  std::optional<DensityMatrix> post;

  bool zero_probability() const { return !post.has_value(); }
};

inline void check_orthonormal_basis(std::span<const StateVector> basis, std::size_t dim) {
  if (basis.size() != dim) throw input_error("measurement basis does not span the measured subsystem");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (static_cast<std::size_t>(basis[i].size()) != dim) throw input_error("basis vector has wrong dimension");
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const cplx ip = basis[i].dot(basis[j]);
      const cplx expected = i == j ? 1.0 : 0.0;
      if (std::abs(ip - expected) > tol::orthonormal) throw input_error("measurement basis is not orthonormal");
    }
  }
}

/// Measures the listed sites jointly in an orthonormal basis of their combined
/// space (basis vectors indexed with the listed sites' digits in listed order).
/// Returns one branch per basis vector, in basis order.
inline std::vector<MeasurementBranch> measure_sites(const DensityMatrix& rho, std::span<const std::size_t> sites,
                                                    std::span<const StateVector> basis) {
  const auto s = detail::split_sites(rho.dims(), sites);
  const auto R = total_dim(s.rest_dims), S = total_dim(s.sel_dims);
  check_orthonormal_basis(basis, S);
  std::vector<MeasurementBranch> out;
  out.reserve(basis.size());
  double total = 0.0;
  for (const auto& e : basis) {
    ComplexMatrix post = ComplexMatrix::Zero(R, R);
    for (std::size_t a = 0; a < R; ++a)
      for (std::size_t b = 0; b < R; ++b) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
          if (e(i) == cplx{0.0, 0.0}) continue;
          const cplx ci = std::conj(e(i));
          for (std::size_t j = 0; j < S; ++j) acc += ci * rho(s.full[a][i], s.full[b][j]) * e(j);
        }
        post(a, b) = acc;
      }
    const double p = std::max(0.0, post.trace().real());
    total += p;
    MeasurementBranch br;
    br.probability = p;
    if (p > tol::zero_branch) {
      post /= p;
      post = 0.5 * (post + post.adjoint()).eval();
      br.post = DensityMatrix::trusted(s.rest_dims.empty() ? SiteDims{} : s.rest_dims, std::move(post));
    }
    out.push_back(std::move(br));
  }
  if (std::abs(total - 1.0) > tol::probability_sum) throw input_error("measurement probabilities do not sum to 1");
  return out;
}

inline std::vector<MeasurementBranch> projective_measure(const DensityMatrix& rho, std::size_t site,
                                                         std::span<const StateVector> basis) {
  const std::size_t sites[] = {site};
  return measure_sites(rho, sites, basis);
}

inline std::vector<MeasurementBranch> joint_measure_two_sites(const DensityMatrix& rho,
                                                              std::pair<std::size_t, std::size_t> sites,
                                                              std::span<const StateVector> basis) {
  if (sites.first >= rho.num_sites() || sites.second >= rho.num_sites()) throw input_error("site index out of range");
  if (rho.dims()[sites.first] != 2 || rho.dims()[sites.second] != 2)
    throw input_error("joint two-site measurement requires qubit sites");
  const std::size_t s[] = {sites.first, sites.second};
  return measure_sites(rho, s, basis);
}

// ---------------------------------------------------------------------------
// Common bases

inline std::vector<StateVector> computational_basis(std::size_t d) {
  std::vector<StateVector> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back(StateVector::Unit(d, j));
  return out;
}

/// {|+>, |->}.
inline std::vector<StateVector> plus_minus_basis() {
  const double h = 1.0 / std::sqrt(2.0);
  StateVector p(2), m(2);
  p << h, h;
  m << h, -h;
  return {p, m};
}

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline const char* bell_name(BellState b) {
  switch (b) {
    case BellState::PhiPlus: return "phi+";
    case BellState::PhiMinus: return "phi-";
    case BellState::PsiPlus: return "psi+";
    case BellState::PsiMinus: return "psi-";
  }
  return "?";
}

/// Bell basis in the order phi+, phi-, psi+, psi-.
inline std::vector<StateVector> bell_basis() {
  const double h = 1.0 / std::sqrt(2.0);
  std::vector<StateVector> out(4, StateVector::Zero(4));
  out[0](0) = h, out[0](3) = h;
  out[1](0) = h, out[1](3) = -h;
  out[2](1) = h, out[2](2) = h;
  out[3](1) = h, out[3](2) = -h;
  return out;
}

}  // namespace qew
