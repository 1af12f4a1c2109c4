// oracle.hpp
// Independent checks for the witness bounds: random separable and
// biseparable states, multi-start witness maximization, bulk bound
// campaigns and the partial-transpose test.

#pragma once

#include "qew/parallel.hpp"
#include "qew/qmat.hpp"
#include "qew/states.hpp"
#include "qew/witnesses.hpp"

#include <random>

namespace qew {

struct SamplerConfig {
  SiteDims dims{2, 2};
  std::size_t terms = 1;                 // mixture size, 1..16
  std::uint64_t seed = 0;
  std::vector<std::size_t> partition;    // sites of one side, for biseparable sampling
  bool all_partitions = false;           // pick a fresh bipartition for every term
};

inline void validate(const SamplerConfig& cfg, bool needs_partition = false) {
  if (cfg.dims.size() < 2) throw input_error("sampler needs at least two sites");
  for (auto d : cfg.dims)
    if (d < 2) throw input_error("site dimensions must be >= 2");
  if (cfg.terms < 1 || cfg.terms > 16) throw input_error("mixture terms must be in 1..16");
  if (needs_partition && !cfg.all_partitions) {
    if (cfg.partition.empty() || cfg.partition.size() >= cfg.dims.size())
      throw input_error("partition must be a nonempty proper subset of the sites");
    std::vector<bool> seen(cfg.dims.size(), false);
    for (auto s : cfg.partition) {
      if (s >= cfg.dims.size() || seen[s]) throw input_error("invalid partition site");
      seen[s] = true;
    }
  }
}

namespace detail {

/// Groups of sites whose joint pure state is drawn as one factor.
using Grouping = std::vector<std::vector<std::size_t>>;

inline Grouping singleton_groups(std::size_t n) {
  Grouping g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = {k};
  return g;
}

inline Grouping bipartition_groups(std::size_t n, const std::vector<std::size_t>& side) {
  std::vector<bool> in(n, false);
  for (auto s : side) in[s] = true;
  Grouping g(2);
  for (std::size_t k = 0; k < n; ++k) g[in[k] ? 0 : 1].push_back(k);
  return g;
}

/// Uniform over the 2^{n-1} - 1 unordered bipartitions; site 0 always lands in group 0.
inline Grouping random_bipartition(std::size_t n, CounterRng& rng) {
  const std::uint64_t count = (std::uint64_t{1} << (n - 1)) - 1;
  const std::uint64_t code = 1 + static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(count));
  std::vector<std::size_t> side;
  for (std::size_t k = 1; k < n; ++k)
    if ((std::min(code, count) >> (k - 1)) & 1U) side.push_back(k);
  std::vector<std::size_t> other{0};
  std::vector<bool> in(n, false);
  for (auto s : side) in[s] = true;
  for (std::size_t k = 1; k < n; ++k)
    if (!in[k]) other.push_back(k);
  return {other, side};
}

inline std::size_t group_dim(const SiteDims& dims, const std::vector<std::size_t>& group) {
  std::size_t d = 1;
  for (auto s : group) d *= dims[s];
  return d;
}

/// Product over groups of the given group vectors, in natural site order.
inline StateVector assemble(const SiteDims& dims, const Grouping& groups, const std::vector<StateVector>& parts) {
  const auto D = total_dim(dims);
  StateVector psi(D);
  std::vector<std::size_t> sub;
  for (std::size_t i = 0; i < D; ++i) {
    const auto digits = index_digits(dims, i);
    cplx amp = 1.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::size_t idx = 0;
      for (auto s : groups[g]) idx = idx * dims[s] + digits[s];
      amp *= parts[g](static_cast<Eigen::Index>(idx));
    }
    psi(static_cast<Eigen::Index>(i)) = amp;
  }
  return psi;
}

inline StateVector gaussian_vector(std::size_t d, CounterRng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector v(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(static_cast<Eigen::Index>(k)) = cplx{re, im};
  }
  return v;
}

inline StateVector haar_vector(std::size_t d, CounterRng& rng) {
  StateVector v = gaussian_vector(d, rng);
  const double nrm = v.norm();
  return nrm > 0 ? StateVector(v / nrm) : StateVector(StateVector::Unit(d, 0));
}

inline DensityMatrix mix_terms(const SiteDims& dims, const std::vector<double>& weights,
                               const std::vector<StateVector>& pure) {
  const auto D = total_dim(dims);
  ComplexMatrix m = ComplexMatrix::Zero(D, D);
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t i = 0; i < pure.size(); ++i) m.noalias() += (weights[i] / total) * (pure[i] * pure[i].adjoint());
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix::trusted(dims, m);
}

inline DensityMatrix sample_grouped(const SamplerConfig& cfg, std::size_t index, bool biseparable) {
  CounterRng rng(cfg.seed, index);
  const auto n = cfg.dims.size();
  std::vector<double> weights(cfg.terms);
  std::vector<StateVector> pure(cfg.terms);
  for (std::size_t t = 0; t < cfg.terms; ++t) {
    weights[t] = -std::log(1.0 - rng.uniform());  // Dirichlet(1, ..., 1) after normalization
    Grouping groups = !biseparable       ? singleton_groups(n)
                      : cfg.all_partitions ? random_bipartition(n, rng)
                                           : bipartition_groups(n, cfg.partition);
    std::vector<StateVector> parts;
    for (const auto& g : groups) parts.push_back(haar_vector(group_dim(cfg.dims, g), rng));
    pure[t] = assemble(cfg.dims, groups, parts);
  }
  if (cfg.terms == 1) weights[0] = 1.0;
  return mix_terms(cfg.dims, weights, pure);
}

}  // namespace detail

/// Mixture of `terms` products of Haar-random local pure states with
/// Dirichlet-uniform weights; sample `index` depends only on (seed, index).
inline DensityMatrix sample_separable(const SamplerConfig& cfg, std::size_t index) {
  validate(cfg);
  return detail::sample_grouped(cfg, index, false);
}

/// Mixture of (Haar pure state on one side) (x) (Haar pure state on the other),
/// over cfg.partition or over random bipartitions when all_partitions is set.
inline DensityMatrix sample_biseparable(const SamplerConfig& cfg, std::size_t index) {
  validate(cfg, true);
  return detail::sample_grouped(cfg, index, true);
}

// ---------------------------------------------------------------------------
// Partial transpose

struct PptResult {
  bool npt = false;
  double min_eigenvalue = 0.0;
  bool exact = false;  // PPT is equivalent to separability (2x2, 2x3)
};

/// Transposes the last site. With more than two sites the cut is
/// (all but last) | last and the answer is necessary-only.
inline ComplexMatrix partial_transpose_last(const DensityMatrix& rho) {
  const auto dB = rho.dims().back();
  const auto dA = rho.dim() / dB;
  ComplexMatrix out(rho.dim(), rho.dim());
  for (std::size_t ia = 0; ia < dA; ++ia)
    for (std::size_t ib = 0; ib < dB; ++ib)
      for (std::size_t ja = 0; ja < dA; ++ja)
        for (std::size_t jb = 0; jb < dB; ++jb)
          out(ia * dB + ib, ja * dB + jb) = rho(ia * dB + jb, ja * dB + ib);
  return out;
}

inline PptResult ppt_check(const DensityMatrix& rho) {
  if (rho.num_sites() < 2) throw input_error("ppt_check needs at least two sites");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(partial_transpose_last(rho), Eigen::EigenvaluesOnly);
  PptResult r;
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.npt = r.min_eigenvalue < -1e-10;
  r.exact = rho.num_sites() == 2 && rho.dim() <= 6;
  return r;
}

// ---------------------------------------------------------------------------
// Named witnesses

enum class WitnessName { Epr, Ghz, W, Qudit };
enum class SearchSet { Separable, Biseparable };

struct WitnessTarget {
  WitnessName name = WitnessName::Epr;
  std::size_t n = 2;
  std::size_t d = 2;

  SiteDims dims() const { return SiteDims(n, d); }
  double bound() const { return name == WitnessName::W ? 0.5 : 0.0; }
  /// epr and the two-qudit witness are separability bounds; ghz, w and
  /// n-qudit are biseparability bounds.
  SearchSet natural_set() const {
    if (name == WitnessName::Epr || (name == WitnessName::Qudit && n == 2)) return SearchSet::Separable;
    return SearchSet::Biseparable;
  }
  double lhs(const DensityMatrix& rho) const {
    switch (name) {
      case WitnessName::Epr: return witness_epr(rho).lhs;
      case WitnessName::Ghz: return witness_ghz(rho).lhs;
      case WitnessName::W: return witness_w(rho).lhs;
      case WitnessName::Qudit: return witness_qudit(rho, n, d).lhs;
    }
    return 0.0;
  }
};

/// "epr", "ghz", "w", "qudit"; n and d apply where meaningful.
inline WitnessTarget witness_target(std::string_view name, std::size_t n = 3, std::size_t d = 3) {
  if (name == "epr") return {WitnessName::Epr, 2, 2};
  if (name == "ghz") {
    if (n < 2) throw input_error("ghz witness needs n >= 2");
    return {WitnessName::Ghz, n, 2};
  }
  if (name == "w") return {WitnessName::W, 3, 2};
  if (name == "qudit") {
    if (n < 2 || d < 2) throw input_error("qudit witness needs n >= 2 and d >= 2");
    return {WitnessName::Qudit, n, d};
  }
  throw input_error("unknown witness '" + std::string(name) + "'");
}

inline const char* witness_name(WitnessName w) {
  switch (w) {
    case WitnessName::Epr: return "epr";
    case WitnessName::Ghz: return "ghz";
    case WitnessName::W: return "w";
    case WitnessName::Qudit: return "qudit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Bulk bound campaign

struct CampaignResult {
  std::size_t samples = 0;
  double max_lhs = -std::numeric_limits<double>::infinity();
  std::size_t argmax_index = 0;
  std::size_t violations = 0;
};

/// Evaluates the witness on `samples` states drawn from `set`, counting
/// samples with lhs > bound + tol. Identical for any worker count.
inline CampaignResult bound_campaign(const WitnessTarget& target, const SamplerConfig& cfg, std::size_t samples,
                                    SearchSet set, unsigned workers = 1, double tol = 1e-9) {
  if (samples < 1) throw input_error("samples must be >= 1");
  if (cfg.dims != target.dims()) throw input_error("sampler dims do not match the witness");
  validate(cfg, set == SearchSet::Biseparable);
  std::vector<double> values(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    values[i] = target.lhs(set == SearchSet::Separable ? sample_separable(cfg, i) : sample_biseparable(cfg, i));
  });
  CampaignResult r;
  r.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    if (values[i] > r.max_lhs) {
      r.max_lhs = values[i];
      r.argmax_index = i;
    }
    if (values[i] > target.bound() + tol) ++r.violations;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Maximization

struct MaximizeResult {
  double max_value = -std::numeric_limits<double>::infinity();
  DensityMatrix argmax = DensityMatrix::maximally_mixed({2, 2});
  std::size_t start_index = 0;
  std::size_t evaluations = 0;
};

struct MaximizeOptions {
  SearchSet set = SearchSet::Separable;
  unsigned workers = 1;
  std::size_t refine_top = 8;
  std::size_t sweeps = 3;
};

namespace detail {

/// Real parameter vector -> mixed state. Per term: one weight parameter
/// (weight proportional to its square) followed by real and imaginary parts
/// of each group's unnormalized vector.
struct Parametrization {
  SiteDims dims;
  std::vector<Grouping> groups;  // per term

  std::size_t term_size(std::size_t t) const {
    std::size_t s = 1;
    for (const auto& g : groups[t]) s += 2 * group_dim(dims, g);
    return s;
  }
  std::size_t size() const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < groups.size(); ++t) s += term_size(t);
    return s;
  }

  DensityMatrix state(const std::vector<double>& x) const {
    std::vector<double> weights;
    std::vector<StateVector> pure;
    std::size_t pos = 0;
    for (std::size_t t = 0; t < groups.size(); ++t) {
      weights.push_back(x[pos] * x[pos]);
      ++pos;
      std::vector<StateVector> parts;
      for (const auto& g : groups[t]) {
        const auto d = group_dim(dims, g);
        StateVector v(d);
        for (std::size_t k = 0; k < d; ++k) v(static_cast<Eigen::Index>(k)) = cplx{x[pos + 2 * k], x[pos + 2 * k + 1]};
        pos += 2 * d;
        const double nrm = v.norm();
        parts.push_back(nrm > 1e-300 ? StateVector(v / nrm) : StateVector(StateVector::Unit(d, 0)));
      }
      pure.push_back(assemble(dims, groups[t], parts));
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 1e-300)) std::fill(weights.begin(), weights.end(), 1.0);
    return mix_terms(dims, weights, pure);
  }
};

struct Start {
  Parametrization param;
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
};

inline Start random_start(const WitnessTarget& target, const SamplerConfig& cfg, SearchSet set, std::size_t index) {
  CounterRng rng(cfg.seed, index, 1);
  const auto n = target.n;
  Start s;
  s.param.dims = target.dims();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < cfg.terms; ++t) {
    s.param.groups.push_back(set == SearchSet::Separable ? singleton_groups(n)
                             : cfg.all_partitions        ? random_bipartition(n, rng)
                                                         : bipartition_groups(n, cfg.partition));
  }
  s.x.resize(s.param.size());
  std::size_t pos = 0;
  for (std::size_t t = 0; t < cfg.terms; ++t) {
    s.x[pos] = std::sqrt(-std::log(1.0 - rng.uniform()));
    for (std::size_t k = 1; k < s.param.term_size(t); ++k) s.x[pos + k] = normal(rng);
    pos += s.param.term_size(t);
  }
  return s;
}

/// Golden-section maximization along each coordinate in turn, shrinking the
/// bracket every sweep; a move is kept only if it improves the value.
inline std::size_t refine(Start& s, const WitnessTarget& target, std::size_t sweeps) {
  constexpr double phi = 0.6180339887498949;
  std::size_t evals = 0;
  auto f = [&](const std::vector<double>& x) {
    ++evals;
    return target.lhs(s.param.state(x));
  };
  double radius = 1.0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep, radius *= 0.25) {
    for (std::size_t c = 0; c < s.x.size(); ++c) {
      std::vector<double> y = s.x;
      double a = s.x[c] - radius, b = s.x[c] + radius;
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      y[c] = x1;
      double f1 = f(y);
      y[c] = x2;
      double f2 = f(y);
      for (int it = 0; it < 40; ++it) {
        if (f1 >= f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - phi * (b - a);
          y[c] = x1;
          f1 = f(y);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + phi * (b - a);
          y[c] = x2;
          f2 = f(y);
        }
      }
      const double cand = f1 >= f2 ? x1 : x2;
      const double fc = std::max(f1, f2);
      if (fc > s.value) {
        s.x[c] = cand;
        s.value = fc;
      }
    }
  }
  return evals;
}

}  // namespace detail

/// Multi-start search for the largest witness value over separable or
/// biseparable mixtures of cfg.terms terms: `iters` random starts, then
/// coordinate refinement of the best few. Ties resolve to the lowest start.
inline MaximizeResult maximize_witness(const WitnessTarget& target, const SamplerConfig& cfg, std::size_t iters,
                                       const MaximizeOptions& opt = {}) {
  if (iters < 1) throw input_error("iters must be >= 1");
  SamplerConfig c = cfg;
  c.dims = target.dims();
  validate(c, opt.set == SearchSet::Biseparable);

  std::vector<double> values(iters);
  parallel_for(iters, opt.workers, [&](std::size_t i) {
    auto s = detail::random_start(target, c, opt.set, i);
    values[i] = target.lhs(s.param.state(s.x));
  });

  std::vector<std::size_t> order(iters);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto top = std::min(opt.refine_top, iters);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
  order.resize(top);

  std::vector<detail::Start> refined(top);
  std::vector<std::size_t> evals(top, 0);
  parallel_for(top, opt.workers, [&](std::size_t k) {
    refined[k] = detail::random_start(target, c, opt.set, order[k]);
    refined[k].value = values[order[k]];
    evals[k] = detail::refine(refined[k], target, opt.sweeps);
  });

  MaximizeResult r;
  r.evaluations = iters;
  for (auto e : evals) r.evaluations += e;
  for (std::size_t k = 0; k < top; ++k) {
    const bool better = refined[k].value > r.max_value ||
                        (refined[k].value == r.max_value && order[k] < r.start_index);
    if (better) {
      r.max_value = refined[k].value;
      r.start_index = order[k];
      r.argmax = refined[k].param.state(refined[k].x);
    }
  }
  return r;
}

}  // namespace qew
