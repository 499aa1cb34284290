#pragma once

// Translation numbers between equivalent sums.
//
// For equivalent trigonometric polynomials a, b the deviation
// D(tau) = sum_j |a_j e^{i lambda_j tau} - b_j| gets arbitrarily small for
// arbitrarily large tau, and D(tau) bounds sup_t |f_a(t + tau) - f_b(t)|.
// find_tau locates such a tau by scanning D on a grid fine enough for its
// Lipschitz constant sum_j |a_j| |lambda_j| and refining local minima by
// golden-section search. The lattice strategy instead solves the simultaneous
// approximation tau g_k / 2pi = x_k (mod 1) over an integral basis g with the
// equivalence witness x, using LLL + Babai rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aptk/besic.hpp"
#include "aptk/error.hpp"
#include "aptk/freq.hpp"
#include "aptk/sums.hpp"

namespace aptk {

enum class SearchStrategy { Scan, ScanRefine, Lattice };

inline std::string_view to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::Scan: return "scan";
    case SearchStrategy::ScanRefine: return "scan+refine";
    case SearchStrategy::Lattice: return "lattice";
  }
  return "unknown";
}

struct TauCertificate {
  double tau = 0.0;
  double deviation = std::numeric_limits<double>::infinity();
  double target_eps = 0.0;
  double lower_bound_d = 0.0;
  std::size_t evaluations = 0;
  SearchStrategy strategy = SearchStrategy::ScanRefine;
  double scan_step = 0.0;
  double horizon = 0.0;
  std::size_t prefix_n = 0;
  bool success = false;
};

class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(TauCertificate best)
      : Error(ErrorCode::BudgetExhausted, "evaluation budget exhausted; best deviation " +
                                              std::to_string(best.deviation) + " at tau = " + std::to_string(best.tau)),
        best_(best) {}
  const TauCertificate& best() const noexcept { return best_; }

 private:
  TauCertificate best_;
};

struct SearchOptions {
  std::size_t budget = 100'000'000;  // deviation evaluations
  SearchStrategy strategy = SearchStrategy::ScanRefine;
  std::optional<std::size_t> prefix;  // only the first n terms enter D
};

namespace detail {

inline Verdict check_equivalent(const ExponentialSum& a, const ExponentialSum& b, BasisChoice basis) {
  EquivalenceOptions opts;
  opts.basis = basis;
  opts.mode = (a.exact_phases() && b.exact_phases()) ? DecisionMode::Exact : DecisionMode::Tolerance;
  Verdict v = decide_equivalence(a, b, opts);
  if (v.kind == Verdict::Kind::NotEquivalent)
    throw Error(ErrorCode::NotEquivalentInput, "inputs are not equivalent: " + v.reason);
  return v;
}

inline double scan_step(const DeviationFunction& dev, double eps) {
  const double scale = 2.0 * dev.sum_moduli() * dev.lambda_max();
  return scale > 0.0 ? std::min(0.1, eps / scale) : 0.1;
}

/// Golden-section minimization of f on [lo, hi].
template <typename F>
double golden_section(const F& f, double lo, double hi, std::size_t iterations, std::size_t& evals) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  evals += 2;
  for (std::size_t i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
    ++evals;
  }
  return f1 <= f2 ? x1 : x2;
}

using Real = long double;
using RealMatrix = std::vector<std::vector<Real>>;

inline Real inner(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void gram_schmidt(const RealMatrix& b, RealMatrix& bstar, RealMatrix& mu) {
  const std::size_t n = b.size();
  bstar = b;
  mu.assign(n, std::vector<Real>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Real denom = inner(bstar[j], bstar[j]);
      mu[i][j] = denom > 0 ? inner(b[i], bstar[j]) / denom : 0;
      for (std::size_t k = 0; k < bstar[i].size(); ++k) bstar[i][k] -= mu[i][j] * bstar[j][k];
    }
  }
}

/// LLL reduction of the rows of b (delta = 0.99); t tracks the integer
/// transform so that reduced b = t * original b.
inline void lll(RealMatrix& b, std::vector<std::vector<long long>>& t) {
  const std::size_t n = b.size();
  t.assign(n, std::vector<long long>(n, 0));
  for (std::size_t i = 0; i < n; ++i) t[i][i] = 1;
  RealMatrix bstar, mu;
  gram_schmidt(b, bstar, mu);
  std::size_t k = 1;
  std::size_t guard = 0;
  while (k < n && guard++ < 100000) {
    for (std::size_t jj = k; jj-- > 0;) {
      const Real q = std::nearbyint(mu[k][jj]);
      if (q == 0) continue;
      for (std::size_t c = 0; c < b[k].size(); ++c) b[k][c] -= q * b[jj][c];
      for (std::size_t c = 0; c < n; ++c) t[k][c] -= static_cast<long long>(q) * t[jj][c];
      gram_schmidt(b, bstar, mu);
    }
    const Real lhs = inner(bstar[k], bstar[k]);
    const Real rhs = (0.99L - mu[k][k - 1] * mu[k][k - 1]) * inner(bstar[k - 1], bstar[k - 1]);
    if (lhs >= rhs) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      std::swap(t[k], t[k - 1]);
      gram_schmidt(b, bstar, mu);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
}

/// Babai nearest-plane rounding; returns integer coefficients over the rows
/// of the reduced basis.
inline std::vector<long long> babai(const RealMatrix& b, const std::vector<Real>& target) {
  RealMatrix bstar, mu;
  gram_schmidt(b, bstar, mu);
  std::vector<Real> r = target;
  std::vector<long long> c(b.size(), 0);
  for (std::size_t i = b.size(); i-- > 0;) {
    const Real denom = inner(bstar[i], bstar[i]);
    const Real q = denom > 0 ? std::nearbyint(inner(r, bstar[i]) / denom) : 0;
    c[i] = static_cast<long long>(q);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= q * b[i][k];
  }
  return c;
}

struct LatticeProblem {
  std::vector<Real> c;  // g_k / 2pi
  std::vector<Real> x;  // witness, turns
};

/// Candidate tau > d with tau c_k - x_k close to an integer for all k, at
/// target accuracy eta (turns). Coordinate 0 is matched exactly.
inline std::optional<double> lattice_candidate(const LatticeProblem& p, double d, Real eta, Real offset_scale) {
  const std::size_t m = p.c.size();
  const Real c0 = p.c[0];
  const Real spread = std::pow(1 / eta, static_cast<Real>(m - 1));
  // tau(e) = (x_0 + e) / c0 > d
  const Real bound = d * c0 - p.x[0];
  Real base;
  if (c0 > 0)
    base = std::floor(bound) + 1 + offset_scale * spread;
  else
    base = std::ceil(bound) - 1 - offset_scale * spread;
  base = std::nearbyint(base);
  if (m == 1) return static_cast<double>((p.x[0] + base) / c0);
  RealMatrix b(m, std::vector<Real>(m, 0));
  std::vector<Real> target(m, 0);
  const Real s = 1 / eta;
  const Real w = 1 / spread;
  b[0][0] = w;
  for (std::size_t k = 1; k < m; ++k) {
    const Real alpha = p.c[k] / c0;
    Real beta = (p.x[0] + base) * alpha - p.x[k];
    beta -= std::floor(beta);
    b[0][k] = alpha * s;
    b[k][k] = s;
    target[k] = -beta * s;
  }
  std::vector<std::vector<long long>> t;
  lll(b, t);
  const auto coeff = babai(b, target);
  long long e = 0;
  for (std::size_t i = 0; i < m; ++i) e += coeff[i] * t[i][0];
  const Real tau = (p.x[0] + base + static_cast<Real>(e)) / c0;
  return static_cast<double>(tau);
}

inline TauCertificate scan_for_tau(const DeviationFunction& dev, double d, double eps, const SearchOptions& opts,
                                   SearchStrategy strategy) {
  TauCertificate cert;
  cert.target_eps = eps;
  cert.lower_bound_d = d;
  cert.strategy = strategy;
  const double delta = scan_step(dev, eps);
  cert.scan_step = delta;
  double horizon = 1024.0 * delta;
  TauCertificate best = cert;
  const double lip = dev.lipschitz();
  double prev2 = dev(d), prev1 = 0.0;
  std::size_t evals = 1;
  auto record_best = [&](double tau, double value) {
    if (value < best.deviation) {
      best.tau = tau;
      best.deviation = value;
    }
  };
  for (std::size_t i = 1;; ++i) {
    const double tau = d + static_cast<double>(i) * delta;
    while (tau - d > horizon) horizon *= 2.0;
    if (evals >= opts.budget) {
      best.evaluations = evals;
      best.horizon = horizon;
      throw BudgetExhausted(best);
    }
    const double value = dev(tau);
    ++evals;
    record_best(tau, value);
    if (strategy == SearchStrategy::Scan) {
      if (value < eps) {
        cert.tau = tau;
        cert.deviation = value;
        cert.evaluations = evals;
        cert.horizon = horizon;
        cert.success = true;
        return cert;
      }
      continue;
    }
    if (i >= 2 && prev1 <= prev2 && prev1 <= value && prev1 < eps + lip * delta) {
      const double lo = tau - 2.0 * delta;
      const double hi = tau;
      const double mid = tau - delta;
      double t_star = golden_section(dev, lo, hi, 60, evals);
      if (!(t_star > d)) t_star = mid;
      double v_star = dev(t_star);
      ++evals;
      if (prev1 < v_star) {
        t_star = mid;
        v_star = prev1;
      }
      record_best(t_star, v_star);
      if (v_star < eps) {
        cert.tau = t_star;
        cert.deviation = v_star;
        cert.evaluations = evals;
        cert.horizon = horizon;
        cert.success = true;
        return cert;
      }
    }
    prev2 = prev1;
    prev1 = value;
    if (i == 1) {
      prev2 = dev(d);
      ++evals;
    }
  }
}

inline double coefficient_weight(const ExponentialSum& a, const BasisInfo& basis, std::size_t n) {
  double w = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double h1 = 0.0;
    for (std::size_t k = 0; k < basis.rank(); ++k) h1 += std::abs(basis.coord_matrix(j, k).get_d());
    w += a.coeffs[j].modulus * h1;
  }
  return w;
}

}  // namespace detail

/// Some tau > d with D(tau) < eps over the first opts.prefix (or all) terms.
inline TauCertificate find_tau(const ExponentialSum& a, const ExponentialSum& b, const AtomTable& atoms, double d,
                               double eps, const SearchOptions& opts = {}) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "d must be finite and nonnegative");
  if (!atoms.numeric()) throw Error(ErrorCode::MissingAtomValue, "find_tau needs numeric atom values");
  const std::size_t n = opts.prefix ? std::min(*opts.prefix, a.size()) : a.size();
  const ExponentialSum pa = a.prefix(n);
  const ExponentialSum pb = b.prefix(n);
  const DeviationFunction dev(pa, pb, atoms);

  std::optional<Verdict> lattice_verdict;
  if (opts.strategy == SearchStrategy::Lattice) {
    Verdict v = detail::check_equivalent(pa, pb, BasisChoice::Integral);
    if (v.equivalent() && v.basis.is_integral && v.witnesses.size() == 1) lattice_verdict = std::move(v);
  } else {
    detail::check_equivalent(pa, pb, BasisChoice::Natural);
  }

  if (dev.size() == 0 || dev.lambda_max() == 0.0) {
    TauCertificate c;
    c.tau = d + 1.0;
    c.deviation = dev(c.tau);
    c.target_eps = eps;
    c.lower_bound_d = d;
    c.evaluations = 1;
    c.strategy = opts.strategy;
    c.prefix_n = n;
    c.success = c.deviation < eps;
    if (!c.success) throw BudgetExhausted(c);
    return c;
  }

  if (!lattice_verdict) {
    const auto strategy = opts.strategy == SearchStrategy::Lattice ? SearchStrategy::ScanRefine : opts.strategy;
    auto c = detail::scan_for_tau(dev, d, eps, opts, strategy);
    c.prefix_n = n;
    return c;
  }

  const BasisInfo& basis = lattice_verdict->basis;
  detail::LatticeProblem prob;
  for (std::size_t k = 0; k < basis.rank(); ++k) {
    prob.c.push_back(static_cast<detail::Real>(eval_numeric(basis.basis[k], atoms)) /
                     (2 * std::numbers::pi_v<detail::Real>));
    prob.x.push_back(static_cast<detail::Real>(lattice_verdict->witnesses.front().x[k].get_d()));
  }
  // put the fastest basis direction first
  std::size_t lead = 0;
  for (std::size_t k = 1; k < prob.c.size(); ++k)
    if (std::abs(prob.c[k]) > std::abs(prob.c[lead])) lead = k;
  std::swap(prob.c[0], prob.c[lead]);
  std::swap(prob.x[0], prob.x[lead]);

  TauCertificate cert;
  cert.target_eps = eps;
  cert.lower_bound_d = d;
  cert.strategy = SearchStrategy::Lattice;
  cert.prefix_n = n;
  TauCertificate best = cert;
  const double weight = detail::coefficient_weight(pa, basis, n);
  const detail::Real eta0 = weight > 0 ? eps / (kTwoPi * weight) : 0.5L;
  std::size_t evals = 0;
  for (int level = 0; level < 48; ++level) {
    const detail::Real eta = std::min<detail::Real>(0.5L, eta0 * std::pow(0.5L, level));
    for (int shift = 0; shift < 4; ++shift) {
      if (evals >= opts.budget) {
        best.evaluations = evals;
        throw BudgetExhausted(best);
      }
      const auto tau = detail::lattice_candidate(prob, d, eta, 2.0L + shift);
      if (!tau || !(*tau > d) || !std::isfinite(*tau)) continue;
      const double value = dev(*tau);
      ++evals;
      if (value < best.deviation) {
        best.tau = *tau;
        best.deviation = value;
      }
      if (value < eps) {
        cert.tau = *tau;
        cert.deviation = value;
        cert.evaluations = evals;
        cert.horizon = *tau - d;
        cert.success = true;
        return cert;
      }
    }
  }
  best.evaluations = evals;
  throw BudgetExhausted(best);
}

struct DensityReport {
  double interval_length_l = std::numeric_limits<double>::infinity();
  std::size_t window_count = 0;
  std::vector<std::size_t> taus_per_window;
  double max_gap = std::numeric_limits<double>::infinity();
};

struct TauEnumeration {
  std::vector<double> taus;
  std::vector<double> deviations;
  DensityReport density;
  std::size_t scanned = 0;
  std::size_t qualifying_samples = 0;
  std::size_t evaluations = 0;
  double scan_step = 0.0;
};

/// Refined local minima of D below eps on (t0, t1], in increasing order.
inline TauEnumeration enumerate_taus(const ExponentialSum& a, const ExponentialSum& b, const AtomTable& atoms, double eps,
                                     double t0, double t1, std::size_t max_count = 100000,
                                     std::size_t budget = 100'000'000) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "empty range");
  if (!a.is_polynomial() || !b.is_polynomial())
    throw Error(ErrorCode::TailPresent, "enumerate_taus works on trigonometric polynomials");
  detail::check_equivalent(a, b, BasisChoice::Natural);
  const DeviationFunction dev(a, b, atoms);
  TauEnumeration out;
  const double delta = detail::scan_step(dev, eps);
  out.scan_step = delta;
  const double lip = dev.lipschitz();
  const auto steps = static_cast<std::size_t>(std::floor((t1 - t0) / delta));
  std::vector<double> grid, values;
  grid.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    if (out.evaluations >= budget) {
      TauCertificate best;
      best.target_eps = eps;
      throw BudgetExhausted(best);
    }
    const double tau = t0 + static_cast<double>(i) * delta;
    grid.push_back(tau);
    values.push_back(dev(tau));
    ++out.evaluations;
    if (i > 0) {
      ++out.scanned;
      if (values.back() < eps) ++out.qualifying_samples;
    }
  }
  for (std::size_t i = 1; i + 1 < grid.size() && out.taus.size() < max_count; ++i) {
    if (!(values[i] <= values[i - 1] && values[i] <= values[i + 1] && values[i] < eps + lip * delta)) continue;
    double t_star = detail::golden_section(dev, grid[i - 1], grid[i + 1], 60, out.evaluations);
    double v_star = dev(t_star);
    ++out.evaluations;
    if (values[i] < v_star) {
      t_star = grid[i];
      v_star = values[i];
    }
    if (!(v_star < eps) || !(t_star > t0)) continue;
    if (!out.taus.empty() && t_star - out.taus.back() < delta) {
      if (v_star < out.deviations.back()) {
        out.taus.back() = t_star;
        out.deviations.back() = v_star;
      }
      continue;
    }
    out.taus.push_back(t_star);
    out.deviations.push_back(v_star);
  }
  DensityReport& rep = out.density;
  if (out.taus.size() >= 2) {
    double gap = 0.0;
    for (std::size_t i = 1; i < out.taus.size(); ++i) gap = std::max(gap, out.taus[i] - out.taus[i - 1]);
    rep.max_gap = gap;
    rep.interval_length_l = gap;
    const auto windows = static_cast<std::size_t>(std::ceil((t1 - t0) / gap));
    rep.window_count = windows;
    rep.taus_per_window.assign(windows, 0);
    for (double t : out.taus) {
      auto w = static_cast<std::size_t>(std::floor((t - t0) / gap));
      if (w >= windows) w = windows - 1;
      ++rep.taus_per_window[w];
    }
  }
  return out;
}

struct DenseTranslateRun {
  std::vector<double> taus;
  std::vector<double> measured;  // M(|f_{tau_n} - h|^2), Parseval
  std::vector<double> bounds;    // 5 eps_n
  std::vector<double> eps_sequence;
  std::vector<TauCertificate> certificates;
  bool success = false;
};

/// tau_1 < tau_2 < ... with M(|f(t + tau_n) - h(t)|^2) < 5 eps_n, where
/// eps_n = sum_{j > n} |a_j|^2 and tau_n brings the first n terms within
/// sqrt(eps_n) in deviation.
inline DenseTranslateRun dense_translate_sequence(const ExponentialSum& f, const ExponentialSum& h,
                                                  const AtomTable& atoms, std::size_t n_max,
                                                  const SearchOptions& opts = {}) {
  if (n_max == 0 || n_max > f.size())
    throw Error(ErrorCode::InvalidArgument, "n_max must be between 1 and the stored prefix length");
  detail::check_equivalent(f, h, BasisChoice::Natural);
  DenseTranslateRun run;
  double prev = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    double eps_n = f.tail_energy;
    for (std::size_t j = n; j < f.size(); ++j) eps_n += f.coeffs[j].modulus * f.coeffs[j].modulus;
    if (!(eps_n > 0.0))
      throw Error(ErrorCode::InvalidArgument, "eps_n vanishes at n = " + std::to_string(n) + "; add tail energy");
    SearchOptions o = opts;
    o.prefix = n;
    const auto cert = find_tau(f, h, atoms, prev, std::sqrt(eps_n), o);
    const double measured = std::pow(b2_distance_exact(translate(f, cert.tau, atoms), h).value, 2);
    run.taus.push_back(cert.tau);
    run.measured.push_back(measured);
    run.bounds.push_back(5.0 * eps_n);
    run.eps_sequence.push_back(eps_n);
    run.certificates.push_back(cert);
    prev = cert.tau;
  }
  run.success = true;
  for (std::size_t i = 0; i < run.taus.size(); ++i) {
    if (!(run.measured[i] < run.bounds[i])) run.success = false;
    if (i && !(run.taus[i] > run.taus[i - 1])) run.success = false;
  }
  return run;
}

struct UniformityReport {
  double ratio = std::numeric_limits<double>::infinity();
  std::size_t max_count = 0;
  std::size_t min_count = 0;
  std::size_t windows = 0;
};

/// Slides windows [a, a + l) at step l/100 over the span of the sorted taus
/// and compares the largest and smallest counts.
inline UniformityReport uniformity_report(const std::vector<double>& taus, double l) {
  if (!(l > 0.0)) throw Error(ErrorCode::InvalidArgument, "window length must be positive");
  if (!std::is_sorted(taus.begin(), taus.end())) throw Error(ErrorCode::InvalidArgument, "taus must be sorted");
  if (taus.size() < 2 || taus.back() - taus.front() < 3.0 * l)
    throw Error(ErrorCode::DegenerateInput, "span of taus must be at least 3 l");
  UniformityReport rep;
  rep.min_count = std::numeric_limits<std::size_t>::max();
  const double step = l / 100.0;
  const double front = taus.front();
  const double last_start = taus.back() - l;
  for (std::size_t k = 0;; ++k) {
    const double a = front + static_cast<double>(k) * step;
    if (a > last_start) break;
    const auto lo = std::lower_bound(taus.begin(), taus.end(), a);
    const auto hi = std::lower_bound(taus.begin(), taus.end(), a + l);
    const auto count = static_cast<std::size_t>(hi - lo);
    rep.max_count = std::max(rep.max_count, count);
    rep.min_count = std::min(rep.min_count, count);
    ++rep.windows;
  }
  rep.ratio = rep.min_count == 0 ? std::numeric_limits<double>::infinity()
                                 : static_cast<double>(rep.max_count) / static_cast<double>(rep.min_count);
  return rep;
}

inline double uniform_set_check(const std::vector<double>& taus, double l) { return uniformity_report(taus, l).ratio; }

struct CompactExtraction {
  std::vector<std::size_t> indices;
  ExponentialSum limit;
  std::vector<double> successive_distances;
  std::vector<std::vector<double>> phases;  // witness of fs[i] relative to fs[0]
  std::size_t refinements = 0;
};

/// Greedy torus-cell refinement on the witnesses of fs[i] relative to fs[0]:
/// halve the current cell along every basis direction and keep the most
/// populated half-cell until successive members are within tol in B^2.
inline CompactExtraction extract_convergent_subsequence(const std::vector<ExponentialSum>& fs, double tol) {
  if (fs.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two sums");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  CompactExtraction out;
  std::size_t m = 0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    Verdict v;
    try {
      v = detail::check_equivalent(fs[0], fs[i], BasisChoice::Integral);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotEquivalentInput || e.code() == ErrorCode::SpectrumMismatch)
        throw Error(ErrorCode::NotEquivalentFamily, "member " + std::to_string(i) + " is not equivalent to member 0");
      throw;
    }
    if (!v.equivalent() || v.witnesses.empty())
      throw Error(ErrorCode::NotEquivalentFamily, "member " + std::to_string(i) + " has no witness");
    auto x = v.witnesses.front().approx();
    for (auto& c : x) c = wrap_turns(c);
    m = x.size();
    out.phases.push_back(std::move(x));
  }
  std::vector<std::size_t> members(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) members[i] = i;
  std::vector<double> lo(m, 0.0);
  double side = 1.0;
  auto distances = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> d;
    for (std::size_t i = 1; i < idx.size(); ++i) d.push_back(b2_distance_exact(fs[idx[i - 1]], fs[idx[i]]).value);
    return d;
  };
  for (int depth = 0; depth < 60; ++depth) {
    const auto d = distances(members);
    const bool converged = std::all_of(d.begin(), d.end(), [&](double v) { return v < tol; });
    if (converged || members.size() <= 1 || m == 0) break;
    side /= 2.0;
    const std::size_t cells = std::size_t{1} << m;
    std::vector<std::vector<std::size_t>> buckets(cells);
    for (auto i : members) {
      std::size_t code = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (out.phases[i][k] >= lo[k] + side) code |= std::size_t{1} << k;
      buckets[code].push_back(i);
    }
    std::size_t pick = 0;
    for (std::size_t c = 1; c < cells; ++c)
      if (buckets[c].size() > buckets[pick].size()) pick = c;
    for (std::size_t k = 0; k < m; ++k)
      if (pick & (std::size_t{1} << k)) lo[k] += side;
    members = buckets[pick];
    ++out.refinements;
  }
  out.indices = members;
  out.successive_distances = distances(members);
  out.limit = fs[members.back()];
  return out;
}

}  // namespace aptk
