#pragma once

// Exponential sums over a fixed ordered frequency set, and the exact decision
// of Bohr equivalence between two of them.
//
// Phases are measured in turns (1 turn = 2*pi radians) and kept in [0, 1).
// Two sums a, b over the same frequencies are equivalent when for every
// prefix n there is a real vector x with
//
//     phase(b_j) - phase(a_j) = <r_j, x>  (mod 1),   |a_j| = |b_j|,   j <= n,
//
// r_j being the coordinates of the j-th frequency over a basis of the rational
// span. With rational phase differences this is an integer lattice problem:
// R x = theta + k has a solution for some k in Z^n exactly when u . theta is
// an integer for every integer left-kernel vector u of R.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aptk/error.hpp"
#include "aptk/exact.hpp"
#include "aptk/freq.hpp"

namespace aptk {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// x mod 1 in [0, 1) for doubles.
inline double wrap_turns(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

/// Distance from v to the nearest integer.
inline double distance_to_integer(double v) { return std::abs(v - std::nearbyint(v)); }

struct PhaseTurns {
  std::optional<Rational> exact;
  double approx = 0.0;

  static PhaseTurns from_rational(const Rational& q) {
    PhaseTurns p;
    p.exact = frac(q);
    p.approx = wrap_turns(p.exact->get_d());
    return p;
  }
  static PhaseTurns from_double(double v) {
    PhaseTurns p;
    p.approx = wrap_turns(v);
    return p;
  }

  bool is_exact() const noexcept { return exact.has_value(); }

  friend bool operator==(const PhaseTurns& a, const PhaseTurns& b) {
    return a.exact == b.exact && a.approx == b.approx;
  }
};

struct Coefficient {
  double modulus = 0.0;
  PhaseTurns phase;

  Coefficient() = default;
  Coefficient(double mod, PhaseTurns ph) : modulus(mod), phase(std::move(ph)) {
    if (!(modulus >= 0.0)) throw Error(ErrorCode::NegativeModulus, "modulus must be nonnegative");
    if (modulus == 0.0) phase = PhaseTurns::from_rational(0);
  }
  Coefficient(double mod, const Rational& turns) : Coefficient(mod, PhaseTurns::from_rational(turns)) {}

  static Coefficient from_complex(std::complex<double> z) {
    const double arg = std::arg(z) / kTwoPi;
    return {std::abs(z), PhaseTurns::from_double(arg)};
  }

  std::complex<double> value() const { return std::polar(modulus, kTwoPi * phase.approx); }

  friend bool operator==(const Coefficient& a, const Coefficient& b) {
    return a.modulus == b.modulus && a.phase == b.phase;
  }
};

/// Stored prefix of a (possibly infinite) exponential sum plus the energy
/// sum_{j > stored} |a_j|^2 of the part that is not stored.
struct ExponentialSum {
  FrequencySet spectrum;
  std::vector<Coefficient> coeffs;
  double tail_energy = 0.0;

  ExponentialSum() = default;
  ExponentialSum(FrequencySet s, std::vector<Coefficient> c, double tail = 0.0)
      : spectrum(std::move(s)), coeffs(std::move(c)), tail_energy(tail) {
    if (spectrum.size() != coeffs.size())
      throw Error(ErrorCode::InvalidArgument, "coefficient count does not match frequency count");
    if (!(tail_energy >= 0.0) || !std::isfinite(tail_energy))
      throw Error(ErrorCode::InvalidArgument, "tail energy must be finite and nonnegative");
  }

  std::size_t size() const noexcept { return coeffs.size(); }
  bool is_polynomial() const noexcept { return tail_energy == 0.0; }

  bool exact_phases() const {
    for (const auto& c : coeffs)
      if (c.modulus != 0.0 && !c.phase.is_exact()) return false;
    return true;
  }

  /// First n terms; the dropped stored terms move into the tail energy.
  ExponentialSum prefix(std::size_t n) const {
    double tail = tail_energy;
    for (std::size_t j = n; j < coeffs.size(); ++j) tail += coeffs[j].modulus * coeffs[j].modulus;
    return {spectrum.prefix(n),
            std::vector<Coefficient>(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n)), tail};
  }

  friend bool operator==(const ExponentialSum& a, const ExponentialSum& b) {
    return a.spectrum == b.spectrum && a.coeffs == b.coeffs && a.tail_energy == b.tail_energy;
  }

  std::complex<double> operator()(double t, const AtomTable& atoms) const {
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      s += coeffs[j].value() * std::polar(1.0, eval_numeric(spectrum[j], atoms) * t);
    return s;
  }
};

/// Phase vector x over a basis, certifying the phase identities of the first
/// prefix_n frequencies. For integral bases x lies in [0, 1)^m; otherwise it
/// is the canonical representative of its class modulo the period lattice
/// {y : R y in Z^n}.
struct Witness {
  std::vector<Rational> x;
  std::size_t prefix_n = 0;

  std::vector<double> approx() const {
    std::vector<double> out;
    for (const auto& v : x) out.push_back(v.get_d());
    return out;
  }
};

struct Obstruction {
  enum class Kind { Modulus, Relation };
  Kind kind = Kind::Relation;
  std::size_t index = 0;            // frequency index for Modulus, prefix length for Relation
  std::vector<Integer> relation;    // u with u . R = 0 over the frequency rows
  Rational value;                   // u . theta (not an integer)
  double distance = 0.0;            // distance of u . theta to Z
};

struct Verdict {
  enum class Kind { Equivalent, NotEquivalent, Undecidable };
  Kind kind = Kind::NotEquivalent;
  std::vector<Witness> witnesses;
  std::optional<Obstruction> obstruction;
  std::string reason;
  double residual = 0.0;
  BasisInfo basis;

  bool equivalent() const noexcept { return kind == Kind::Equivalent; }
};

inline std::string_view to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Equivalent: return "equivalent";
    case Verdict::Kind::NotEquivalent: return "not_equivalent";
    case Verdict::Kind::Undecidable: return "undecidable";
  }
  return "unknown";
}

enum class DecisionMode { Exact, Tolerance };
enum class BasisChoice { Natural, Integral };

struct EquivalenceOptions {
  DecisionMode mode = DecisionMode::Exact;
  double eps_phase = 1e-9;
  long max_denominator = 1'000'000;
  BasisChoice basis = BasisChoice::Natural;
};

/// Closest rational to q with denominator at most max_den (Stern-Brocot /
/// continued fraction convergents and semiconvergents).
inline Rational limit_denominator(const Rational& q, const Integer& max_den) {
  if (q.get_den() <= max_den) return q;
  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Integer n = q.get_num(), d = q.get_den();
  while (true) {
    Integer a = floor_div(n, d);
    Integer q2 = q0 + a * q1;
    if (q2 > max_den) break;
    Integer np = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = np;
    q1 = q2;
    Integer nd = n - a * d;
    n = d;
    d = nd;
    if (d == 0) break;
  }
  Integer k = floor_div(max_den - q0, q1);
  Rational b1(p0 + k * p1, q0 + k * q1);
  Rational b2(p1, q1);
  b1.canonicalize();
  b2.canonicalize();
  Rational e1 = abs(b2 - q);
  Rational e2 = abs(b1 - q);
  return e1 <= e2 ? b2 : b1;
}

namespace detail {

struct CongruenceSolution {
  bool solvable = false;
  std::vector<Rational> x;
  std::vector<Integer> relation;  // over the selected rows
  Rational relation_value;
};

inline RationalMatrix inverse(const RationalMatrix& a) {
  const std::size_t n = a.rows();
  RationalMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  const auto piv = rref(aug);
  if (piv.size() < n || piv[n - 1] != n - 1) throw Error(ErrorCode::InvalidArgument, "singular matrix");
  RationalMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

/// Moves x to the lexicographically smallest point of x + L inside the
/// fundamental box of the period lattice L = {y : A y in Z^rows}.
inline void canonicalize(const RationalMatrix& a, std::vector<Rational>& x) {
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    bool used = false;
    for (std::size_t j = 0; j < a.rows() && !used; ++j) used = a(j, k) != 0;
    if (used)
      active.push_back(k);
    else
      x[k] = 0;
  }
  if (active.empty()) return;
  const RationalMatrix sub = a.select_cols(active);
  const std::size_t m = active.size();
  if (rank(sub) < m) return;
  const auto scaled = scale_to_integer(sub);
  const auto h = hnf(scaled.m);
  RationalMatrix top(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) top(i, j) = Rational(h.h(i, j));
  // the columns of c * top^{-1} generate L
  RationalMatrix gen = inverse(top);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) gen(i, j) *= scaled.scale;
  const auto period = scale_to_integer(gen.transpose());
  const auto lattice = hnf(period.m);
  std::vector<Rational> y(m);
  for (std::size_t k = 0; k < m; ++k) y[k] = x[active[k]];
  for (std::size_t k = 0; k < m; ++k) {
    Rational step(lattice.h(k, k), period.scale);
    step.canonicalize();
    Rational ratio = y[k] / step;
    Integer t = floor(ratio);
    if (t == 0) continue;
    for (std::size_t l = k; l < m; ++l) {
      Rational v(lattice.h(k, l), period.scale);
      v.canonicalize();
      y[l] -= Rational(t) * v;
    }
  }
  for (std::size_t k = 0; k < m; ++k) x[active[k]] = y[k];
}

/// Solves R x = theta (mod 1) over the selected rows.
inline CongruenceSolution solve_congruence(const RationalMatrix& r, const std::vector<std::size_t>& rows,
                                           const std::vector<Rational>& theta) {
  CongruenceSolution out;
  if (rows.empty()) {
    out.solvable = true;
    out.x.assign(r.cols(), Rational(0));
    return out;
  }
  const RationalMatrix sub = r.select_rows(rows);
  std::vector<Rational> th;
  for (auto j : rows) th.push_back(theta[j]);
  const IntegerMatrix u = left_kernel_basis(sub);
  std::vector<Integer> target(u.rows());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    Rational v = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) v += Rational(u(i, t)) * th[t];
    if (!is_integer(v)) {
      out.relation = u.row_vector(i);
      out.relation_value = v;
      return out;
    }
    target[i] = -v.get_num();
  }
  const auto k = lattice_membership(u, target);
  if (!k) throw Error(ErrorCode::InvalidArgument, "left kernel basis is not saturated");
  std::vector<Rational> rhs(th);
  for (std::size_t t = 0; t < rhs.size(); ++t) rhs[t] += Rational((*k)[t]);
  auto x = solve_rational(sub, rhs);
  if (!x) throw Error(ErrorCode::InvalidArgument, "congruence system inconsistent after lattice shift");
  if (sub.cols() == 0) x->clear();
  canonicalize(sub, *x);
  out.solvable = true;
  out.x = std::move(*x);
  return out;
}

inline Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double dot(std::span<const Rational> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].get_d() * b[i];
  return s;
}

inline BasisInfo choose_basis(const FrequencySet& s, BasisChoice choice) {
  BasisInfo b = natural_basis(s);
  return choice == BasisChoice::Integral ? integralize(b) : b;
}

}  // namespace detail

/// True when the witness re-substitutes to every phase identity exactly.
inline bool check_witness(const ExponentialSum& a, const ExponentialSum& b, const BasisInfo& basis,
                          const Witness& w) {
  for (std::size_t j = 0; j < w.prefix_n; ++j) {
    if (a.coeffs[j].modulus != b.coeffs[j].modulus) return false;
    if (a.coeffs[j].modulus == 0.0) continue;
    if (!a.coeffs[j].phase.is_exact() || !b.coeffs[j].phase.is_exact()) return false;
    const Rational theta = *b.coeffs[j].phase.exact - *a.coeffs[j].phase.exact;
    const auto r = basis.coords(j);
    if (!is_integer(detail::dot(r, w.x) - theta)) return false;
  }
  return true;
}

inline Verdict decide_equivalence(const ExponentialSum& a, const ExponentialSum& b,
                                  const EquivalenceOptions& opts = {}) {
  if (!(a.spectrum == b.spectrum)) throw Error(ErrorCode::SpectrumMismatch, "sums have different frequency sets");
  const std::size_t n = a.size();
  Verdict v;
  if (n == 0) {
    v.kind = Verdict::Kind::Equivalent;
    return v;
  }
  v.basis = detail::choose_basis(a.spectrum, opts.basis);
  for (std::size_t j = 0; j < n; ++j) {
    if (a.coeffs[j].modulus != b.coeffs[j].modulus) {
      v.kind = Verdict::Kind::NotEquivalent;
      v.obstruction = Obstruction{Obstruction::Kind::Modulus, j, {}, Rational(0), 0.0};
      v.reason = "modulus mismatch at frequency " + std::to_string(j);
      return v;
    }
  }
  const bool tolerance = opts.mode == DecisionMode::Tolerance;
  std::vector<Rational> theta(n);
  std::vector<double> theta_d(n);
  std::vector<std::size_t> active;
  const Integer max_den(opts.max_denominator);
  for (std::size_t j = 0; j < n; ++j) {
    if (a.coeffs[j].modulus == 0.0) continue;
    active.push_back(j);
    const auto& pa = a.coeffs[j].phase;
    const auto& pb = b.coeffs[j].phase;
    if (pa.is_exact() && pb.is_exact()) {
      theta[j] = frac(*pb.exact - *pa.exact);
      theta_d[j] = wrap_turns(theta[j].get_d());
      continue;
    }
    if (!tolerance)
      throw Error(ErrorCode::NonExactPhases, "frequency " + std::to_string(j) + " has an approximate phase");
    theta_d[j] = wrap_turns(pb.approx - pa.approx);
    theta[j] = frac(limit_denominator(Rational(theta_d[j]), max_den));
  }

  std::vector<std::size_t> prefixes;
  if (v.basis.is_integral)
    prefixes.push_back(n);
  else
    for (std::size_t p = 1; p <= n; ++p) prefixes.push_back(p);

  for (std::size_t p : prefixes) {
    std::vector<std::size_t> rows;
    for (auto j : active)
      if (j < p) rows.push_back(j);
    const auto sol = detail::solve_congruence(v.basis.coord_matrix, rows, theta);
    if (!sol.solvable) {
      Obstruction ob;
      ob.kind = Obstruction::Kind::Relation;
      ob.index = p;
      ob.relation.assign(n, Integer(0));
      double ud = 0.0, norm1 = 0.0;
      for (std::size_t t = 0; t < rows.size(); ++t) {
        ob.relation[rows[t]] = sol.relation[t];
        ud += sol.relation[t].get_d() * theta_d[rows[t]];
        norm1 += std::abs(sol.relation[t].get_d());
      }
      ob.value = sol.relation_value;
      ob.distance = tolerance ? distance_to_integer(ud) : distance_to_integer(sol.relation_value.get_d());
      v.witnesses.clear();
      v.obstruction = ob;
      v.residual = ob.distance;
      if (tolerance && ob.distance <= opts.eps_phase * norm1) {
        v.kind = Verdict::Kind::Undecidable;
        v.reason = "integer relation misses an integer by less than eps_phase";
      } else {
        v.kind = Verdict::Kind::NotEquivalent;
        v.reason = "integer relation u with u.theta not an integer";
      }
      return v;
    }
    v.witnesses.push_back(Witness{sol.x, p});
  }

  double residual = 0.0;
  for (const auto& w : v.witnesses) {
    const auto xd = w.approx();
    for (auto j : active) {
      if (j >= w.prefix_n) continue;
      const auto r = v.basis.coords(j);
      residual = std::max(residual, distance_to_integer(detail::dot(r, xd) - theta_d[j]));
    }
  }
  v.residual = tolerance ? residual : 0.0;
  if (tolerance && residual > opts.eps_phase) {
    v.kind = Verdict::Kind::Undecidable;
    v.reason = "rationalized phases leave a residual above eps_phase";
  } else {
    v.kind = Verdict::Kind::Equivalent;
  }
  return v;
}

/// x0 in [0,1)^m over the natural basis together with integer shift vectors
/// p_j such that phase(b_j) - phase(a_j) = <r_j, x0 + p_j> (mod 1) for all j.
struct NaturalWitness {
  Witness x0;
  std::vector<std::vector<Integer>> shifts;
  BasisInfo basis;
};

inline NaturalWitness witness_natural_form(const ExponentialSum& a, const ExponentialSum& b) {
  const Verdict v = decide_equivalence(a, b);
  if (!v.equivalent()) throw Error(ErrorCode::NotEquivalentInput, "sums are not equivalent: " + v.reason);
  NaturalWitness out;
  out.basis = v.basis;
  const std::size_t n = a.size();
  const std::size_t m = v.basis.rank();
  std::vector<Rational> x = v.witnesses.empty() ? std::vector<Rational>(m) : v.witnesses.back().x;
  std::vector<Integer> whole(m);
  out.x0.x.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    whole[k] = floor(x[k]);
    out.x0.x[k] = frac(x[k]);
  }
  out.x0.prefix_n = n;
  std::vector<bool> member(n, false);
  for (auto j : v.basis.member_rows) member[j] = true;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Integer> p(m);
    if (!member[j] && a.coeffs[j].modulus != 0.0)
      for (std::size_t k = 0; k < m; ++k)
        if (v.basis.coord_matrix(j, k) != 0) p[k] = whole[k];
    out.shifts.push_back(std::move(p));
  }
  return out;
}

/// Exact check of the natural-form identities.
inline bool check_natural_form(const ExponentialSum& a, const ExponentialSum& b, const NaturalWitness& w) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a.coeffs[j].modulus != b.coeffs[j].modulus) return false;
    if (a.coeffs[j].modulus == 0.0) continue;
    const Rational theta = *b.coeffs[j].phase.exact - *a.coeffs[j].phase.exact;
    Rational s = 0;
    for (std::size_t k = 0; k < w.basis.rank(); ++k)
      s += w.basis.coord_matrix(j, k) * (w.x0.x[k] + Rational(w.shifts[j][k]));
    if (!is_integer(s - theta)) return false;
  }
  return true;
}

/// f(t + tau): every coefficient picks up the factor e^{i lambda_j tau}.
inline ExponentialSum translate(const ExponentialSum& f, double tau, const AtomTable& atoms) {
  if (!std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "translation must be finite");
  if (tau == 0.0) return f;
  ExponentialSum g = f;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double lambda = eval_numeric(f.spectrum[j], atoms);
    if (f.coeffs[j].modulus == 0.0) continue;
    const double turns = f.coeffs[j].phase.approx + lambda * tau / kTwoPi;
    g.coeffs[j] = Coefficient(f.coeffs[j].modulus, PhaseTurns::from_double(turns));
  }
  return g;
}

/// g with phase(g_j) = phase(f_j) + <r_j, x> (mod 1); equivalent to f.
inline ExponentialSum rotate(const ExponentialSum& f, const BasisInfo& basis, std::span<const Rational> x) {
  ExponentialSum g = f;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (f.coeffs[j].modulus == 0.0) continue;
    const auto r = basis.coords(j);
    const Rational shift = detail::dot(r, x);
    const auto& ph = f.coeffs[j].phase;
    g.coeffs[j] = ph.is_exact() ? Coefficient(f.coeffs[j].modulus, *ph.exact + shift)
                                : Coefficient(f.coeffs[j].modulus, PhaseTurns::from_double(ph.approx + shift.get_d()));
  }
  return g;
}

struct EquivalentSample {
  ExponentialSum sum;
  std::vector<Rational> x;
  BasisInfo basis;
};

/// Draws x uniformly from the grid 2^-16 Z^m in [0,1)^m over the integral
/// basis and rotates f by it.
inline EquivalentSample sample_equivalent_with_witness(const ExponentialSum& f, std::uint64_t seed) {
  EquivalentSample out;
  out.basis = integralize(natural_basis(f.spectrum));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> dist(0, 65535);
  for (std::size_t k = 0; k < out.basis.rank(); ++k) {
    Rational q(Integer(dist(rng)), Integer(65536));
    q.canonicalize();
    out.x.push_back(q);
  }
  out.sum = rotate(f, out.basis, out.x);
  return out;
}

inline ExponentialSum sample_equivalent(const ExponentialSum& f, std::uint64_t seed) {
  return sample_equivalent_with_witness(f, seed).sum;
}

/// D(tau) = sum_j |a_j e^{i lambda_j tau} - b_j| over the first n terms,
/// with the frequencies evaluated once up front.
class DeviationFunction {
 public:
  DeviationFunction(const ExponentialSum& a, const ExponentialSum& b, const AtomTable& atoms,
                    std::optional<std::size_t> n = std::nullopt) {
    if (!(a.spectrum == b.spectrum)) throw Error(ErrorCode::SpectrumMismatch, "sums have different frequency sets");
    const std::size_t count = n ? std::min(*n, a.size()) : a.size();
    for (std::size_t j = 0; j < count; ++j) {
      lambda_.push_back(eval_numeric(a.spectrum[j], atoms));
      a_.push_back(a.coeffs[j].value());
      b_.push_back(b.coeffs[j].value());
      sum_moduli_ += a.coeffs[j].modulus;
      lipschitz_ += a.coeffs[j].modulus * std::abs(lambda_.back());
      lambda_max_ = std::max(lambda_max_, std::abs(lambda_.back()));
      bound_ += a.coeffs[j].modulus + b.coeffs[j].modulus;
    }
  }

  double operator()(double tau) const {
    double s = 0.0;
    for (std::size_t j = 0; j < a_.size(); ++j) s += std::abs(a_[j] * std::polar(1.0, lambda_[j] * tau) - b_[j]);
    return s;
  }

  std::size_t size() const noexcept { return a_.size(); }
  double sum_moduli() const noexcept { return sum_moduli_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double lambda_max() const noexcept { return lambda_max_; }
  double triangle_bound() const noexcept { return bound_; }

 private:
  std::vector<double> lambda_;
  std::vector<std::complex<double>> a_;
  std::vector<std::complex<double>> b_;
  double sum_moduli_ = 0.0;
  double lipschitz_ = 0.0;
  double lambda_max_ = 0.0;
  double bound_ = 0.0;
};

inline double deviation(const ExponentialSum& a, const ExponentialSum& b, const AtomTable& atoms, double tau) {
  return DeviationFunction(a, b, atoms)(tau);
}

}  // namespace aptk
