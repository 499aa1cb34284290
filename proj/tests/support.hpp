#pragma once

// Builders and brute-force oracles shared by the unit tests and the
// acceptance runner. The oracles avoid the library's exact-arithmetic paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "aptk/aptk.hpp"

namespace aptk::testing {

inline Frequency freq(std::initializer_list<const char*> coords) {
  std::vector<Rational> c;
  for (const char* s : coords) c.push_back(parse_rational(s));
  return Frequency(std::move(c));
}

inline Frequency ifreq(const std::vector<long>& coords) {
  std::vector<Rational> c;
  for (long v : coords) c.emplace_back(v);
  return Frequency(std::move(c));
}

inline AtomTable atoms(std::vector<std::string> names, std::vector<double> values = {}) {
  AtomTable t;
  t.names = std::move(names);
  for (double v : values) t.values.emplace_back(v);
  return t;
}

inline ExponentialSum make_sum(std::size_t dim, std::vector<Frequency> fs, const std::vector<double>& moduli,
                               const std::vector<Rational>& phases, double tail = 0.0) {
  std::vector<Coefficient> c;
  for (std::size_t j = 0; j < moduli.size(); ++j) c.emplace_back(moduli[j], phases[j]);
  return ExponentialSum(FrequencySet(dim, std::move(fs)), std::move(c), tail);
}

// ---- equivalence by exhaustive grid search ----

struct GridInstance {
  std::vector<std::vector<long>> freqs;  // integer coordinates over <= 2 atoms
  std::vector<long> mod_a, mod_b;        // positive integers
  std::vector<long> num_a, num_b;        // phases num/den in turns
  std::vector<long> den_a, den_b;
};

struct Frac {
  long long p = 0, q = 1;
};

inline Frac reduce(long long p, long long q) {
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const long long g = std::gcd(p < 0 ? -p : p, q);
  return {p / (g ? g : 1), q / (g ? g : 1)};
}

/// Greedy basis from the frequency list and coordinates by Cramer's rule.
inline std::vector<std::vector<Frac>> oracle_coordinates(const std::vector<std::vector<long>>& freqs,
                                                         std::size_t& rank) {
  std::vector<std::size_t> basis;
  for (std::size_t j = 0; j < freqs.size() && basis.size() < 2; ++j) {
    const auto& f = freqs[j];
    const bool zero = std::all_of(f.begin(), f.end(), [](long v) { return v == 0; });
    if (zero) continue;
    if (basis.empty()) {
      basis.push_back(j);
      continue;
    }
    if (f.size() < 2) continue;
    const auto& g = freqs[basis[0]];
    if (g[0] * f[1] - g[1] * f[0] != 0) basis.push_back(j);
  }
  rank = basis.size();
  std::vector<std::vector<Frac>> coords;
  for (const auto& f : freqs) {
    std::vector<Frac> c(rank);
    if (rank == 1) {
      const auto& g = freqs[basis[0]];
      std::size_t k = 0;
      while (g[k] == 0) ++k;
      c[0] = reduce(f[k], g[k]);
    } else if (rank == 2) {
      const auto& g = freqs[basis[0]];
      const auto& h = freqs[basis[1]];
      const long long det = g[0] * h[1] - g[1] * h[0];
      c[0] = reduce(f[0] * h[1] - f[1] * h[0], det);
      c[1] = reduce(g[0] * f[1] - g[1] * f[0], det);
    }
    coords.push_back(c);
  }
  return coords;
}

/// True iff some y on the grid (1/(8q)) Z^m in [0,1)^m over the integralized
/// basis satisfies every phase identity. Moduli must all be positive, which
/// pins each y_k to that grid whenever a solution exists.
inline bool grid_equivalence_oracle(const GridInstance& in) {
  for (std::size_t j = 0; j < in.freqs.size(); ++j)
    if (in.mod_a[j] != in.mod_b[j]) return false;
  std::size_t m = 0;
  const auto coords = oracle_coordinates(in.freqs, m);
  std::vector<long long> qk(m, 1);
  for (const auto& row : coords)
    for (std::size_t k = 0; k < m; ++k) qk[k] = std::lcm(qk[k], row[k].q);
  long long q = 1;
  for (auto v : qk) q = std::lcm(q, v);
  // integer coordinates over basis g_k / q_k
  std::vector<std::vector<long long>> n(coords.size(), std::vector<long long>(m));
  for (std::size_t j = 0; j < coords.size(); ++j)
    for (std::size_t k = 0; k < m; ++k) n[j][k] = coords[j][k].p * (qk[k] / coords[j][k].q);
  const long long step_den = 8 * q;
  const long long L = std::lcm(step_den, 840LL);
  std::vector<long long> target(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    // theta_j = phase_b - phase_a, scaled by L
    const long long tb = in.num_b[j] * (L / in.den_b[j]);
    const long long ta = in.num_a[j] * (L / in.den_a[j]);
    target[j] = ((tb - ta) % L + L) % L;
  }
  const long long unit = L / step_den;
  auto ok = [&](const std::vector<long long>& i) {
    for (std::size_t j = 0; j < coords.size(); ++j) {
      long long s = 0;
      for (std::size_t k = 0; k < m; ++k) s += n[j][k] * i[k] * unit;
      if ((((s - target[j]) % L) + L) % L != 0) return false;
    }
    return true;
  };
  std::vector<long long> i(m, 0);
  if (m == 0) return ok(i);
  if (m == 1) {
    for (i[0] = 0; i[0] < step_den; ++i[0])
      if (ok(i)) return true;
    return false;
  }
  for (i[0] = 0; i[0] < step_den; ++i[0])
    for (i[1] = 0; i[1] < step_den; ++i[1])
      if (ok(i)) return true;
  return false;
}

inline ExponentialSum grid_sum(const GridInstance& in, bool second) {
  std::vector<Frequency> fs;
  std::size_t dim = in.freqs.empty() ? 0 : in.freqs[0].size();
  std::vector<double> mods;
  std::vector<Rational> ph;
  for (std::size_t j = 0; j < in.freqs.size(); ++j) {
    fs.push_back(ifreq(in.freqs[j]));
    mods.push_back(static_cast<double>(second ? in.mod_b[j] : in.mod_a[j]));
    Rational p(Integer(second ? in.num_b[j] : in.num_a[j]), Integer(second ? in.den_b[j] : in.den_a[j]));
    p.canonicalize();
    ph.push_back(p);
  }
  return make_sum(dim, std::move(fs), mods, ph);
}

/// Random instance: <= 2 atoms, <= 6 distinct frequencies, |coordinates| <= 4,
/// phase denominators in {1, 2, 4, 8} so that the 1/(8q) grid is complete.
/// About half the pairs are built equivalent.
inline GridInstance random_grid_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_d(1, 2), count_d(1, 6), coord_d(-4, 4), log_den(0, 3), mod_d(1, 3), coin(0, 3);
  auto den_d = [&](std::mt19937_64& g) { return 1L << log_den(g); };
  GridInstance in;
  const int dim = dim_d(rng);
  const int count = count_d(rng);
  while (static_cast<int>(in.freqs.size()) < count) {
    std::vector<long> f(dim);
    for (auto& v : f) v = coord_d(rng);
    if (std::find(in.freqs.begin(), in.freqs.end(), f) == in.freqs.end()) in.freqs.push_back(f);
  }
  const bool build_equivalent = coin(rng) < 2;
  // one common phase denominator so that rotations stay within it
  const long common = den_d(rng);
  for (int j = 0; j < count; ++j) {
    in.mod_a.push_back(mod_d(rng));
    const long den = build_equivalent ? common : den_d(rng);
    in.den_a.push_back(den);
    in.num_a.push_back(std::uniform_int_distribution<long>(0, den - 1)(rng));
  }
  in.mod_b = in.mod_a;
  if (build_equivalent) {
    // b = a rotated by x in (1/common) Z^dim over the atoms themselves
    std::vector<long> x(dim);
    for (auto& v : x) v = std::uniform_int_distribution<long>(0, common - 1)(rng);
    for (int j = 0; j < count; ++j) {
      long s = 0;
      for (int k = 0; k < dim; ++k) s += in.freqs[j][k] * x[k];
      in.den_b.push_back(common);
      in.num_b.push_back(((in.num_a[j] + s) % common + common) % common);
    }
    if (coin(rng) == 0) {
      const auto j = std::uniform_int_distribution<int>(0, count - 1)(rng);
      in.num_b[j] = (in.num_b[j] + 1) % in.den_b[j];  // breaks one identity unless den is 1
    }
    if (coin(rng) == 0) {
      const auto j = std::uniform_int_distribution<int>(0, count - 1)(rng);
      in.mod_b[j] += 1;
    }
  } else {
    for (int j = 0; j < count; ++j) {
      const long den = den_d(rng);
      in.den_b.push_back(den);
      in.num_b.push_back(std::uniform_int_distribution<long>(0, den - 1)(rng));
    }
  }
  return in;
}

// ---- plain double evaluations ----

inline double deviation_oracle(const ExponentialSum& a, const ExponentialSum& b, const std::vector<double>& lambda,
                               double tau) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double ang_a = 2.0 * std::numbers::pi * a.coeffs[j].phase.approx + lambda[j] * tau;
    const double ang_b = 2.0 * std::numbers::pi * b.coeffs[j].phase.approx;
    const std::complex<double> za(a.coeffs[j].modulus * std::cos(ang_a), a.coeffs[j].modulus * std::sin(ang_a));
    const std::complex<double> zb(b.coeffs[j].modulus * std::cos(ang_b), b.coeffs[j].modulus * std::sin(ang_b));
    s += std::abs(za - zb);
  }
  return s;
}

/// (2 pi)^{-1} int_0^{2 pi} K_N(s) cos(h s) ds with K_N the closed-form Fejer
/// kernel, by a uniform rule with enough nodes to be exact on the integrand.
inline double fejer_kernel_oracle(long h, long n) {
  const long nodes = 8 * (std::abs(h) + n + 2);
  double acc = 0.0;
  for (long i = 0; i < nodes; ++i) {
    const double s = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(nodes);
    const double r = std::sin(0.5 * static_cast<double>(n + 1) * s) / std::sin(0.5 * s);
    acc += r * r / static_cast<double>(n + 1) * std::cos(static_cast<double>(h) * s);
  }
  return acc / static_cast<double>(nodes);
}

inline double energy_oracle(const ExponentialSum& f) {
  double s = 0.0;
  for (const auto& c : f.coeffs) s += c.modulus * c.modulus;
  return s;
}

/// Random polynomial over atoms {1, sqrt 2, sqrt 3} (first dim of them).
inline ExponentialSum random_polynomial(std::mt19937_64& rng, std::size_t dim, std::size_t count, long max_coord,
                                        bool unit_moduli = false) {
  std::uniform_int_distribution<long> coord(-max_coord, max_coord);
  std::uniform_int_distribution<long> den(1, 8);
  std::uniform_real_distribution<double> mod(0.2, 1.0);
  std::vector<Frequency> fs;
  std::vector<std::vector<long>> seen;
  while (fs.size() < count) {
    std::vector<long> c(dim);
    for (auto& v : c) v = coord(rng);
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
    if (std::all_of(c.begin(), c.end(), [](long v) { return v == 0; })) continue;
    seen.push_back(c);
    fs.push_back(ifreq(c));
  }
  std::vector<double> moduli;
  std::vector<Rational> phases;
  for (std::size_t j = 0; j < count; ++j) {
    moduli.push_back(unit_moduli ? 1.0 : mod(rng));
    const long q = den(rng);
    Rational p(Integer(std::uniform_int_distribution<long>(0, q - 1)(rng)), Integer(q));
    p.canonicalize();
    phases.push_back(p);
  }
  return make_sum(dim, std::move(fs), moduli, phases);
}

inline AtomTable standard_atoms(std::size_t dim) {
  const std::vector<std::string> names{"one", "sqrt2", "sqrt3"};
  const std::vector<double> values{1.0, std::sqrt(2.0), std::sqrt(3.0)};
  AtomTable t;
  for (std::size_t k = 0; k < dim; ++k) {
    t.names.push_back(names[k]);
    t.values.emplace_back(values[k]);
  }
  return t;
}

}  // namespace aptk::testing
