#pragma once

// Bochner-Fejer damping of exponential sums.
//
// Over an integral basis every frequency has integer coordinates h. With one
// Fejer order N_i per basis element the damping factor is
//
//     p(h) = prod_i max(0, 1 - |h_i| / (N_i + 1)),
//
// the coefficient of e^{i<h, s>} in the product of one-dimensional Fejer
// kernels. It depends on frequency coordinates only, vanishes outside the box
// |h_i| <= N_i, and tends to 1 for every fixed h as the orders grow.

#include <cmath>
#include <vector>

#include "aptk/error.hpp"
#include "aptk/exact.hpp"
#include "aptk/freq.hpp"
#include "aptk/sums.hpp"

namespace aptk {

struct FejerScheme {
  BasisInfo basis;
  std::vector<long> orders;
  std::vector<Rational> factors;  // one per row of basis.coord_matrix

  std::size_t nonzero_count() const {
    std::size_t c = 0;
    for (const auto& p : factors)
      if (p != 0) ++c;
    return c;
  }
};

inline Rational fejer_factor(std::span<const Integer> h, std::span<const long> orders) {
  if (h.size() != orders.size()) throw Error(ErrorCode::InvalidArgument, "coordinate/order count mismatch");
  Rational p = 1;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Integer mag = abs(h[i]);
    const Integer denom(orders[i] + 1);
    if (mag >= denom) return 0;
    Rational f(denom - mag, denom);
    f.canonicalize();
    p *= f;
  }
  return p;
}

inline FejerScheme fejer_factors(const BasisInfo& basis, const std::vector<long>& orders) {
  if (!basis.is_integral) throw Error(ErrorCode::NonIntegralBasis, "fejer_factors needs an integral basis");
  if (orders.size() != basis.rank())
    throw Error(ErrorCode::InvalidArgument, "need one order per basis element");
  for (long n : orders)
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "Fejer orders must be at least 1");
  FejerScheme s{basis, orders, {}};
  for (std::size_t j = 0; j < basis.frequency_count(); ++j) {
    const auto h = basis.integer_coords(j);
    s.factors.push_back(fejer_factor(h, orders));
  }
  return s;
}

namespace detail {

inline Rational scheme_factor(const FejerScheme& s, const Frequency& f) {
  auto c = expand(s.basis.basis, f);
  if (!c) throw Error(ErrorCode::SpanMismatch, "frequency " + to_string(f) + " is outside the scheme's span");
  std::vector<Integer> h;
  for (const auto& v : *c) {
    if (!is_integer(v))
      throw Error(ErrorCode::SpanMismatch, "frequency " + to_string(f) + " has non-integral coordinates");
    h.push_back(v.get_num());
  }
  return fejer_factor(h, s.orders);
}

}  // namespace detail

/// sum_j p_j a_j e^{i lambda_j t}; the stored spectrum is kept, tail dropped.
inline ExponentialSum approximant(const ExponentialSum& f, const FejerScheme& s) {
  std::vector<Coefficient> coeffs;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const Rational p = detail::scheme_factor(s, f.spectrum[j]);
    coeffs.emplace_back(f.coeffs[j].modulus * p.get_d(), f.coeffs[j].phase);
  }
  return {f.spectrum, std::move(coeffs), 0.0};
}

/// sqrt(sum_j |a_j|^2 (1 - p_j)^2 + tail).
inline double approximation_error(const ExponentialSum& f, const FejerScheme& s) {
  double sq = f.tail_energy;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double p = detail::scheme_factor(s, f.spectrum[j]).get_d();
    const double d = f.coeffs[j].modulus * (1.0 - p);
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace aptk
