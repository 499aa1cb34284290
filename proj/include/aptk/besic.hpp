#pragma once

// Mean values, Fourier coefficients and B^2 distances.
//
// For exponential sums everything follows from orthogonality,
// M(e^{i lambda t}) = [lambda == 0], so these are computed from coefficients.
// mean_value_estimate is the numeric counterpart for arbitrary sampled signals:
// trapezoid rule for (2l)^{-1} int_{-l}^{l} s(t) e^{-i lambda t} dt with step
// min(0.01, 0.1 / lambda_max), lambda_max the largest of |lambda| and the
// declared signal bandwidth.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "aptk/error.hpp"
#include "aptk/freq.hpp"
#include "aptk/sums.hpp"

namespace aptk {

inline void require_polynomial(const ExponentialSum& f) {
  if (!f.is_polynomial()) throw Error(ErrorCode::TailPresent, "operation requires a trigonometric polynomial");
}

inline std::complex<double> mean_value_exact(const ExponentialSum& f) {
  require_polynomial(f);
  for (std::size_t j = 0; j < f.size(); ++j)
    if (f.spectrum[j].is_zero()) return f.coeffs[j].value();
  return 0.0;
}

/// a(f, lambda) = M(f(t) e^{-i lambda t}).
inline std::complex<double> fourier_coefficient(const ExponentialSum& f, const Frequency& lambda) {
  if (auto j = f.spectrum.index_of(lambda)) return f.coeffs[*j].value();
  return 0.0;
}

inline double parseval_energy(const ExponentialSum& f) {
  double s = 0.0;
  for (const auto& c : f.coeffs) s += c.modulus * c.modulus;
  return s + f.tail_energy;
}

struct B2Distance {
  double value = 0.0;
  bool upper_bound = false;  // set when either input carries tail energy
};

/// sqrt(limsup (2l)^{-1} int |f - g|^2) by Parseval over the union spectrum.
/// Unstored tails are combined by the worst case: the tail difference has norm
/// at most sqrt(tail_f) + sqrt(tail_g).
inline B2Distance b2_distance_exact(const ExponentialSum& f, const ExponentialSum& g) {
  if (f.spectrum.atom_count() != g.spectrum.atom_count() && !f.spectrum.empty() && !g.spectrum.empty())
    throw Error(ErrorCode::SpectrumMismatch, "sums are over different atom tables");
  double sq = 0.0;
  std::vector<bool> seen(g.size(), false);
  for (std::size_t j = 0; j < f.size(); ++j) {
    std::complex<double> other = 0.0;
    if (auto k = g.spectrum.index_of(f.spectrum[j])) {
      other = g.coeffs[*k].value();
      seen[*k] = true;
    }
    sq += std::norm(f.coeffs[j].value() - other);
  }
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!seen[k]) sq += g.coeffs[k].modulus * g.coeffs[k].modulus;
  B2Distance d;
  if (f.tail_energy > 0.0 || g.tail_energy > 0.0) {
    const double tail = std::sqrt(f.tail_energy) + std::sqrt(g.tail_energy);
    sq += tail * tail;
    d.upper_bound = true;
  }
  d.value = std::sqrt(sq);
  return d;
}

/// Numeric evaluation of a sum with the frequencies resolved once.
class SumEvaluator {
 public:
  SumEvaluator(const ExponentialSum& f, const AtomTable& atoms) {
    for (std::size_t j = 0; j < f.size(); ++j) {
      lambda_.push_back(eval_numeric(f.spectrum[j], atoms));
      coeff_.push_back(f.coeffs[j].value());
      bandwidth_ = std::max(bandwidth_, std::abs(lambda_.back()));
    }
  }

  std::complex<double> operator()(double t) const {
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < coeff_.size(); ++j) s += coeff_[j] * std::polar(1.0, lambda_[j] * t);
    return s;
  }

  double bandwidth() const noexcept { return bandwidth_; }

 private:
  std::vector<double> lambda_;
  std::vector<std::complex<double>> coeff_;
  double bandwidth_ = 0.0;
};

struct MeanEstimate {
  std::complex<double> value;
  std::vector<double> half_lengths;
  std::vector<std::complex<double>> estimates;
  std::vector<double> residuals;  // |M_{l_k} - M_{l_{k+1}}|
};

using Signal = std::function<std::complex<double>(double)>;

inline double quadrature_step(double lambda, double bandwidth) {
  const double lmax = std::max(std::abs(lambda), bandwidth);
  return lmax > 0.0 ? std::min(0.01, 0.1 / lmax) : 0.01;
}

inline std::complex<double> windowed_mean(const Signal& signal, double lambda, double l, double bandwidth) {
  const double h0 = quadrature_step(lambda, bandwidth);
  const auto steps = static_cast<long long>(std::ceil(2.0 * l / h0));
  const double h = 2.0 * l / static_cast<double>(steps);
  std::complex<double> acc = 0.0;
  for (long long i = 0; i <= steps; ++i) {
    const double t = -l + h * static_cast<double>(i);
    std::complex<double> v;
    try {
      v = signal(t) * std::polar(1.0, -lambda * t);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EvaluationFailure, std::string("signal evaluation failed: ") + e.what());
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorCode::EvaluationFailure, "signal is not finite at t = " + std::to_string(t));
    acc += (i == 0 || i == steps) ? 0.5 * v : v;
  }
  return acc * h / (2.0 * l);
}

inline MeanEstimate mean_value_estimate(const Signal& signal, double lambda, const std::vector<double>& schedule,
                                        double bandwidth = 0.0) {
  if (schedule.empty()) throw Error(ErrorCode::InvalidArgument, "empty half-length schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "half-lengths must be positive");
    if (i && !(schedule[i] > schedule[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "half-length schedule must be strictly increasing");
  }
  MeanEstimate est;
  for (double l : schedule) {
    est.half_lengths.push_back(l);
    est.estimates.push_back(windowed_mean(signal, lambda, l, bandwidth));
  }
  for (std::size_t i = 1; i < est.estimates.size(); ++i)
    est.residuals.push_back(std::abs(est.estimates[i] - est.estimates[i - 1]));
  est.value = est.estimates.back();
  return est;
}

inline MeanEstimate mean_value_estimate(const Signal& signal, const Frequency& lambda, const AtomTable& atoms,
                                        const std::vector<double>& schedule, double bandwidth = 0.0) {
  return mean_value_estimate(signal, eval_numeric(lambda, atoms), schedule, bandwidth);
}

inline MeanEstimate mean_value_estimate(const ExponentialSum& f, const Frequency& lambda, const AtomTable& atoms,
                                        const std::vector<double>& schedule) {
  const SumEvaluator eval(f, atoms);
  return mean_value_estimate(Signal(eval), eval_numeric(lambda, atoms), schedule, eval.bandwidth());
}

}  // namespace aptk
