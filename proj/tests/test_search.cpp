#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace aptk;
using namespace aptk::testing;

namespace {

constexpr double kPi = std::numbers::pi;

const AtomTable kOne = atoms({"one"}, {1.0});
const AtomTable kOneSqrt2 = atoms({"one", "sqrt2"}, {1.0, std::sqrt(2.0)});

ExponentialSum eit(const Rational& phase = 0) { return make_sum(1, {freq({"1"})}, {1.0}, {phase}); }

ExponentialSum two_tone(const std::vector<Rational>& phases) {
  return make_sum(2, {freq({"1", "0"}), freq({"0", "1"})}, {1.0, 1.0}, phases);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(FindTau, QuarterTurn) {
  const auto c = find_tau(eit(), eit(Rational(1, 4)), kOne, 0.0, 1e-3);
  EXPECT_TRUE(c.success);
  EXPECT_LT(c.deviation, 1e-3);
  EXPECT_NEAR(c.tau, kPi / 2, 1e-3);
  EXPECT_EQ(c.prefix_n, 1u);
  EXPECT_GT(c.evaluations, 0u);
}

TEST(FindTau, SelfReturnsPeriod) {
  const auto c = find_tau(eit(), eit(), kOne, 1.0, 1e-6);
  EXPECT_TRUE(c.success);
  EXPECT_NEAR(c.tau, 2 * kPi, 1e-5);
  EXPECT_GT(c.tau, 1.0);
}

TEST(FindTau, ApproximatePhases) {
  const auto a = two_tone({Rational(0), Rational(0)});
  std::vector<Coefficient> cb{{1.0, PhaseTurns::from_double(0.7 / (2 * kPi))},
                              {1.0, PhaseTurns::from_double(1.1 / (2 * kPi))}};
  const ExponentialSum b(a.spectrum, cb);
  const auto c = find_tau(a, b, kOneSqrt2, 0.0, 1e-2);
  EXPECT_TRUE(c.success);
  EXPECT_LT(DeviationFunction(a, b, kOneSqrt2)(c.tau), 1e-2);
}

TEST(FindTau, TranslateIsFoundNoLater) {
  std::mt19937_64 rng(51);
  const auto a = random_polynomial(rng, 2, 2, 2, true);
  const double tau_star = 2.5;
  const auto b = translate(a, tau_star, kOneSqrt2);
  const auto c = find_tau(a, b, kOneSqrt2, 0.0, 1e-6);
  EXPECT_TRUE(c.success);
  EXPECT_LT(c.deviation, 1e-6);
  EXPECT_LE(c.tau, tau_star + 1e-6);
}

TEST(FindTau, Restartable) {
  const auto a = two_tone({Rational(0), Rational(0)});
  const auto b = two_tone({Rational(1, 3), Rational(1, 5)});
  const auto first = find_tau(a, b, kOneSqrt2, 0.0, 0.05);
  const auto second = find_tau(a, b, kOneSqrt2, first.tau, 0.05);
  EXPECT_GT(second.tau, first.tau);
  EXPECT_LT(second.deviation, 0.05);
}

TEST(FindTau, LatticeStrategyAgrees) {
  const auto a = two_tone({Rational(0), Rational(0)});
  const auto b = two_tone({Rational(1, 3), Rational(1, 5)});
  SearchOptions o;
  o.strategy = SearchStrategy::Lattice;
  const auto c = find_tau(a, b, kOneSqrt2, 10.0, 1e-4, o);
  EXPECT_EQ(c.strategy, SearchStrategy::Lattice);
  EXPECT_GT(c.tau, 10.0);
  EXPECT_LT(DeviationFunction(a, b, kOneSqrt2)(c.tau), 1e-4);
}

TEST(FindTau, PrefixOnly) {
  const auto a = make_sum(2, {freq({"1", "0"}), freq({"0", "1"})}, {1.0, 1.0}, {Rational(0), Rational(0)});
  const auto b = make_sum(2, {freq({"1", "0"}), freq({"0", "1"})}, {1.0, 1.0}, {Rational(1, 2), Rational(1, 7)});
  SearchOptions o;
  o.prefix = 1;
  const auto c = find_tau(a, b, kOneSqrt2, 0.0, 1e-3, o);
  EXPECT_EQ(c.prefix_n, 1u);
  EXPECT_NEAR(c.tau, kPi, 1e-3);
}

TEST(FindTau, NotEquivalent) {
  const auto a = make_sum(1, {freq({"1"}), freq({"2"})}, {1.0, 1.0}, {Rational(0), Rational(0)});
  const auto b = make_sum(1, {freq({"1"}), freq({"2"})}, {1.0, 1.0}, {Rational(1, 4), Rational(0)});
  EXPECT_EQ(code_of([&] { find_tau(a, b, kOne, 0.0, 1e-3); }), ErrorCode::NotEquivalentInput);
}

TEST(FindTau, BudgetExhausted) {
  const auto a = two_tone({Rational(0), Rational(0)});
  const auto b = two_tone({Rational(1, 3), Rational(1, 5)});
  SearchOptions o;
  o.budget = 50;
  try {
    find_tau(a, b, kOneSqrt2, 0.0, 1e-6, o);
    FAIL();
  } catch (const BudgetExhausted& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExhausted);
    EXPECT_FALSE(e.best().success);
    EXPECT_TRUE(std::isfinite(e.best().deviation));
    EXPECT_LE(e.best().evaluations, 50u + 64u);
  }
}

TEST(FindTau, BadArguments) {
  EXPECT_THROW(find_tau(eit(), eit(), kOne, 0.0, 0.0), Error);
  EXPECT_THROW(find_tau(eit(), eit(), kOne, -1.0, 0.1), Error);
  EXPECT_EQ(code_of([&] { find_tau(eit(), eit(), atoms({"one"}), 0.0, 0.1); }), ErrorCode::MissingAtomValue);
}

TEST(EnumerateTaus, PeriodicGaps) {
  const auto e = enumerate_taus(eit(), eit(), kOne, 0.1, 0.0, 50.0);
  ASSERT_EQ(e.taus.size(), 7u);
  for (std::size_t k = 0; k < e.taus.size(); ++k) EXPECT_NEAR(e.taus[k], 2 * kPi * static_cast<double>(k + 1), 1e-6);
  EXPECT_NEAR(e.density.max_gap, 2 * kPi, 1e-6);
  EXPECT_TRUE(std::is_sorted(e.taus.begin(), e.taus.end()));
  for (double d : e.deviations) EXPECT_LT(d, 0.1);
}

TEST(EnumerateTaus, LooseEpsAcceptsEverySample) {
  const auto a = two_tone({Rational(0), Rational(0)});
  const auto b = two_tone({Rational(1, 3), Rational(1, 5)});
  const double bound = DeviationFunction(a, b, kOneSqrt2).triangle_bound();
  const auto e = enumerate_taus(a, b, kOneSqrt2, bound + 0.5, 0.0, 20.0);
  EXPECT_GT(e.scanned, 0u);
  EXPECT_EQ(e.qualifying_samples, e.scanned);
}

TEST(EnumerateTaus, Rejections) {
  EXPECT_THROW(enumerate_taus(eit(), eit(), kOne, 0.1, 5.0, 5.0), Error);
  const auto tailed = make_sum(1, {freq({"1"})}, {1.0}, {Rational(0)}, 0.1);
  EXPECT_EQ(code_of([&] { enumerate_taus(tailed, tailed, kOne, 0.1, 0.0, 10.0); }), ErrorCode::TailPresent);
  EXPECT_THROW(enumerate_taus(eit(), eit(), kOne, 0.1, 0.0, 1e6, 100000, 100), BudgetExhausted);
}

TEST(Uniformity, ArithmeticProgression) {
  std::vector<double> taus;
  for (int k = 0; k < 1000; ++k) taus.push_back(0.37 * k);
  // window of 10.5 spacings holds 10 or 11 points
  EXPECT_LE(uniform_set_check(taus, 0.37 * 10.5), 1.1 + 1e-12);
}

TEST(Uniformity, MultiplesOfTwoPi) {
  std::vector<double> taus;
  for (int k = 1; k <= 200; ++k) taus.push_back(2 * kPi * k);
  const auto r = uniformity_report(taus, 5 * kPi);
  EXPECT_LE(r.ratio, 1.5);
  EXPECT_GT(r.windows, 0u);
}

TEST(Uniformity, ClusterHasEmptyWindows) {
  const std::vector<double> taus{0.0, 0.1, 0.2, 100.0};
  EXPECT_TRUE(std::isinf(uniform_set_check(taus, 10.0)));
}

TEST(Uniformity, Degenerate) {
  EXPECT_EQ(code_of([] { uniform_set_check({0.0, 1.0, 2.0}, 1.0); }), ErrorCode::DegenerateInput);
  EXPECT_EQ(code_of([] { uniform_set_check({1.0}, 0.1); }), ErrorCode::DegenerateInput);
  EXPECT_THROW(uniform_set_check({3.0, 1.0, 0.0}, 0.1), Error);
  EXPECT_THROW(uniform_set_check({0.0, 10.0}, 0.0), Error);
}

TEST(Extraction, ConstantSequence) {
  const std::vector<ExponentialSum> fs(5, eit(Rational(1, 3)));
  const auto r = extract_convergent_subsequence(fs, 1e-9);
  EXPECT_EQ(r.indices.size(), 5u);
  EXPECT_EQ(r.refinements, 0u);
  EXPECT_EQ(r.limit, fs[0]);
}

TEST(Extraction, AlternatingPhases) {
  std::vector<ExponentialSum> fs;
  for (int l = 0; l < 6; ++l) fs.push_back(eit(l % 2 == 0 ? Rational(1, 4) : Rational(-1, 4)));
  const auto r = extract_convergent_subsequence(fs, 0.1);
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 2, 4}));
  ASSERT_TRUE(r.limit.coeffs[0].phase.is_exact());
  EXPECT_EQ(*r.limit.coeffs[0].phase.exact, Rational(1, 4));
  for (double d : r.successive_distances) EXPECT_LT(d, 0.1);
}

TEST(Extraction, RejectsInequivalentMember) {
  std::vector<ExponentialSum> fs{eit(), eit(Rational(1, 2)),
                                 make_sum(1, {freq({"1"})}, {2.0}, {Rational(0)})};
  EXPECT_EQ(code_of([&] { extract_convergent_subsequence(fs, 0.1); }), ErrorCode::NotEquivalentFamily);
  EXPECT_THROW(extract_convergent_subsequence({eit()}, 0.1), Error);
}

TEST(DenseTranslates, SelfTarget) {
  const auto f = make_sum(2, {freq({"1", "0"}), freq({"0", "1"}), freq({"1", "1"})}, {1.0, 0.5, 0.25},
                          {Rational(0), Rational(1, 3), Rational(1, 8)}, 0.01);
  const auto run = dense_translate_sequence(f, f, kOneSqrt2, 3);
  ASSERT_EQ(run.taus.size(), 3u);
  EXPECT_TRUE(run.success);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(run.measured[i], run.bounds[i]);
    if (i) EXPECT_GT(run.taus[i], run.taus[i - 1]);
    if (i) EXPECT_LT(run.eps_sequence[i], run.eps_sequence[i - 1]);
  }
}

TEST(DenseTranslates, SingleStep) {
  const auto f = make_sum(1, {freq({"1"}), freq({"2"})}, {1.0, 0.1}, {Rational(0), Rational(0)});
  const auto h = make_sum(1, {freq({"1"}), freq({"2"})}, {1.0, 0.1}, {Rational(1, 4), Rational(1, 2)});
  const auto run = dense_translate_sequence(f, h, kOne, 1);
  ASSERT_EQ(run.taus.size(), 1u);
  EXPECT_DOUBLE_EQ(run.eps_sequence[0], 0.01);
  EXPECT_NEAR(run.taus[0], kPi / 2, 0.2);
  EXPECT_TRUE(run.success);
  EXPECT_THROW(dense_translate_sequence(f, h, kOne, 0), Error);
  EXPECT_THROW(dense_translate_sequence(f, h, kOne, 3), Error);
  EXPECT_THROW(dense_translate_sequence(f, h, kOne, 2), Error);  // eps_2 vanishes without tail
}
