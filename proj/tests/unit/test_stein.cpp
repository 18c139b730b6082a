#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cltcert/kolmogorov.hpp"
#include "cltcert/stein.hpp"
#include "oracles.hpp"

using namespace cltcert;

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

// f_h(x) = e^{x^2/2} int_{-inf}^x (h(t) - E h) e^{-t^2/2} dt by Simpson, for
// moderate |x| only.
double stein_oracle(const TestFunction& h, double eh, double x) {
  const long double integral = oracle::simpson(
      [&](long double t) {
        return (h(static_cast<double>(t)) - eh) * std::exp(-t * t / 2.0L);
      },
      -30.0L, x, 400000);
  return static_cast<double>(std::exp(static_cast<long double>(x) * x / 2.0L) * integral);
}

const std::vector<TestFunction>& smoothsteps() {
  static const std::vector<TestFunction> hs{
      TestFunction::smoothstep(0.0, 1.0), TestFunction::smoothstep(1.0, 0.25),
      TestFunction::smoothstep(-1.5, 0.5), TestFunction::smoothstep(2.0, 2.0),
      TestFunction::smoothstep(0.3, 0.1)};
  return hs;
}

}  // namespace

TEST(TestFunction, SmoothstepShapeAndNorms) {
  const auto h = TestFunction::smoothstep(0.5, 0.4);
  EXPECT_NEAR(h(-50.0), 1.0, 1e-15);
  EXPECT_NEAR(h(50.0), 0.0, 1e-15);
  double prev = 2.0;
  for (double x : grid(-1, 2, 0.01)) {
    EXPECT_LT(h(x), prev);
    prev = h(x);
  }
  // Grid-estimated norms, derivatives by finite differences of h itself.
  double s1 = 0, s2 = 0, s3 = 0;
  for (double x : grid(-3, 4, 0.001)) {
    s1 = std::max(s1, std::abs(oracle::derivative([&](double t) { return h(t); }, x, 1e-3)));
    s2 = std::max(s2, std::abs(h.derivative(2, x)));
    s3 = std::max(s3, std::abs(h.derivative(3, x)));
    EXPECT_NEAR(h.derivative(1, x), oracle::derivative([&](double t) { return h(t); }, x, 1e-3),
                1e-8);
    EXPECT_NEAR(h.derivative(2, x),
                oracle::derivative([&](double t) { return h.derivative(1, t); }, x, 1e-3), 1e-7);
    EXPECT_NEAR(h.derivative(3, x),
                oracle::derivative([&](double t) { return h.derivative(2, t); }, x, 1e-3), 1e-6);
  }
  EXPECT_NEAR(*h.sup_norm(1), 1.0 / (0.4 * std::sqrt(2 * M_PI)), 1e-15);
  EXPECT_NEAR(*h.sup_norm(1), s1, 1e-6);
  EXPECT_NEAR(*h.sup_norm(2), s2, 1e-5);
  EXPECT_NEAR(*h.sup_norm(3), s3, 1e-5);
  EXPECT_THROW(h.derivative(4, 0.0), std::invalid_argument);
  EXPECT_THROW(TestFunction::smoothstep(0.0, 0.0), std::invalid_argument);
}

TEST(TestFunction, ExpectedValuesAgainstQuadrature) {
  for (const auto& h : smoothsteps()) {
    const double oracle_value = static_cast<double>(oracle::simpson(
        [&](long double x) { return h(static_cast<double>(x)) * oracle::normal_pdf(x); }, -40.0L,
        40.0L, 400000));
    EXPECT_NEAR(h.expected(), oracle_value, 1e-12) << h.name();
  }
  EXPECT_NEAR(TestFunction::indicator(0.7).expected(), oracle::normal_cdf(0.7), 1e-14);
  TestFunction::Custom c;
  c.name = "tanh";
  c.h = [](double x) { return std::tanh(x - 0.2); };
  const auto h = TestFunction::custom(c);
  const double oracle_value = static_cast<double>(oracle::simpson(
      [](long double x) { return std::tanh(x - 0.2L) * oracle::normal_pdf(x); }, -40.0L, 40.0L,
      400000));
  EXPECT_NEAR(h.expected(), oracle_value, 1e-12);
  EXPECT_FALSE(h.has_derivative(1));
  EXPECT_THROW(h.derivative(1, 0.0), std::invalid_argument);
}

TEST(SteinEval, ConstantGivesZero) {
  const auto h = TestFunction::constant(0.37);
  for (double x : {-5.0, -1.0, 0.0, 0.5, 4.0}) {
    const auto v = stein_eval(h, x);
    EXPECT_EQ(v.f, 0.0);
    EXPECT_EQ(v.f1, 0.0);
  }
}

TEST(SteinEval, IndicatorAtZero) {
  const auto v = stein_eval(TestFunction::indicator(0.0), 0.0);
  EXPECT_NEAR(v.f, std::sqrt(2 * M_PI) / 4, 1e-12);
  EXPECT_NEAR(v.f, 0.6267, 1e-4);
}

TEST(SteinEval, AgreesWithSimpsonOracle) {
  for (const auto& h : smoothsteps()) {
    const SteinSolution sol(h);
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
      EXPECT_NEAR(sol.f(x), stein_oracle(h, h.expected(), x), 1e-10) << h.name() << " " << x;
    }
  }
}

TEST(SteinEval, IdentityResidualByFiniteDifferences) {
  // f' from Richardson differences of f, compared with the Stein identity
  // x f + h - E h. This does not reuse eval()'s formula for f1.
  for (const auto& h : smoothsteps()) {
    const SteinSolution sol(h);
    const double step = 0.02 * std::min(1.0, h.delta());
    double worst = 0.0;
    for (double x : grid(-6, 6, 0.25)) {
      const double fd = oracle::derivative([&](double t) { return sol.f(t); }, x, step);
      const double rhs = x * sol.f(x) + h(x) - h.expected();
      worst = std::max(worst, std::abs(fd - rhs));
    }
    EXPECT_LT(worst, 1e-8) << h.name();
  }
}

TEST(SteinEval, SecondDerivativeByFiniteDifferences) {
  const auto h = TestFunction::smoothstep(0.5, 0.7);
  const SteinSolution sol(h);
  for (double x : {-2.0, -0.3, 0.8, 3.0}) {
    const double fd = oracle::derivative([&](double t) { return sol.eval(t).f1; }, x, 0.02);
    EXPECT_NEAR(sol.eval(x).f2, fd, 1e-8) << x;
  }
}

TEST(IndicatorSolution, ClosedFormAgainstQuadrature) {
  for (double z : {-1.0, 0.0, 2.0}) {
    const SteinSolution sol(TestFunction::indicator(z));
    double worst = 0.0;
    for (double x : grid(-4, 4, 0.05)) {
      const auto closed = indicator_solution(z, x);
      const auto quad = sol.eval(x);
      worst = std::max({worst, std::abs(closed.f - quad.f), std::abs(closed.f1 - quad.f1)});
    }
    EXPECT_LT(worst, 1e-8) << z;
  }
}

TEST(IndicatorSolution, AgainstTextbookFormula) {
  // f = sqrt(2 pi) e^{x^2/2} Phi(min(x,z)) (1 - Phi(max(x,z))) in long double.
  for (double z : {-1.0, 0.0, 2.0}) {
    for (double x : {-3.0, -1.0, -0.2, 0.0, 0.6, 2.5}) {
      const long double lo = oracle::normal_cdf(std::min(x, z));
      const long double hi = 1.0L - oracle::normal_cdf(std::max(x, z));
      const double ref = static_cast<double>(std::sqrt(2.0L * M_PI) *
                                             std::exp(static_cast<long double>(x) * x / 2) *
                                             lo * hi);
      EXPECT_NEAR(indicator_solution(z, x).f, ref, 1e-12 * std::max(1.0, ref)) << z << " " << x;
    }
  }
  EXPECT_NEAR(indicator_solution(0.0, 0.0).f, 0.62666, 1e-5);
}

TEST(IndicatorSolution, TailAsymptoteWithoutOverflow) {
  auto mills_series = [](double y) {
    return 1 / y - 1 / std::pow(y, 3) + 3 / std::pow(y, 5) - 15 / std::pow(y, 7);
  };
  for (double z : {-1.0, 0.0, 2.0}) {
    const double right = oracle::normal_cdf(z) * mills_series(10.0);
    const double left = (1.0 - oracle::normal_cdf(z)) * mills_series(10.0);
    EXPECT_NEAR(indicator_solution(z, 10.0).f, right, 1e-6);
    EXPECT_NEAR(indicator_solution(z, -10.0).f, left, 1e-6);
    for (double x : {-40.0, 40.0, -1e3, 1e3}) {
      const auto v = indicator_solution(z, x);
      EXPECT_TRUE(std::isfinite(v.f) && std::isfinite(v.f1)) << x;
    }
  }
  // The quadrature evaluator also stays finite out there.
  EXPECT_NEAR(stein_eval(TestFunction::indicator(0.0), 10.0).f,
              indicator_solution(0.0, 10.0).f, 1e-8);
}

TEST(IndicatorSolution, OscillationAtMostOne) {
  for (double z : {-1.0, 0.0, 2.0}) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : grid(-8, 8, 0.01)) {
      const double f1 = indicator_solution(z, x).f1;
      lo = std::min(lo, f1);
      hi = std::max(hi, f1);
    }
    EXPECT_LE(hi - lo, 1.0 + 1e-9) << z;
    EXPECT_GT(hi - lo, 0.9) << z;
  }
}

TEST(BoundSuite, SmoothstepExamples) {
  const auto g = grid(-8, 8, 0.05);
  const auto r = bound_suite(TestFunction::smoothstep(0.0, 1.0), g);
  ASSERT_TRUE(r.bound_f2.has_value());
  EXPECT_NEAR(*r.bound_f2, 2.0 / std::sqrt(2 * M_PI), 1e-15);
  EXPECT_LE(r.sup_f2, *r.bound_f2 + 1e-9);
  EXPECT_TRUE(r.pass());
  const auto r2 = bound_suite(TestFunction::smoothstep(1.0, 0.25), g);
  EXPECT_LE(r2.osc_f1, 1.0 + 1e-9);
  EXPECT_TRUE(r2.pass());
  for (const auto& h : smoothsteps()) EXPECT_TRUE(bound_suite(h, g).pass()) << h.name();
}

TEST(BoundSuite, IndicatorSkipsJumpAndHasNoF2Bound) {
  const auto g = grid(-4, 4, 0.5);
  const auto r = bound_suite(TestFunction::indicator(0.0), g);
  EXPECT_EQ(r.grid_points, g.size() - 1);
  EXPECT_FALSE(r.bound_f2.has_value());
  EXPECT_TRUE(r.pass());
}

TEST(BoundSuite, ConstantHasZeroSuprema) {
  const auto r = bound_suite(TestFunction::constant(1.0), grid(-3, 3, 0.5));
  EXPECT_EQ(r.sup_f2, 0.0);
  EXPECT_EQ(r.osc_f1, 0.0);
  EXPECT_TRUE(r.pass());
}

TEST(Taylor, ZeroStepHasZeroRemainder) {
  const auto b = bundle_of(TestFunction::smoothstep(0.0, 1.0));
  EXPECT_EQ(taylor_check_second_order(b, 0.4, 0.0).remainder, 0.0);
  EXPECT_EQ(taylor_check_first_order(b, 0.4, 0.0).remainder, 0.0);
}

TEST(Taylor, SmoothstepSecondOrder) {
  const auto h = TestFunction::smoothstep(0.0, 1.0);
  double s2 = 0, s3 = 0;
  for (double x : grid(-6, 6, 1e-3)) {
    s2 = std::max(s2, std::abs(h.derivative(2, x)));
    s3 = std::max(s3, std::abs(h.derivative(3, x)));
  }
  const auto c = taylor_check_second_order(bundle_of(h), 0.3, 0.7);
  EXPECT_TRUE(c.pass());
  EXPECT_LE(c.remainder, std::min(s2 * 0.49, s3 * 0.343 / 6));
  for (double a : {-2.0, 0.0, 1.0}) {
    for (double x : {-1.5, -0.1, 0.05, 2.0}) {
      EXPECT_TRUE(taylor_check_second_order(bundle_of(h), a, x).pass()) << a << " " << x;
      EXPECT_TRUE(taylor_check_first_order(bundle_of(h), a, x).pass()) << a << " " << x;
    }
  }
}

TEST(Taylor, IndicatorSolutionFirstOrder) {
  DerivativeBundle b;
  b.f = [](double x) { return indicator_solution(0.0, x).f; };
  b.f1 = [](double x) { return indicator_solution(0.0, x).f1; };
  b.osc_f1 = 1.0;
  const auto c = taylor_check_first_order(b, -0.5, 0.2);
  EXPECT_TRUE(c.pass());
  EXPECT_DOUBLE_EQ(c.bound, 0.2);
  EXPECT_GT(c.remainder, 0.0);
  // Across the jump of f' as well.
  EXPECT_TRUE(taylor_check_first_order(b, -0.1, 0.3).pass());
}

TEST(Taylor, MissingPiecesAreRejected) {
  DerivativeBundle b;
  b.f = [](double x) { return x; };
  b.f1 = [](double) { return 1.0; };
  EXPECT_THROW(taylor_check_first_order(b, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(taylor_check_second_order(b, 0.0, 1.0), std::invalid_argument);
}

TEST(ClassicalBound, AbsoluteThirdMoment) {
  const double oracle_value = static_cast<double>(oracle::simpson(
      [](long double x) { return 2.0L * x * x * x * oracle::normal_pdf(x); }, 0.0L, 40.0L,
      400000));
  EXPECT_NEAR(kNormalAbsThirdMoment, oracle_value, 1e-13);
  EXPECT_NEAR(kNormalAbsThirdMoment, 2.0 * std::sqrt(2.0 / M_PI), 1e-15);
}

TEST(ClassicalBound, ApproachesH2TimesLin) {
  const auto h = TestFunction::smoothstep(0.0, 1.0);
  const auto spec = ArraySpec::example_alpha(0.25);
  const double target = *h.sup_norm(2) * 0.25;
  EXPECT_NEAR(classical_bound(h, spec, 100000, 0.01), target, 0.005);
  // Larger eps or smaller n sit further away.
  EXPECT_GT(classical_bound(h, spec, 100, 0.5), classical_bound(h, spec, 100000, 0.01) - 0.06);
  EXPECT_THROW(classical_bound(h, spec, 100, 0.0), std::invalid_argument);
  EXPECT_THROW(classical_bound(TestFunction::indicator(0.0), spec, 100, 0.1),
               std::invalid_argument);
}

TEST(SteinLemma, OneSidedDistanceBound) {
  std::vector<DiscreteDistribution> laws;
  laws.push_back(row_sum_exact(Row(4, DiscreteDistribution::symmetric_pair(0.5))));
  laws.push_back(row_sum_exact(build_row(ArraySpec::example_alpha(0.5), 8)));
  laws.push_back(row_sum_exact(build_row(ArraySpec::example_alpha(0.1), 3)));
  for (const auto& d : laws) {
    const double k = k_distance(d).value;
    for (const auto& h : smoothsteps()) {
      const double gap = std::abs(h.expected() - d.expect([&](double x) { return h(x); }));
      EXPECT_LE(gap, k + 1e-9) << h.name();
    }
  }
}
