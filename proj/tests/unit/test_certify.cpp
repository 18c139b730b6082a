#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cltcert/certify.hpp"
#include "cltcert/json_io.hpp"

using namespace cltcert;

namespace {

CertifyConfig quick_config() {
  CertifyConfig c;
  c.k_grid = {10, 20, 40};
  c.policy.samples = 20000;
  c.policy.seed = 7;
  c.policy.cap = 1 << 16;  // fail fast on the exact attempt for n >= 20
  return c;
}

// +-2..2 uniform lattice: a smaller lattice span than the coin, so the finite-n
// K sits well inside the verdict slack by n = 1600.
ArraySpec lattice_rows(std::vector<std::size_t> ns) {
  const DiscreteDistribution base({-2.0, -1.0, 0.0, 1.0, 2.0}, {0.2, 0.2, 0.2, 0.2, 0.2});
  return ArraySpec::scaled_iid(base, ns);
}

// 1 - 2 (1 - e^{-1/2}), the alpha -> 0 slope of the relaxed closed form at gamma = 1/2.
const double kC0 = 1.0 - 2.0 * (1.0 - std::exp(-0.5));

}  // namespace

TEST(Certify, AlphaHalfRoundedConstants) {
  auto config = quick_config();
  config.rounded_constants = true;
  const auto cert = certify_bounds(ArraySpec::example_alpha(0.5), config);
  EXPECT_TRUE(cert.closed_forms);
  EXPECT_EQ(cert.c_tilde, 0.033);
  EXPECT_NEAR(cert.lower, 0.033 * 0.0576015661428, 1e-12);
  EXPECT_NEAR(cert.lower, 0.0019010, 5e-7);  // quoted to four figures
  EXPECT_EQ(cert.upper, 0.5);
  EXPECT_LE(cert.lower, cert.upper);
  EXPECT_EQ(cert.empirical.points.size(), 3U);
  EXPECT_EQ(cert.verdict, Verdict::consistent);
}

TEST(Certify, AlphaQuarterComputedConstants) {
  const auto cert = certify_bounds(ArraySpec::example_alpha(0.25), quick_config());
  EXPECT_EQ(cert.upper, 0.25);
  EXPECT_NEAR(cert.c_tilde, cert.constants.c_tilde, 0.0);
  EXPECT_GE(cert.c_tilde, 0.033);
  EXPECT_NEAR(cert.lower, cert.c_tilde * relaxed_closed_form(0.25, 0.5), 1e-16);
}

TEST(Certify, DefaultKGridForAlphaFamily) {
  CertifyConfig c;
  c.policy.samples = 2000;
  c.policy.cap = 1 << 16;
  const auto cert = certify_bounds(ArraySpec::example_alpha(0.5), c);
  EXPECT_EQ(cert.k_grid, (std::vector<std::size_t>{10, 100, 1000}));
}

TEST(Certify, ExplicitLatticeArray) {
  const std::vector<std::size_t> ns{100, 400, 1600};
  CertifyConfig c;
  c.epsilon_grid = {0.2, 0.1, 0.05};
  const auto cert = certify_bounds(lattice_rows(ns), c);
  EXPECT_FALSE(cert.closed_forms);
  EXPECT_EQ(cert.rows, ns);
  EXPECT_EQ(cert.upper, 0.0);
  // The relaxed index of this array vanishes like 1/n; at n = 1600 it is small.
  EXPECT_EQ(cert.lower, cert.c_tilde * cert.relaxed_index);
  EXPECT_LT(cert.lower, 1e-4);
  EXPECT_GE(cert.lower, 0.0);
  for (const auto& p : cert.empirical.points) EXPECT_EQ(p.method, DistanceMethod::exact);
  EXPECT_LT(cert.empirical.plateau, kVerdictSlack);
  EXPECT_EQ(cert.verdict, Verdict::consistent);
}

TEST(Certify, DeterministicJson) {
  const auto a = to_json(certify_bounds(ArraySpec::example_alpha(0.5), quick_config())).dump();
  const auto b = to_json(certify_bounds(ArraySpec::example_alpha(0.5), quick_config())).dump();
  EXPECT_EQ(a, b);
}

TEST(Certify, BoundsIncreaseInAlpha) {
  const double c_tilde = constants_pipeline(1.7).c_tilde;
  double prev_lower = 0.0, prev_upper = 0.0;
  for (double alpha = 0.01; alpha <= 0.5 + 1e-12; alpha += 0.01) {
    const double lower = c_tilde * relaxed_closed_form(alpha, 0.5);
    const double upper = lin_closed_form(alpha);
    EXPECT_GT(lower, prev_lower);
    EXPECT_GT(upper, prev_upper);
    EXPECT_LE(lower, upper);
    prev_lower = lower;
    prev_upper = upper;
  }
}

TEST(Judge, Rules) {
  EXPECT_EQ(judge(0.1, 0.0, 0.0, 0.5, 0.005, true), Verdict::consistent);
  EXPECT_EQ(judge(0.51, 0.002, 0.0, 0.5, 0.005, true), Verdict::inconsistent);
  EXPECT_EQ(judge(0.506, 0.002, 0.0, 0.5, 0.005, true), Verdict::consistent);
  EXPECT_EQ(judge(0.001, 0.001, 0.01, 0.5, 0.005, true), Verdict::inconsistent);
  EXPECT_EQ(judge(0.0, 0.0, 0.0, 0.0, 0.005, false), Verdict::inconclusive);
  EXPECT_EQ(to_string(Verdict::consistent), "consistent");
}

TEST(Optimality, GrowthPerDecadeAtPOne) {
  const double c_tilde = constants_pipeline(1.7).c_tilde;
  const auto rows = optimality_scan(1.0, {0.1, 0.01, 0.001}, c_tilde);
  ASSERT_EQ(rows.size(), 3U);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].lower, c_tilde * relaxed_closed_form(rows[i].alpha, 0.5), 1e-18);
    EXPECT_NEAR(rows[i].ratio, rows[i].lower / (rows[i].alpha * rows[i].alpha), 1e-12);
    if (i > 0) {
      EXPECT_GE(rows[i].ratio / rows[i - 1].ratio, 8.0);
    }
  }
}

TEST(Optimality, PZeroConvergesToSlope) {
  const double c_tilde = constants_pipeline(1.7).c_tilde;
  const auto rows = optimality_scan(0.0, {0.1, 0.01, 0.001, 1e-6}, c_tilde);
  EXPECT_NEAR(rows.back().ratio, c_tilde * kC0, 1e-7);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(std::abs(rows[i].ratio - c_tilde * kC0),
              std::abs(rows[i - 1].ratio - c_tilde * kC0));
  }
}

TEST(Optimality, SingleRowAndValidation) {
  EXPECT_EQ(optimality_scan(1.0, {0.2}, 0.033).size(), 1U);
  EXPECT_THROW(optimality_scan(-1.0, {0.2}, 0.033), std::invalid_argument);
  EXPECT_THROW(optimality_scan(1.0, {}, 0.033), std::invalid_argument);
  EXPECT_THROW(optimality_scan(1.0, {0.01, 0.1}, 0.033), std::invalid_argument);
  EXPECT_THROW(optimality_scan(1.0, {0.7}, 0.033), std::invalid_argument);
  EXPECT_THROW(optimality_scan(1.0, {0.1}, 0.0), std::invalid_argument);
}

TEST(Certify, SpecErrorsPropagate) {
  EXPECT_THROW(certify_bounds(ArraySpec::example_alpha(0.6), quick_config()), SpecError);
}
