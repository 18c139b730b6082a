#pragma once

// Constants for the relaxed lower bound, built from the Gaussian family
// mu_sigma = N(0, sigma^2): f_sigma(x) = (1 - exp(-sigma^2 x^2 / 2)) / x, the
// positive zero R_sigma of f_sigma'', the three integrals that make up
// C_psi(sigma), and numerical checks of the supporting identities.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cltcert/numerics.hpp"

namespace cltcert {

struct FSigmaValues {
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

/// f_sigma and its first two derivatives; f(0) = 0, series near 0.
FSigmaValues f_sigma_eval(double sigma, double x);

/// No sign change of f_sigma'' on the scan grid. Carries the scanned table.
class RootScanError : public std::runtime_error {
 public:
  RootScanError(const std::string& what, std::vector<std::pair<double, double>> table)
      : std::runtime_error(what), table_(std::move(table)) {}
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

 private:
  std::vector<std::pair<double, double>> table_;
};

/// Tolerance budget for cross-checks between closed forms and quadrature.
class ConstantsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRootScanLo = 0.1;
inline constexpr double kRootScanHi = 10.0;
inline constexpr double kRootScanStep = 0.1;
inline constexpr double kRootTolerance = 1e-10;

/// Positive zero of f_sigma'': sign scan over [0.1, 10] then Brent.
RootResult find_R(double sigma);

struct ConstantsRecord {
  double sigma = 0.0;
  double R = 0.0;
  double integral_jump = 0.0;  // int [1 - (1 + x^2/2) e^{-x^2/2}] dmu_sigma
  double tv_muhat = 0.0;       // int |d/dx exp(-sigma^2 x^2 / 2)| dx
  double integral_f2 = 0.0;    // int |f_sigma''|
  double c_psi = 0.0;
  double c_half = 0.0;
  double c_tilde = 0.0;
  // |closed form - quadrature| for the jump and f'' integrals, |tv - 2|.
  double jump_residual = 0.0;
  double tv_residual = 0.0;
  double f2_residual = 0.0;
};

/// Closed-form value of integral_jump.
double integral_jump_closed_form(double sigma);

inline constexpr double kPipelineTolerance = 1e-6;

/// Throws ConstantsError if a closed form and its quadrature disagree by more
/// than kPipelineTolerance.
ConstantsRecord constants_pipeline(double sigma);

/// Headline values quoted for sigma = 1.7.
inline constexpr double kQuotedCPsi = 20.19;
inline constexpr double kQuotedCHalfBound = 30.3;
inline constexpr double kQuotedCTildeBound = 0.033;

struct SigmaScan {
  double best_sigma = 0.0;
  double best_c_psi = 0.0;
  std::vector<std::pair<double, double>> table;  // (sigma, c_psi)
};

SigmaScan sigma_scan(double lo, double hi, double step);

struct IdentityCheck {
  std::string name;
  double parameter = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass() const noexcept { return residual < tolerance; }
};

struct SandwichCheck {
  double x_min = 0.0;
  double x_max = 10.0;
  double step = 1e-3;
  std::size_t points = 0;
  // max over the grid of psi - phi and phi - 1.5 psi (both should be <= 0).
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
  double slack = 1e-12;
  bool pass() const noexcept {
    return max_lower_violation <= slack && max_upper_violation <= slack;
  }
};

struct IdentityConfig {
  std::vector<double> basic_relation_a{0.5, 1.0, 2.0};
  double basic_relation_tol = 1e-6;
  std::vector<std::pair<double, double>> fourier_sigma_a{{1.0, 1.0}, {1.7, 0.5}, {0.5, 2.0}};
  double fourier_tol = 1e-8;
  double sandwich_x_max = 10.0;
  double sandwich_step = 1e-3;
  double sandwich_slack = 1e-12;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  SandwichCheck sandwich;
  bool pass() const noexcept;
};

/// Both sides of E[a^2 int_0^1 g(xi + s a) e^{-(1-s^2)a^2/2} ds] = E[a f(xi + a)]
/// with g(x) = x f(x), by nested quadrature.
std::pair<double, double> basic_relation_sides(const RealFunction& f, double a);

/// Both sides of E[mu^(xi + a)] = int e^{-x^2/2} cos(a x) dmu(x) for
/// mu = N(0, sigma^2), by quadrature, and their common closed form.
struct FourierSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double closed_form = 0.0;
};
FourierSides fourier_translation(double sigma, double a);

IdentityReport identity_checks(const IdentityConfig& config = {});

}  // namespace cltcert
