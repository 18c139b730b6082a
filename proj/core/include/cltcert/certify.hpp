#pragma once

// Two-sided certificates: c_tilde * RelLin_{1/2} <= limsup K <= Lin, checked
// against finite-n Kolmogorov distances, plus the scaling diagnostic showing
// that no bound of the form K <= C Lin^{1+p} can hold.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cltcert/constants.hpp"
#include "cltcert/kolmogorov.hpp"
#include "cltcert/triangular_array.hpp"

namespace cltcert {

enum class Verdict { consistent, inconsistent, inconclusive };

std::string to_string(Verdict v);

/// Grid slack added to the confidence band before a bound counts as violated.
inline constexpr double kVerdictSlack = 0.005;
inline constexpr double kDefaultSigma = 1.7;

struct CertifyConfig {
  /// n values for the empirical K curve. Explicit arrays use their own rows
  /// when this is empty.
  std::vector<std::size_t> k_grid;
  /// n grid for finite-n index proxies (explicit arrays only).
  std::vector<std::size_t> index_grid;
  std::vector<double> epsilon_grid = default_epsilon_grid();
  MethodPolicy policy;
  double sigma = kDefaultSigma;
  /// Use the quoted 0.033 instead of the computed c_tilde.
  bool rounded_constants = false;
  double slack = kVerdictSlack;
};

struct BoundCertificate {
  ArraySpec::Kind kind = ArraySpec::Kind::example_alpha;
  std::optional<double> alpha;
  std::vector<std::size_t> rows;  // row lengths of an explicit array
  double relaxed_index = 0.0;  // RelLin_{1/2}: closed form or finite-n proxy
  double lin_index = 0.0;      // Lin: closed form or finite-n proxy
  bool closed_forms = false;
  double c_tilde = 0.0;  // the constant actually used
  double lower = 0.0;
  double upper = 0.0;
  KCurve empirical;
  std::vector<std::size_t> k_grid;
  Verdict verdict = Verdict::inconclusive;
  ConstantsRecord constants;
  bool rounded_constants = false;
};

BoundCertificate certify_bounds(const ArraySpec& spec, const CertifyConfig& config);

/// Verdict for a plateau with band `half_width` against [lower, upper].
Verdict judge(double plateau, double half_width, double lower, double upper,
              double slack, bool have_points);

struct OptimalityRow {
  double alpha = 0.0;
  double lower = 0.0;
  double ratio = 0.0;  // lower / alpha^{1 + p}
};

/// Certified lower bound c_tilde * RelLin_{1/2}(alpha) over a grid decreasing
/// toward 0, divided by alpha^{1+p}.
std::vector<OptimalityRow> optimality_scan(double p, const std::vector<double>& alpha_grid,
                                           double c_tilde);

}  // namespace cltcert
