#include "cltcert/certify.hpp"

#include <cmath>
#include <stdexcept>

namespace cltcert {
namespace {

constexpr double kHalfGamma = 0.5;

std::vector<std::size_t> row_keys(const ArraySpec& spec) {
  std::vector<std::size_t> keys;
  for (const auto& [n, row] : spec.rows()) keys.push_back(n);
  return keys;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent:
      return "consistent";
    case Verdict::inconsistent:
      return "inconsistent";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

Verdict judge(double plateau, double half_width, double lower, double upper, double slack,
              bool have_points) {
  if (!have_points) return Verdict::inconclusive;
  const double band = half_width + slack;
  if (plateau > upper + band || plateau < lower - band) return Verdict::inconsistent;
  return Verdict::consistent;
}

BoundCertificate certify_bounds(const ArraySpec& spec, const CertifyConfig& config) {
  BoundCertificate cert;
  cert.kind = spec.kind();
  cert.constants = constants_pipeline(config.sigma);
  cert.rounded_constants = config.rounded_constants;
  cert.c_tilde = config.rounded_constants ? kQuotedCTildeBound : cert.constants.c_tilde;

  if (spec.kind() == ArraySpec::Kind::example_alpha) {
    cert.alpha = spec.alpha();
    cert.closed_forms = true;
    cert.relaxed_index = relaxed_closed_form(spec.alpha(), kHalfGamma);
    cert.lin_index = lin_closed_form(spec.alpha());
    cert.k_grid = config.k_grid.empty() ? std::vector<std::size_t>{10, 100, 1000}
                                        : config.k_grid;
  } else {
    cert.rows = row_keys(spec);
    const std::vector<std::size_t> grid =
        config.index_grid.empty() ? cert.rows : config.index_grid;
    cert.lin_index = lin_index(spec, config.epsilon_grid, grid).limit_estimate;
    cert.relaxed_index =
        relaxed_index(spec, WeightFunction::phi_gamma(kHalfGamma), grid).limit_estimate;
    cert.k_grid = config.k_grid.empty() ? cert.rows : config.k_grid;
  }

  cert.lower = cert.c_tilde * cert.relaxed_index;
  cert.upper = cert.lin_index;
  if (!cert.k_grid.empty()) {
    cert.empirical = k_curve(spec, cert.k_grid, config.policy);
  }
  cert.verdict = judge(cert.empirical.plateau, cert.empirical.plateau_half_width, cert.lower,
                       cert.upper, config.slack, !cert.empirical.points.empty());
  return cert;
}

std::vector<OptimalityRow> optimality_scan(double p, const std::vector<double>& alpha_grid,
                                           double c_tilde) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("optimality_scan: p must be a finite number >= 0");
  }
  if (!(c_tilde > 0.0)) throw std::invalid_argument("optimality_scan: c_tilde must be > 0");
  if (alpha_grid.empty()) throw std::invalid_argument("optimality_scan: empty alpha grid");
  std::vector<OptimalityRow> table;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    const double alpha = alpha_grid[i];
    if (!(alpha > 0.0 && alpha <= 0.5)) {
      throw std::invalid_argument("optimality_scan: alpha values must lie in (0, 1/2]");
    }
    if (i > 0 && !(alpha < alpha_grid[i - 1])) {
      throw std::invalid_argument("optimality_scan: alpha grid must decrease toward 0");
    }
    OptimalityRow row;
    row.alpha = alpha;
    row.lower = c_tilde * relaxed_closed_form(alpha, kHalfGamma);
    row.ratio = row.lower / std::pow(alpha, 1.0 + p);
    table.push_back(row);
  }
  return table;
}

}  // namespace cltcert
