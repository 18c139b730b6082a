#include "cltcert/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cltcert/distributions.hpp"
#include "cltcert/parallel.hpp"
#include "cltcert/triangular_array.hpp"

namespace cltcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadratureOptions tight(double abs_tol = 1e-12, double rel_tol = 1e-12) {
  QuadratureOptions o;
  o.abs_tol = abs_tol;
  o.rel_tol = rel_tol;
  return o;
}

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be a positive finite number");
  }
}

std::string format(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

}  // namespace

FSigmaValues f_sigma_eval(double sigma, double x) {
  require_sigma(sigma);
  const double c = 0.5 * sigma * sigma;
  const double y = c * x * x;
  if (x == 0.0) return {0.0, c, 0.0};

  if (y < 1.0) {
    // q_m = c^m x^{2m-2} / m!, r_m = c^m x^{2m-4} / m! (m >= 2).
    double q = c;
    double r = 0.5 * c * c;
    double s_f = 0.0;
    double s_f1 = 0.0;
    double s_f2 = 0.0;
    double sign = 1.0;
    for (int m = 1; m <= 40; ++m) {
      s_f += sign * q;
      s_f1 += sign * (2 * m - 1) * q;
      if (m >= 2) {
        s_f2 += sign * (2 * m - 1) * (2 * m - 2) * r;
        r *= c * x * x / (m + 1);
      }
      q *= c * x * x / (m + 1);
      sign = -sign;
      if (q < 1e-20 * std::abs(s_f1) && m >= 2) break;
    }
    return {x * s_f, s_f1, x * s_f2};
  }

  const double e = std::exp(-y);
  const double one_minus_e = -std::expm1(-y);
  const double x2 = x * x;
  return {one_minus_e / x, 2.0 * c * e - one_minus_e / x2,
          -4.0 * c * c * x * e - 2.0 * c * e / x + 2.0 * one_minus_e / (x2 * x)};
}

RootResult find_R(double sigma) {
  require_sigma(sigma);
  auto f2 = [sigma](double x) { return f_sigma_eval(sigma, x).f2; };
  const auto bracket = scan_sign_change(f2, kRootScanLo, kRootScanHi, kRootScanStep);
  if (!bracket) {
    std::vector<std::pair<double, double>> table;
    std::ostringstream msg;
    msg << "f_sigma'' has no sign change on [" << kRootScanLo << ", " << kRootScanHi
        << "] for sigma = " << sigma << "; scan:";
    const int steps = static_cast<int>(std::lround((kRootScanHi - kRootScanLo) / kRootScanStep));
    for (int i = 0; i <= steps; ++i) {
      const double x = kRootScanLo + i * kRootScanStep;
      table.emplace_back(x, f2(x));
      if (i % 10 == 0) msg << " f''(" << x << ")=" << table.back().second;
    }
    throw RootScanError(msg.str(), std::move(table));
  }
  return find_root(f2, bracket->first, bracket->second, kRootTolerance);
}

double integral_jump_closed_form(double sigma) {
  require_sigma(sigma);
  const double s2 = sigma * sigma;
  return 1.0 - (1.0 + s2 / (2.0 * (1.0 + s2))) / std::sqrt(1.0 + s2);
}

ConstantsRecord constants_pipeline(double sigma) {
  require_sigma(sigma);
  ConstantsRecord rec;
  rec.sigma = sigma;
  const double s2 = sigma * sigma;

  rec.R = find_R(sigma).root;

  rec.integral_jump = integral_jump_closed_form(sigma);
  const double jump_quad =
      integrate(
          [sigma](double x) {
            const double h = 0.5 * x * x;
            const double bracket = -std::expm1(-h) - h * std::exp(-h);
            return bracket * normal_pdf(x / sigma) / sigma;
          },
          -kInf, kInf, std::vector<double>{0.0}, tight())
          .value;
  rec.jump_residual = std::abs(jump_quad - rec.integral_jump);

  rec.tv_muhat = integrate(
                     [s2](double x) {
                       return s2 * std::abs(x) * std::exp(-0.5 * s2 * x * x);
                     },
                     -kInf, kInf, std::vector<double>{0.0}, tight())
                     .value;
  rec.tv_residual = std::abs(rec.tv_muhat - 2.0);

  rec.integral_f2 = s2 - 4.0 * f_sigma_eval(sigma, rec.R).f1;
  const std::vector<double> kinks{-rec.R, 0.0, rec.R};
  const double f2_quad =
      integrate([sigma](double x) { return std::abs(f_sigma_eval(sigma, x).f2); }, -kInf,
                kInf, kinks, tight())
          .value;
  rec.f2_residual = std::abs(f2_quad - rec.integral_f2);

  auto check = [sigma](const char* what, double residual) {
    if (residual > kPipelineTolerance) {
      std::ostringstream msg;
      msg << "constants pipeline (sigma = " << sigma << "): " << what
          << " closed form and quadrature differ by " << residual;
      throw ConstantsError(msg.str());
    }
  };
  check("jump integral", rec.jump_residual);
  check("total variation of mu^", rec.tv_residual);
  check("integral of |f''|", rec.f2_residual);

  rec.c_psi = (rec.tv_muhat + rec.integral_f2) / rec.integral_jump;
  rec.c_half = 1.5 * rec.c_psi;
  rec.c_tilde = 1.0 / rec.c_half;
  return rec;
}

SigmaScan sigma_scan(double lo, double hi, double step) {
  require_sigma(lo);
  require_sigma(hi);
  if (hi < lo) throw std::invalid_argument("sigma_scan: range is reversed");
  if (!(step > 0.0)) throw std::invalid_argument("sigma_scan: step must be > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  SigmaScan scan;
  scan.table.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const double sigma = lo + static_cast<double>(i) * step;
    scan.table[i] = {sigma, constants_pipeline(sigma).c_psi};
  });
  const auto best = std::min_element(
      scan.table.begin(), scan.table.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  scan.best_sigma = best->first;
  scan.best_c_psi = best->second;
  return scan;
}

std::pair<double, double> basic_relation_sides(const RealFunction& f, double a) {
  if (a == 0.0) return {0.0, 0.0};
  const QuadratureOptions inner = tight(1e-11, 1e-11);
  const QuadratureOptions outer = tight(1e-10, 1e-10);
  const double a2 = a * a;
  auto inner_integral = [&](double x) {
    return integrate(
               [&](double s) {
                 const double t = x + s * a;
                 return t * f(t) * std::exp(-0.5 * (1.0 - s * s) * a2);
               },
               0.0, 1.0, {}, inner)
        .value;
  };
  const double lhs =
      integrate([&](double x) { return a2 * inner_integral(x) * normal_pdf(x); }, -kInf,
                kInf, {}, outer)
          .value;
  const double rhs =
      integrate([&](double x) { return a * f(x + a) * normal_pdf(x); }, -kInf, kInf, {},
                outer)
          .value;
  return {lhs, rhs};
}

FourierSides fourier_translation(double sigma, double a) {
  require_sigma(sigma);
  const double s2 = sigma * sigma;
  const QuadratureOptions o = tight(1e-14, 1e-13);
  FourierSides sides;
  sides.lhs = integrate(
                  [&](double x) {
                    const double t = x + a;
                    return std::exp(-0.5 * s2 * t * t) * normal_pdf(x);
                  },
                  -kInf, kInf, {}, o)
                  .value;
  sides.rhs = integrate(
                  [&](double x) {
                    return std::exp(-0.5 * x * x) * std::cos(a * x) *
                           normal_pdf(x / sigma) / sigma;
                  },
                  -kInf, kInf, {}, o)
                  .value;
  sides.closed_form = std::exp(-s2 * a * a / (2.0 * (1.0 + s2))) / std::sqrt(1.0 + s2);
  return sides;
}

bool IdentityReport::pass() const noexcept {
  return sandwich.pass() &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass(); });
}

IdentityReport identity_checks(const IdentityConfig& config) {
  IdentityReport report;
  const RealFunction tanh_f = [](double x) { return std::tanh(x); };
  for (double a : config.basic_relation_a) {
    const auto [lhs, rhs] = basic_relation_sides(tanh_f, a);
    report.checks.push_back({"basic_relation[f=tanh]", a, lhs, rhs, std::abs(lhs - rhs),
                             config.basic_relation_tol});
  }
  for (const auto& [sigma, a] : config.fourier_sigma_a) {
    const FourierSides s = fourier_translation(sigma, a);
    const double residual =
        std::max(std::abs(s.lhs - s.closed_form), std::abs(s.rhs - s.closed_form));
    report.checks.push_back({"fourier_translation[sigma=" + format(sigma) + "]", a, s.lhs,
                             s.rhs, residual, config.fourier_tol});
  }

  SandwichCheck& sw = report.sandwich;
  sw.x_min = 0.0;
  sw.x_max = config.sandwich_x_max;
  sw.step = config.sandwich_step;
  sw.slack = config.sandwich_slack;
  sw.points = static_cast<std::size_t>(std::llround(sw.x_max / sw.step)) + 1;
  std::vector<double> lower(sw.points);
  std::vector<double> upper(sw.points);
  parallel_for(sw.points, [&](std::size_t i) {
    const double x = static_cast<double>(i) * sw.step;
    const double psi = psi_half(x);
    const double phi = -std::expm1(-0.5 * x * x);
    lower[i] = psi - phi;
    upper[i] = phi - 1.5 * psi;
  });
  sw.max_lower_violation = *std::max_element(lower.begin(), lower.end());
  sw.max_upper_violation = *std::max_element(upper.begin(), upper.end());
  return report;
}

}  // namespace cltcert
