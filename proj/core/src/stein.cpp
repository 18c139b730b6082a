#include "cltcert/stein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cltcert/distributions.hpp"

namespace cltcert {
namespace {

constexpr double kPhi0 = kInvSqrt2Pi;                 // phi(0)
constexpr double kPhi1 = 0.24197072451914337;         // phi(1)

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

void require_order(int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
}

}  // namespace

TestFunction TestFunction::smoothstep(double z, double delta) {
  if (!std::isfinite(z) || !(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("smoothstep: need finite z and delta > 0");
  }
  TestFunction h;
  h.kind_ = Kind::smoothstep;
  h.z_ = z;
  h.delta_ = delta;
  h.expected_ = normal_cdf(z / std::sqrt(1.0 + delta * delta));
  return h;
}

TestFunction TestFunction::indicator(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("indicator: z must be finite");
  TestFunction h;
  h.kind_ = Kind::indicator;
  h.z_ = z;
  h.jumps_ = {z};
  h.expected_ = normal_cdf(z);
  return h;
}

TestFunction TestFunction::constant(double c) {
  auto zero = [](double) { return 0.0; };
  Custom spec;
  spec.name = "constant(" + format_number(c) + ")";
  spec.h = [c](double) { return c; };
  spec.h1 = zero;
  spec.h2 = zero;
  spec.h3 = zero;
  spec.sup_h1 = spec.sup_h2 = spec.sup_h3 = 0.0;
  spec.expected = c;
  return custom(std::move(spec));
}

TestFunction TestFunction::custom(Custom spec) {
  if (!spec.h) throw std::invalid_argument("custom test function needs h");
  TestFunction h;
  h.kind_ = Kind::custom;
  h.jumps_ = spec.jumps;
  std::sort(h.jumps_.begin(), h.jumps_.end());
  h.custom_ = std::move(spec);
  h.compute_expected();
  return h;
}

void TestFunction::compute_expected() {
  if (custom_.expected) {
    expected_ = *custom_.expected;
    return;
  }
  QuadratureOptions options;
  options.abs_tol = 1e-14;
  options.rel_tol = 1e-13;
  const RealFunction& h = custom_.h;
  expected_ = integrate([&h](double x) { return h(x) * normal_pdf(x); },
                        -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), jumps_, options)
                  .value;
}

std::string TestFunction::name() const {
  switch (kind_) {
    case Kind::smoothstep:
      return "smoothstep(" + format_number(z_) + ", " + format_number(delta_) + ")";
    case Kind::indicator:
      return "indicator(" + format_number(z_) + ")";
    case Kind::custom:
      return custom_.name.empty() ? "custom" : custom_.name;
  }
  return "unknown";
}

double TestFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::smoothstep:
      return normal_cdf((z_ - x) / delta_);
    case Kind::indicator:
      return x <= z_ ? 1.0 : 0.0;
    case Kind::custom:
      return custom_.h(x);
  }
  return 0.0;
}

bool TestFunction::has_derivative(int order) const {
  require_order(order);
  switch (kind_) {
    case Kind::smoothstep:
    case Kind::indicator:
      return true;
    case Kind::custom: {
      const RealFunction* d[] = {&custom_.h1, &custom_.h2, &custom_.h3};
      return static_cast<bool>(*d[order - 1]);
    }
  }
  return false;
}

double TestFunction::derivative(int order, double x) const {
  require_order(order);
  switch (kind_) {
    case Kind::smoothstep: {
      const double u = (x - z_) / delta_;
      const double p = normal_pdf(u);
      if (order == 1) return -p / delta_;
      if (order == 2) return u * p / (delta_ * delta_);
      return (1.0 - u * u) * p / (delta_ * delta_ * delta_);
    }
    case Kind::indicator:
      return 0.0;
    case Kind::custom: {
      const RealFunction* d[] = {&custom_.h1, &custom_.h2, &custom_.h3};
      if (!*d[order - 1]) {
        throw std::invalid_argument(name() + ": derivative not available");
      }
      return (*d[order - 1])(x);
    }
  }
  return 0.0;
}

std::optional<double> TestFunction::sup_norm(int order) const {
  require_order(order);
  switch (kind_) {
    case Kind::smoothstep:
      if (order == 1) return kPhi0 / delta_;
      if (order == 2) return kPhi1 / (delta_ * delta_);
      return kPhi0 / (delta_ * delta_ * delta_);
    case Kind::indicator:
      return std::nullopt;
    case Kind::custom: {
      const std::optional<double>* n[] = {&custom_.sup_h1, &custom_.sup_h2,
                                          &custom_.sup_h3};
      return *n[order - 1];
    }
  }
  return std::nullopt;
}

QuadratureOptions SteinSolution::default_options() {
  QuadratureOptions options;
  options.abs_tol = 1e-14;
  options.rel_tol = 1e-13;
  options.max_intervals = 8000;
  return options;
}

SteinSolution::SteinSolution(TestFunction h, QuadratureOptions options)
    : h_(std::move(h)), options_(options) {}

double SteinSolution::f(double x) const {
  const double eh = h_.expected();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Integrand breakpoints where h(x -+ u) changes fast or jumps.
  std::vector<double> breaks;
  auto add_break = [&](double point) {
    const double u = x <= 0.0 ? x - point : point - x;
    if (u > 0.0 && std::isfinite(u)) breaks.push_back(u);
  };
  if (h_.kind() == TestFunction::Kind::smoothstep ||
      h_.kind() == TestFunction::Kind::indicator) {
    add_break(h_.z());
  }
  for (double j : h_.jumps()) add_break(j);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  try {
    if (x <= 0.0) {
      auto g = [&](double u) {
        return (h_(x - u) - eh) * std::exp(x * u - 0.5 * u * u);
      };
      return integrate(g, 0.0, inf, breaks, options_).value;
    }
    auto g = [&](double u) {
      return (h_(x + u) - eh) * std::exp(-x * u - 0.5 * u * u);
    };
    return -integrate(g, 0.0, inf, breaks, options_).value;
  } catch (const IntegrationError& e) {
    std::ostringstream msg;
    msg << "stein solution for " << h_.name() << " at x = " << x << ": " << e.what();
    throw IntegrationError(msg.str(), e.best_estimate());
  }
}

SteinValues SteinSolution::eval(double x) const {
  SteinValues v;
  v.f = f(x);
  v.f1 = x * v.f + h_(x) - h_.expected();
  const double h1 = h_.has_derivative(1) ? h_.derivative(1, x)
                                         : std::numeric_limits<double>::quiet_NaN();
  v.f2 = v.f + x * v.f1 + h1;
  return v;
}

SteinValues stein_eval(const TestFunction& h, double x) {
  return SteinSolution(h).eval(x);
}

IndicatorValues indicator_solution(double z, double x) {
  const double phi_z = normal_cdf(z);
  double f = 0.0;
  if (x <= z) {
    if (x < 0.0) {
      f = mills_ratio(-x) * normal_cdf(-z);
    } else {
      f = normal_cdf(x) * mills_ratio(z) * std::exp(0.5 * (x - z) * (x + z));
    }
  } else {
    if (x > 0.0) {
      f = phi_z * mills_ratio(x);
    } else {
      f = normal_cdf(-x) * mills_ratio(-z) * std::exp(0.5 * (x - z) * (x + z));
    }
  }
  const double f1 = x * f + (x <= z ? 1.0 : 0.0) - phi_z;
  return {f, f1};
}

BoundSuiteReport bound_suite(const TestFunction& h, std::span<const double> grid) {
  const SteinSolution solution(h);
  BoundSuiteReport report;
  report.h = h.name();
  const auto jumps = h.jumps();
  double f1_min = std::numeric_limits<double>::infinity();
  double f1_max = -std::numeric_limits<double>::infinity();
  for (double x : grid) {
    if (std::find(jumps.begin(), jumps.end(), x) != jumps.end()) continue;
    const SteinValues v = solution.eval(x);
    report.sup_f2 = std::max(report.sup_f2, std::abs(v.f2));
    f1_min = std::min(f1_min, v.f1);
    f1_max = std::max(f1_max, v.f1);
    ++report.grid_points;
  }
  report.osc_f1 = report.grid_points > 0 ? f1_max - f1_min : 0.0;
  report.osc_pass = report.osc_f1 <= 1.0 + kBoundSlack;
  if (h.kind() != TestFunction::Kind::indicator) {
    if (const auto norm = h.sup_norm(1)) report.bound_f2 = 2.0 * *norm;
  }
  if (report.bound_f2) report.f2_pass = report.sup_f2 <= *report.bound_f2 + kBoundSlack;
  return report;
}

TaylorCheck taylor_check_second_order(const DerivativeBundle& g, double a, double x) {
  if (!g.f || !g.f1 || !g.f2) {
    throw std::invalid_argument("second-order Taylor check needs g, g', g''");
  }
  if (!g.sup_f2 && !g.sup_f3) {
    throw std::invalid_argument("second-order Taylor check needs sup|g''| or sup|g'''|");
  }
  TaylorCheck c;
  c.remainder = std::abs(g.f(a + x) - g.f(a) - g.f1(a) * x - 0.5 * g.f2(a) * x * x);
  c.bound = std::numeric_limits<double>::infinity();
  if (g.sup_f2) c.bound = std::min(c.bound, *g.sup_f2 * x * x);
  if (g.sup_f3) c.bound = std::min(c.bound, *g.sup_f3 * std::abs(x * x * x) / 6.0);
  return c;
}

TaylorCheck taylor_check_first_order(const DerivativeBundle& g, double a, double x) {
  if (!g.f || !g.f1) throw std::invalid_argument("first-order Taylor check needs g, g'");
  if (!g.osc_f1 && !g.sup_f2) {
    throw std::invalid_argument("first-order Taylor check needs osc(g') or sup|g''|");
  }
  TaylorCheck c;
  c.remainder = std::abs(g.f(a + x) - g.f(a) - g.f1(a) * x);
  c.bound = std::numeric_limits<double>::infinity();
  if (g.osc_f1) c.bound = std::min(c.bound, *g.osc_f1 * std::abs(x));
  if (g.sup_f2) c.bound = std::min(c.bound, 0.5 * *g.sup_f2 * x * x);
  return c;
}

DerivativeBundle bundle_of(const TestFunction& h) {
  DerivativeBundle b;
  b.f = [h](double x) { return h(x); };
  if (h.has_derivative(1)) b.f1 = [h](double x) { return h.derivative(1, x); };
  if (h.has_derivative(2)) b.f2 = [h](double x) { return h.derivative(2, x); };
  b.sup_f2 = h.sup_norm(2);
  b.sup_f3 = h.sup_norm(3);
  if (h.kind() == TestFunction::Kind::smoothstep) {
    // h' runs over [-phi(0)/delta, 0).
    b.osc_f1 = kPhi0 / h.delta();
  }
  return b;
}

double classical_bound(const TestFunction& h, const ArraySpec& spec, std::size_t n,
                       double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("classical_bound: eps must be > 0");
  const auto h2 = h.sup_norm(2);
  const auto h3 = h.sup_norm(3);
  if (!h2 || !h3) {
    throw std::invalid_argument("classical_bound: " + h.name() +
                                " lacks bounded second and third derivatives");
  }
  const Row row = build_row(spec, n);
  const double max_sigma = std::sqrt(feller_max(row));
  return *h3 / 6.0 * (kNormalAbsThirdMoment * max_sigma + epsilon) +
         *h2 * lindeberg_tail(row, epsilon);
}

}  // namespace cltcert
