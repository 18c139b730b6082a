#pragma once

// Shared numeric kernels: adaptive Gauss-Kronrod quadrature over finite and
// infinite ranges, Brent bracketing root finding, and compensated summation.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace cltcert {

using RealFunction = std::function<double(double)>;

inline constexpr double kDefaultQuadratureTol = 1e-10;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = kDefaultQuadratureTol;
  // Converged once error <= max(abs_tol, rel_tol * |value|).
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

/// Raised when the subdivision budget runs out. Carries the best estimate.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, QuadratureResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadratureResult& best_estimate() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

/// Integrates f over (lo, hi); either endpoint may be +-infinity. Infinite
/// ranges are mapped onto [0, 1) by x = a + t / (1 - t).
QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           double tol = kDefaultQuadratureTol);

/// As above, but the range is split at `breakpoints` first (kinks, jumps).
QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& options);

struct RootResult {
  double root = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
  double residual = 0.0;
};

/// f(lo) and f(hi) do not straddle zero.
class BracketError : public std::invalid_argument {
 public:
  BracketError(const std::string& what, double f_lo, double f_hi)
      : std::invalid_argument(what), f_lo_(f_lo), f_hi_(f_hi) {}
  double f_lo() const noexcept { return f_lo_; }
  double f_hi() const noexcept { return f_hi_; }

 private:
  double f_lo_;
  double f_hi_;
};

/// Brent's method. The returned bracket has width <= max(tol, 4 eps |root|)
/// and f changes sign (or vanishes) across it.
RootResult find_root(const RealFunction& f, double lo, double hi,
                     double tol = 1e-12);

/// First grid cell [lo + i step, lo + (i+1) step] over which f changes sign.
std::optional<std::pair<double, double>> scan_sign_change(const RealFunction& f,
                                                          double lo, double hi,
                                                          double step);

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values) noexcept;

}  // namespace cltcert
