#pragma once

// Solutions of the Stein equation E[h(xi)] - h(x) = x f(x) - f'(x) for
// bounded test functions h, the closed-form solution for indicators, and the
// derivative bounds and Taylor remainders built on them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltcert/numerics.hpp"
#include "cltcert/triangular_array.hpp"

namespace cltcert {

/// E|xi|^3 for standard normal xi.
inline constexpr double kNormalAbsThirdMoment = 1.5957691216057307;

/// A bounded test function h with whatever derivatives it has.
class TestFunction {
 public:
  enum class Kind { smoothstep, indicator, custom };

  struct Custom {
    std::string name;
    RealFunction h;
    // Derivatives and their sup norms; leave empty when unknown.
    RealFunction h1, h2, h3;
    std::optional<double> sup_h1, sup_h2, sup_h3;
    // Points where h (or h') jumps; used to split integrals.
    std::vector<double> jumps;
    // E[h(xi)] if known; otherwise computed by quadrature.
    std::optional<double> expected;
  };

  /// h(x) = 1 - Phi((x - z) / delta).
  static TestFunction smoothstep(double z, double delta);
  /// h(x) = 1 if x <= z else 0.
  static TestFunction indicator(double z);
  static TestFunction constant(double c);
  static TestFunction custom(Custom spec);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  double z() const noexcept { return z_; }
  double delta() const noexcept { return delta_; }

  double operator()(double x) const;
  /// Derivative of the given order (1..3) at x. Indicators report the
  /// derivative away from z, i.e. 0.
  double derivative(int order, double x) const;
  bool has_derivative(int order) const;
  /// sup |h^(order)|, when available.
  std::optional<double> sup_norm(int order) const;
  std::span<const double> jumps() const noexcept { return jumps_; }
  /// E[h(xi)], computed once at construction.
  double expected() const noexcept { return expected_; }

 private:
  TestFunction() = default;
  void compute_expected();

  Kind kind_ = Kind::custom;
  double z_ = 0.0;
  double delta_ = 0.0;
  Custom custom_;
  std::vector<double> jumps_;
  double expected_ = 0.0;
};

struct SteinValues {
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Evaluator for f_h. Immutable; safe to share between threads.
class SteinSolution {
 public:
  explicit SteinSolution(TestFunction h, QuadratureOptions options = default_options());

  const TestFunction& source() const noexcept { return h_; }
  double expected_h() const noexcept { return h_.expected(); }

  /// f_h(x) from the defining integral, taken over the tail on x's side.
  double f(double x) const;
  /// f, f' from the Stein identity, and f'' = f + x f' + h'(x).
  SteinValues eval(double x) const;

  static QuadratureOptions default_options();

 private:
  TestFunction h_;
  QuadratureOptions options_;
};

SteinValues stein_eval(const TestFunction& h, double x);

struct IndicatorValues {
  double f = 0.0;
  double f1 = 0.0;
};

/// Closed form for h = 1_{(-inf, z]}, written with Mills ratios so that it
/// neither overflows nor cancels in the tails.
IndicatorValues indicator_solution(double z, double x);

struct BoundSuiteReport {
  std::string h;
  std::size_t grid_points = 0;
  double sup_f2 = 0.0;
  std::optional<double> bound_f2;  // 2 sup|h'|, absent when h' is unbounded
  double osc_f1 = 0.0;
  bool f2_pass = true;
  bool osc_pass = true;
  bool pass() const noexcept { return f2_pass && osc_pass; }
};

/// Slack allowed on the measured suprema.
inline constexpr double kBoundSlack = 1e-9;

/// Measures sup|f''_h| and osc(f'_h) over the grid (jump points of h are
/// skipped) and compares them with 2 sup|h'| and 1.
BoundSuiteReport bound_suite(const TestFunction& h, std::span<const double> grid);

/// A function with the derivatives and norms needed by the Taylor checks.
struct DerivativeBundle {
  RealFunction f;
  RealFunction f1;
  RealFunction f2;
  std::optional<double> sup_f2;
  std::optional<double> sup_f3;
  std::optional<double> osc_f1;
};

struct TaylorCheck {
  double remainder = 0.0;
  double bound = 0.0;
  bool pass() const noexcept { return remainder <= bound + 1e-12; }
};

/// |g(a+x) - g(a) - g'(a)x - g''(a)x^2/2| against
/// min{sup|g''| x^2, sup|g'''| |x|^3 / 6}.
TaylorCheck taylor_check_second_order(const DerivativeBundle& g, double a, double x);

/// |g(a+x) - g(a) - g'(a)x| against min{osc(g') |x|, sup|g''| x^2 / 2}.
TaylorCheck taylor_check_first_order(const DerivativeBundle& g, double a, double x);

DerivativeBundle bundle_of(const TestFunction& h);

/// (1/6) sup|h'''| (E|xi|^3 max_k sigma_{n,k} + eps) + sup|h''| L_n(eps),
/// the smoothing bound of the classical (Lindeberg replacement) argument.
double classical_bound(const TestFunction& h, const ArraySpec& spec, std::size_t n,
                       double epsilon);

}  // namespace cltcert
