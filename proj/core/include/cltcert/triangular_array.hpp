#pragma once

// Rows of standard triangular arrays (the alpha-family and explicit rows) and
// the Feller, Lindeberg and relaxed Lindeberg quantities computed from them.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cltcert/distributions.hpp"

namespace cltcert {

using Row = std::vector<DiscreteDistribution>;

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tolerance for the STA conditions of explicit rows (zero means, unit total
/// variance).
inline constexpr double kRowMomentTolerance = 1e-10;

class ArraySpec {
 public:
  enum class Kind { example_alpha, explicit_rows };

  /// The alpha-family: entry k of row n puts mass (1 - beta/k)/2 on +-1/s_n
  /// and beta/(2k) on +-sqrt(k)/s_n, beta = alpha/(1 - alpha). Requires
  /// 0 < alpha <= 1/2.
  static ArraySpec example_alpha(double alpha);

  /// User-supplied rows; each must have zero-mean entries whose variances sum
  /// to 1.
  static ArraySpec explicit_rows(std::map<std::size_t, Row> rows);

  /// Rows n -> n copies of `base` rescaled to variance 1/n (base must have
  /// mean 0 and positive variance), for every n in `ns`.
  static ArraySpec scaled_iid(const DiscreteDistribution& base,
                              std::span<const std::size_t> ns);

  Kind kind() const noexcept { return kind_; }
  double alpha() const;
  double beta() const;
  const std::map<std::size_t, Row>& rows() const noexcept { return rows_; }
  bool has_row(std::size_t n) const;

 private:
  ArraySpec() = default;
  Kind kind_ = Kind::example_alpha;
  double alpha_ = 0.0;
  std::map<std::size_t, Row> rows_;
};

/// s_n^2 = n + beta * sum_{k<=n} (1 - 1/k).
double alpha_row_scale_squared(double alpha, std::size_t n);

Row build_row(const ArraySpec& spec, std::size_t n);

/// max_k E[xi_{n,k}^2].
double feller_max(const Row& row);

/// sum_k E[xi^2; |xi| >= eps].
double lindeberg_tail(const Row& row, double epsilon);

/// Weight in the class Phi_L: non-decreasing on [0, inf), values in [0, 1],
/// vanishing at 0+, strictly positive away from 0.
class WeightFunction {
 public:
  enum class Kind { phi_gamma, psi_half, table };

  /// phi_gamma(x) = 1 - exp(-gamma x^2).
  static WeightFunction phi_gamma(double gamma);
  /// psi(x) = 1 - int_0^1 exp(-(1 - s^2) x^2 / 2) ds.
  static WeightFunction psi_half();
  /// Piecewise-linear through (xs[i], values[i]), constant after the last
  /// knot. xs must start at 0 with value 0.
  static WeightFunction table(std::vector<double> xs, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double gamma() const;
  std::string name() const;
  double operator()(double x) const;

 private:
  WeightFunction() = default;
  Kind kind_ = Kind::phi_gamma;
  double gamma_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> values_;
};

/// psi_{1/2}(x) by adaptive quadrature of its defining s-integral.
double psi_half(double x);

/// sum_k E[xi^2 phi(|xi|)].
double relaxed_sum(const Row& row, const WeightFunction& weight);

/// Closed forms for the alpha-family.
double lin_closed_form(double alpha);
double relaxed_closed_form(double alpha, double gamma);
/// Limit over n of the Lindeberg tail at fixed eps: alpha - beta eps^2,
/// valid when eps^2 (1 + beta) <= 1.
double lindeberg_tail_limit(double alpha, double epsilon);

struct IndexPoint {
  std::size_t n;
  double parameter;  // epsilon for the Lindeberg index, NaN otherwise
  double value;
};

struct IndexReport {
  std::string index;   // "lindeberg" or "relaxed"
  std::string weight;  // weight name for relaxed indices
  ArraySpec::Kind kind;
  std::optional<double> alpha;
  std::vector<std::size_t> n_grid;
  std::vector<double> epsilon_grid;
  std::vector<IndexPoint> finite_values;
  double limit_estimate = 0.0;
  std::optional<double> closed_form;
  std::optional<double> closed_form_gap;
};

/// Geometric n grid 10^2 .. 10^5, four points per decade.
std::vector<std::size_t> default_n_grid();
/// {0.2, 0.1, 0.05, 0.02, 0.01}.
std::vector<double> default_epsilon_grid();

/// Limsup proxy: maximum over the last third of a grid-ordered sequence.
double limsup_proxy(std::span<const double> values_in_grid_order);

IndexReport lin_index(const ArraySpec& spec, std::span<const double> epsilon_grid,
                      std::span<const std::size_t> n_grid);

IndexReport relaxed_index(const ArraySpec& spec, const WeightFunction& weight,
                          std::span<const std::size_t> n_grid);

}  // namespace cltcert
