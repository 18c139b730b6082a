#include "cltcert/triangular_array.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "cltcert/numerics.hpp"
#include "cltcert/parallel.hpp"

namespace cltcert {
namespace {

double beta_of(double alpha) { return alpha / (1.0 - alpha); }

void require_row_size(std::size_t n, const Row& row) {
  if (row.size() != n) {
    std::ostringstream msg;
    msg << "explicit row " << n << " has " << row.size() << " entries, expected "
        << n;
    throw SpecError(msg.str());
  }
}

void validate_sta_row(std::size_t n, const Row& row) {
  require_row_size(n, row);
  CompensatedSum total;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double m = row[k].mean();
    if (std::abs(m) > kRowMomentTolerance) {
      std::ostringstream msg;
      msg << "explicit row " << n << ", entry " << (k + 1) << " has mean " << m
          << " (must be 0)";
      throw SpecError(msg.str());
    }
    total += row[k].second_moment();
  }
  if (std::abs(total.value() - 1.0) > kRowMomentTolerance) {
    std::ostringstream msg;
    msg.precision(15);
    msg << "explicit row " << n << " has total variance " << total.value()
        << " (must be 1)";
    throw SpecError(msg.str());
  }
}

}  // namespace

ArraySpec ArraySpec::example_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 0.5)) {
    std::ostringstream msg;
    msg << "alpha = " << alpha << " is outside (0, 1/2]";
    if (alpha > 0.5 && alpha < 1.0) {
      // Entry k = 1 of every row: mass (1 - beta)/2 on the +-1/s_n family.
      const double beta = beta_of(alpha);
      msg << ": row n = 1, entry k = 1 would get probability (1 - beta/k)/2 = "
          << 0.5 * (1.0 - beta) << " < 0";
    }
    throw SpecError(msg.str());
  }
  ArraySpec spec;
  spec.kind_ = Kind::example_alpha;
  spec.alpha_ = alpha;
  return spec;
}

ArraySpec ArraySpec::explicit_rows(std::map<std::size_t, Row> rows) {
  if (rows.empty()) throw SpecError("explicit array has no rows");
  for (const auto& [n, row] : rows) {
    if (n == 0) throw SpecError("explicit array: row index must be >= 1");
    validate_sta_row(n, row);
  }
  ArraySpec spec;
  spec.kind_ = Kind::explicit_rows;
  spec.rows_ = std::move(rows);
  return spec;
}

ArraySpec ArraySpec::scaled_iid(const DiscreteDistribution& base,
                                std::span<const std::size_t> ns) {
  const double variance = base.variance();
  if (!(variance > 0.0)) throw SpecError("scaled_iid: base has zero variance");
  if (std::abs(base.mean()) > kRowMomentTolerance * std::sqrt(variance)) {
    throw SpecError("scaled_iid: base must have mean 0");
  }
  std::map<std::size_t, Row> rows;
  for (std::size_t n : ns) {
    if (n == 0) throw SpecError("scaled_iid: n must be >= 1");
    const DiscreteDistribution entry =
        base.scaled(1.0 / std::sqrt(static_cast<double>(n) * variance));
    rows.emplace(n, Row(n, entry));
  }
  return explicit_rows(std::move(rows));
}

double ArraySpec::alpha() const {
  if (kind_ != Kind::example_alpha) throw SpecError("explicit array has no alpha");
  return alpha_;
}

double ArraySpec::beta() const { return beta_of(alpha()); }

bool ArraySpec::has_row(std::size_t n) const {
  return kind_ == Kind::example_alpha ? n >= 1 : rows_.contains(n);
}

double alpha_row_scale_squared(double alpha, std::size_t n) {
  const double beta = beta_of(alpha);
  CompensatedSum harmonic_gap;
  for (std::size_t k = 1; k <= n; ++k) {
    harmonic_gap += 1.0 - 1.0 / static_cast<double>(k);
  }
  return static_cast<double>(n) + beta * harmonic_gap.value();
}

Row build_row(const ArraySpec& spec, std::size_t n) {
  if (n == 0) throw SpecError("build_row: n must be >= 1");
  if (spec.kind() == ArraySpec::Kind::explicit_rows) {
    auto it = spec.rows().find(n);
    if (it == spec.rows().end()) {
      std::ostringstream msg;
      msg << "explicit array has no row " << n;
      throw SpecError(msg.str());
    }
    return it->second;
  }

  const double beta = spec.beta();
  const double s = std::sqrt(alpha_row_scale_squared(spec.alpha(), n));
  Row row;
  row.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double small = 1.0 / s;
    const double large = std::sqrt(kk) / s;
    const double p_small = 0.5 * (1.0 - beta / kk);
    const double p_large = 0.5 * beta / kk;
    row.emplace_back(std::vector<double>{-large, -small, small, large},
                     std::vector<double>{p_large, p_small, p_small, p_large});
  }
  return row;
}

double feller_max(const Row& row) {
  double best = 0.0;
  for (const auto& entry : row) best = std::max(best, entry.second_moment());
  return best;
}

double lindeberg_tail(const Row& row, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lindeberg_tail: eps must be > 0");
  CompensatedSum tail;
  for (const auto& entry : row) {
    const auto atoms = entry.atoms();
    const auto probs = entry.probs();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (std::abs(atoms[i]) >= epsilon) tail += atoms[i] * atoms[i] * probs[i];
    }
  }
  return tail.value();
}

WeightFunction WeightFunction::phi_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw SpecError("phi_gamma: gamma must be a positive finite number");
  }
  WeightFunction w;
  w.kind_ = Kind::phi_gamma;
  w.gamma_ = gamma;
  return w;
}

WeightFunction WeightFunction::psi_half() {
  WeightFunction w;
  w.kind_ = Kind::psi_half;
  return w;
}

WeightFunction WeightFunction::table(std::vector<double> xs,
                                     std::vector<double> values) {
  if (xs.size() != values.size() || xs.size() < 2) {
    throw SpecError("weight table: need >= 2 knots with matching values");
  }
  if (xs.front() != 0.0 || values.front() != 0.0) {
    throw SpecError("weight table: must start at (0, 0) so that phi(0+) = 0");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(values[i])) {
      throw SpecError("weight table: non-finite knot");
    }
    if (values[i] < 0.0 || values[i] > 1.0) {
      throw SpecError("weight table: values must lie in [0, 1]");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw SpecError("weight table: knots must be strictly increasing");
    }
    if (i > 0 && values[i] < values[i - 1]) {
      throw SpecError("weight table: values must be non-decreasing");
    }
  }
  if (!(values[1] > 0.0)) {
    throw SpecError("weight table: must be strictly positive on (0, inf)");
  }
  WeightFunction w;
  w.kind_ = Kind::table;
  w.xs_ = std::move(xs);
  w.values_ = std::move(values);
  return w;
}

double WeightFunction::gamma() const {
  if (kind_ != Kind::phi_gamma) throw SpecError("weight has no gamma parameter");
  return gamma_;
}

std::string WeightFunction::name() const {
  switch (kind_) {
    case Kind::phi_gamma: {
      std::ostringstream s;
      s.precision(12);
      s << "phi_gamma(" << gamma_ << ")";
      return s.str();
    }
    case Kind::psi_half:
      return "psi_half";
    case Kind::table:
      return "table";
  }
  return "unknown";
}

double WeightFunction::operator()(double x) const {
  x = std::abs(x);
  switch (kind_) {
    case Kind::phi_gamma:
      return -std::expm1(-gamma_ * x * x);
    case Kind::psi_half:
      return cltcert::psi_half(x);
    case Kind::table: {
      if (x >= xs_.back()) return values_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const auto i = static_cast<std::size_t>(it - xs_.begin());
      const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
      return values_[i - 1] + t * (values_[i] - values_[i - 1]);
    }
  }
  return 0.0;
}

double psi_half(double x) {
  x = std::abs(x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double half_x2 = 0.5 * x * x;
  QuadratureOptions options;
  options.abs_tol = 1e-300;
  options.rel_tol = 1e-13;
  const auto r = integrate(
      [half_x2](double s) { return -std::expm1(-(1.0 - s * s) * half_x2); }, 0.0,
      1.0, {}, options);
  return std::min(1.0, r.value);
}

double relaxed_sum(const Row& row, const WeightFunction& weight) {
  // Rows repeat atoms heavily (the +-1/s_n family), so memoize the weight.
  std::unordered_map<double, double> cache;
  auto w = [&](double a) {
    const double key = std::abs(a);
    auto [it, inserted] = cache.try_emplace(key, 0.0);
    if (inserted) it->second = weight(key);
    return it->second;
  };
  CompensatedSum total;
  for (const auto& entry : row) {
    const auto atoms = entry.atoms();
    const auto probs = entry.probs();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      total += atoms[i] * atoms[i] * probs[i] * w(atoms[i]);
    }
  }
  return total.value();
}

double lin_closed_form(double alpha) { return alpha; }

double relaxed_closed_form(double alpha, double gamma) {
  const double g = gamma * (1.0 - alpha);
  // (1 - e^{-g}) / g, written with expm1 for small g.
  const double ratio = -std::expm1(-g) / g;
  return alpha * (1.0 - ratio);
}

double lindeberg_tail_limit(double alpha, double epsilon) {
  return alpha - beta_of(alpha) * epsilon * epsilon;
}

std::vector<std::size_t> default_n_grid() {
  std::vector<std::size_t> grid;
  for (int i = 0; i <= 12; ++i) {
    grid.push_back(static_cast<std::size_t>(std::llround(std::pow(10.0, 2.0 + i / 4.0))));
  }
  return grid;
}

std::vector<double> default_epsilon_grid() { return {0.2, 0.1, 0.05, 0.02, 0.01}; }

double limsup_proxy(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("limsup_proxy: empty sequence");
  const std::size_t tail = (values.size() + 2) / 3;
  return *std::max_element(values.end() - static_cast<std::ptrdiff_t>(tail),
                           values.end());
}

namespace {

void validate_n_grid(std::span<const std::size_t> n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("n grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw std::invalid_argument("n grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("n grid must be strictly increasing");
    }
  }
}

void validate_epsilon_grid(std::span<const double> eps) {
  if (eps.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw std::invalid_argument("epsilon grid entries must be > 0");
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      throw std::invalid_argument("epsilon grid must be strictly decreasing");
    }
  }
}

IndexReport make_report(const ArraySpec& spec, std::string index,
                        std::span<const std::size_t> n_grid) {
  IndexReport report;
  report.index = std::move(index);
  report.kind = spec.kind();
  if (spec.kind() == ArraySpec::Kind::example_alpha) report.alpha = spec.alpha();
  report.n_grid.assign(n_grid.begin(), n_grid.end());
  return report;
}

}  // namespace

IndexReport lin_index(const ArraySpec& spec, std::span<const double> epsilon_grid,
                      std::span<const std::size_t> n_grid) {
  validate_n_grid(n_grid);
  validate_epsilon_grid(epsilon_grid);
  IndexReport report = make_report(spec, "lindeberg", n_grid);
  report.epsilon_grid.assign(epsilon_grid.begin(), epsilon_grid.end());

  const std::size_t n_eps = epsilon_grid.size();
  std::vector<double> values(n_grid.size() * n_eps);
  parallel_for(n_grid.size(), [&](std::size_t i) {
    const Row row = build_row(spec, n_grid[i]);
    for (std::size_t j = 0; j < n_eps; ++j) {
      values[i * n_eps + j] = lindeberg_tail(row, epsilon_grid[j]);
    }
  });

  double limit = 0.0;
  for (std::size_t j = 0; j < n_eps; ++j) {
    std::vector<double> column(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i) column[i] = values[i * n_eps + j];
    limit = std::max(limit, limsup_proxy(column));
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    for (std::size_t j = 0; j < n_eps; ++j) {
      report.finite_values.push_back({n_grid[i], epsilon_grid[j], values[i * n_eps + j]});
    }
  }
  report.limit_estimate = limit;
  if (spec.kind() == ArraySpec::Kind::example_alpha) {
    report.closed_form = lin_closed_form(spec.alpha());
    report.closed_form_gap = std::abs(limit - *report.closed_form);
  }
  return report;
}

IndexReport relaxed_index(const ArraySpec& spec, const WeightFunction& weight,
                          std::span<const std::size_t> n_grid) {
  validate_n_grid(n_grid);
  IndexReport report = make_report(spec, "relaxed", n_grid);
  report.weight = weight.name();

  std::vector<double> values(n_grid.size());
  parallel_for(n_grid.size(), [&](std::size_t i) {
    values[i] = relaxed_sum(build_row(spec, n_grid[i]), weight);
  });
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    report.finite_values.push_back(
        {n_grid[i], std::numeric_limits<double>::quiet_NaN(), values[i]});
  }
  report.limit_estimate = limsup_proxy(values);
  if (spec.kind() == ArraySpec::Kind::example_alpha &&
      weight.kind() == WeightFunction::Kind::phi_gamma) {
    report.closed_form = relaxed_closed_form(spec.alpha(), weight.gamma());
    report.closed_form_gap = std::abs(report.limit_estimate - *report.closed_form);
  }
  return report;
}

}  // namespace cltcert
