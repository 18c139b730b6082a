#include "cltcert/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace cltcert {
namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

enum class SegmentKind { finite, to_plus_infinity, from_minus_infinity };

// A piece of the integration range, parameterised over t.
struct Segment {
  SegmentKind kind;
  double anchor;  // finite: unused; infinite: the finite endpoint
  double t_lo;
  double t_hi;
};

struct Interval {
  double a;
  double b;
  std::size_t segment;
  double value;
  double error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

class Integrand {
 public:
  Integrand(const RealFunction& f, const std::vector<Segment>& segments)
      : f_(f), segments_(segments) {}

  double operator()(std::size_t segment, double t) {
    const Segment& s = segments_[segment];
    double x = t;
    double jacobian = 1.0;
    if (s.kind != SegmentKind::finite) {
      const double one_minus = 1.0 - t;
      const double offset = t / one_minus;
      jacobian = 1.0 / (one_minus * one_minus);
      x = s.kind == SegmentKind::to_plus_infinity ? s.anchor + offset
                                                  : s.anchor - offset;
    }
    ++evaluations_;
    const double fx = f_(x);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg << "integrand is not finite at x = " << x;
      throw IntegrationError(msg.str(), {});
    }
    const double v = fx * jacobian;
    return std::isfinite(v) ? v : 0.0;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const RealFunction& f_;
  const std::vector<Segment>& segments_;
  std::size_t evaluations_ = 0;
};

Interval kronrod15(Integrand& g, std::size_t segment, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  std::array<double, 7> lower{};
  std::array<double, 7> upper{};
  const double fc = g(segment, centre);
  double gauss = fc * kGaussWeights[3];
  double kronrod = fc * kKronrodWeights[7];
  double abs_sum = std::abs(kronrod);

  for (int j = 0; j < 3; ++j) {
    const int k = 2 * j + 1;
    const double dx = half * kKronrodNodes[k];
    const double f1 = g(segment, centre - dx);
    const double f2 = g(segment, centre + dx);
    lower[k] = f1;
    upper[k] = f2;
    gauss += kGaussWeights[j] * (f1 + f2);
    kronrod += kKronrodWeights[k] * (f1 + f2);
    abs_sum += kKronrodWeights[k] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int k = 2 * j;
    const double dx = half * kKronrodNodes[k];
    const double f1 = g(segment, centre - dx);
    const double f2 = g(segment, centre + dx);
    lower[k] = f1;
    upper[k] = f2;
    kronrod += kKronrodWeights[k] * (f1 + f2);
    abs_sum += kKronrodWeights[k] * (std::abs(f1) + std::abs(f2));
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int k = 0; k < 7; ++k) {
    asc += kKronrodWeights[k] *
           (std::abs(lower[k] - mean) + std::abs(upper[k] - mean));
  }

  const double result = kronrod * half;
  abs_sum *= abs_half;
  asc *= abs_half;
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  if (abs_sum > kTiny / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * abs_sum, err);
  }
  return Interval{a, b, segment, result, err};
}

std::vector<Segment> build_segments(double lo, double hi,
                                    std::span<const double> breakpoints) {
  std::vector<double> cuts;
  for (double p : breakpoints) {
    if (std::isfinite(p) && p > lo && p < hi) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (std::isinf(lo) && std::isinf(hi) && cuts.empty()) cuts.push_back(0.0);

  std::vector<double> nodes;
  nodes.push_back(lo);
  nodes.insert(nodes.end(), cuts.begin(), cuts.end());
  nodes.push_back(hi);

  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    if (std::isinf(a)) {
      segments.push_back({SegmentKind::from_minus_infinity, b, 0.0, 1.0});
    } else if (std::isinf(b)) {
      segments.push_back({SegmentKind::to_plus_infinity, a, 0.0, 1.0});
    } else {
      segments.push_back({SegmentKind::finite, 0.0, a, b});
    }
  }
  return segments;
}

bool splittable(const Interval& iv) {
  const double mid = 0.5 * (iv.a + iv.b);
  const double scale = std::max(std::abs(iv.a), std::abs(iv.b));
  return mid > iv.a && mid < iv.b && (iv.b - iv.a) > 8.0 * kEps * scale;
}

}  // namespace

QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           double tol) {
  QuadratureOptions options;
  options.abs_tol = tol;
  return integrate(f, lo, hi, {}, options);
}

QuadratureResult integrate(const RealFunction& f, double lo, double hi,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& options) {
  if (!(options.abs_tol > 0.0) && !(options.rel_tol > 0.0)) {
    throw std::invalid_argument("integrate: tolerance must be positive");
  }
  if (std::isnan(lo) || std::isnan(hi)) {
    throw std::invalid_argument("integrate: NaN endpoint");
  }
  if (lo > hi) {
    QuadratureResult r = integrate(f, hi, lo, breakpoints, options);
    r.value = -r.value;
    return r;
  }

  const std::vector<Segment> segments = build_segments(lo, hi, breakpoints);
  Integrand g(f, segments);

  std::priority_queue<Interval> active;
  std::vector<Interval> settled;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    active.push(kronrod15(g, s, segments[s].t_lo, segments[s].t_hi));
  }

  auto totals = [&]() {
    CompensatedSum value;
    CompensatedSum error;
    auto copy = active;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const Interval& iv : settled) {
      value += iv.value;
      error += iv.error;
    }
    return std::pair{value.value(), error.value()};
  };

  // Running totals drive the loop; the final answer is re-summed.
  double value = 0.0;
  double error = 0.0;
  {
    auto [v, e] = totals();
    value = v;
    error = e;
  }
  std::size_t intervals = segments.size();

  auto converged = [&]() {
    return error <= std::max(options.abs_tol, options.rel_tol * std::abs(value));
  };

  while (!converged()) {
    if (active.empty()) break;
    if (intervals >= options.max_intervals) break;
    Interval worst = active.top();
    active.pop();
    if (!splittable(worst)) {
      settled.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Interval left = kronrod15(g, worst.segment, worst.a, mid);
    Interval right = kronrod15(g, worst.segment, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    ++intervals;
  }

  auto [v, e] = totals();
  QuadratureResult result{v, e, g.evaluations()};
  if (!(e <= std::max(options.abs_tol, options.rel_tol * std::abs(v)))) {
    std::ostringstream msg;
    msg << "integrate: no convergence on (" << lo << ", " << hi
        << ") after " << intervals << " intervals; estimate " << v
        << " +- " << e;
    throw IntegrationError(msg.str(), result);
  }
  return result;
}

RootResult find_root(const RealFunction& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be positive");
  if (lo > hi) std::swap(lo, hi);
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return RootResult{a, {a, a}, 0.0};
  if (fb == 0.0) return RootResult{b, {b, b}, 0.0};
  if (std::signbit(fa) == std::signbit(fb) || std::isnan(fa) || std::isnan(fb)) {
    std::ostringstream msg;
    msg << "find_root: no sign change on [" << lo << ", " << hi
        << "]: f(lo) = " << fa << ", f(hi) = " << fb;
    throw BracketError(msg.str(), fa, fb);
  }

  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (fb == 0.0) return RootResult{b, {b, b}, 0.0};
    if (std::abs(xm) <= tol1) {
      return RootResult{b, {std::min(b, c), std::max(b, c)}, fb};
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return RootResult{b, {std::min(b, c), std::max(b, c)}, fb};
}

std::optional<std::pair<double, double>> scan_sign_change(const RealFunction& f,
                                                          double lo, double hi,
                                                          double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("scan_sign_change: need step > 0 and hi >= lo");
  }
  const auto cells = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  double x_prev = lo;
  double f_prev = f(x_prev);
  for (long i = 1; i <= cells; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double fx = f(x);
    if (f_prev == 0.0) return std::pair{x_prev, x_prev};
    if (fx == 0.0 || std::signbit(fx) != std::signbit(f_prev)) {
      return std::pair{x_prev, x};
    }
    x_prev = x;
    f_prev = fx;
  }
  return std::nullopt;
}

double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum s;
  for (double v : values) s += v;
  return s.value();
}

}  // namespace cltcert
