#include "cltcert/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

#include "cltcert/numerics.hpp"
#include "cltcert/random.hpp"

namespace cltcert {
namespace {

constexpr std::uint64_t kSampleStreamTag = 0x73616d706c65ULL;  // "sample"
constexpr std::uint64_t kNormalStreamTag = 0x6e6f726d616cULL;  // "normal"

// Continued fraction for the Mills ratio, accurate for y >= 8 or so.
double mills_continued_fraction(double y) {
  // R(y) = 1 / (y + 1 / (y + 2 / (y + 3 / (y + ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = y;
  double c = y;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = y + k * d;
    if (d == 0.0) d = tiny;
    c = y + k / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

void merge_sorted(std::vector<std::pair<double, double>>& pairs,
                  std::vector<double>& atoms, std::vector<double>& probs) {
  atoms.clear();
  probs.clear();
  std::size_t i = 0;
  while (i < pairs.size()) {
    const double start = pairs[i].first;
    CompensatedSum mass;
    std::size_t j = i;
    while (j < pairs.size() &&
           pairs[j].first - start <= DiscreteDistribution::kMergeTolerance) {
      mass += pairs[j].second;
      ++j;
    }
    const double p = mass.value();
    if (p > 0.0) {
      atoms.push_back(start);
      probs.push_back(p);
    }
    i = j;
  }
}

}  // namespace

double normal_cdf(double x) {
  if (std::isnan(x)) return x;
  constexpr long double inv_sqrt2 = 0.707106781186547524400844362104849039L;
  return static_cast<double>(0.5L * std::erfc(-static_cast<long double>(x) * inv_sqrt2));
}

double normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double mills_ratio(double y) {
  if (std::isnan(y)) return y;
  if (y > 100.0) return mills_continued_fraction(y);
  constexpr long double inv_sqrt2 = 0.707106781186547524400844362104849039L;
  constexpr long double sqrt_pi_over_2 = 1.253314137315500251207882642405522627L;
  const long double ly = y;
  return static_cast<double>(sqrt_pi_over_2 * std::erfc(ly * inv_sqrt2) *
                             std::exp(0.5L * ly * ly));
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> atoms,
                                           std::vector<double> probs) {
  if (atoms.size() != probs.size()) {
    throw DistributionError("distribution: atoms and probs differ in length");
  }
  if (atoms.empty()) throw DistributionError("distribution: no atoms");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) {
      throw DistributionError("distribution: non-finite atom");
    }
    if (!std::isfinite(probs[i]) || probs[i] < 0.0 || probs[i] > 1.0) {
      std::ostringstream msg;
      msg << "distribution: probability " << probs[i] << " at atom " << atoms[i]
          << " is outside [0, 1]";
      throw DistributionError(msg.str());
    }
    pairs.emplace_back(atoms[i], probs[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  merge_sorted(pairs, atoms_, probs_);
  if (atoms_.empty()) throw DistributionError("distribution: zero total mass");
  build_cumulative();
}

DiscreteDistribution::DiscreteDistribution(Validated, std::vector<double> atoms,
                                           std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  build_cumulative();
}

void DiscreteDistribution::build_cumulative() {
  cumulative_.resize(probs_.size());
  CompensatedSum running;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    running += probs_[i];
    cumulative_[i] = running.value();
  }
  const double total = running.value();
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution: total mass " << total << " differs from 1";
    throw DistributionError(msg.str());
  }
  for (double& c : cumulative_) c = std::min(c, 1.0);
}

DiscreteDistribution DiscreteDistribution::point_mass(double c) {
  return DiscreteDistribution({c}, {1.0});
}

DiscreteDistribution DiscreteDistribution::symmetric_pair(double a) {
  return DiscreteDistribution({-a, a}, {0.5, 0.5});
}

double DiscreteDistribution::mean() const {
  return expect([](double x) { return x; });
}

double DiscreteDistribution::second_moment() const {
  return expect([](double x) { return x * x; });
}

double DiscreteDistribution::variance() const {
  const double m = mean();
  return expect([m](double x) { return (x - m) * (x - m); });
}

double DiscreteDistribution::expect(const std::function<double(double)>& g) const {
  CompensatedSum s;
  for (std::size_t i = 0; i < atoms_.size(); ++i) s += probs_[i] * g(atoms_[i]);
  return s.value();
}

CdfPair DiscreteDistribution::cdf_pair(double x) const {
  const auto upper = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  const auto lower = std::lower_bound(atoms_.begin(), atoms_.end(), x);
  const auto at_index = static_cast<std::size_t>(upper - atoms_.begin());
  const auto below_index = static_cast<std::size_t>(lower - atoms_.begin());
  const double at = at_index == 0 ? 0.0 : cumulative_[at_index - 1];
  const double below = below_index == 0 ? 0.0 : cumulative_[below_index - 1];
  return {at, below};
}

DiscreteDistribution DiscreteDistribution::scaled(double factor) const {
  std::vector<double> atoms(atoms_.size());
  std::transform(atoms_.begin(), atoms_.end(), atoms.begin(),
                 [factor](double a) { return a * factor; });
  return DiscreteDistribution(std::move(atoms), probs_);
}

DiscreteDistribution convolve(const DiscreteDistribution& d1,
                              const DiscreteDistribution& d2, std::size_t cap) {
  const std::size_t n1 = d1.size();
  const std::size_t n2 = d2.size();
  if (n2 != 0 && n1 > cap / n2) {
    std::ostringstream msg;
    msg << "convolve: " << n1 << " x " << n2 << " atom pairs exceed the cap of "
        << cap << "; use Monte-Carlo mode";
    const std::size_t required =
        n1 > SIZE_MAX / n2 ? SIZE_MAX : n1 * n2;
    throw AtomCapExceeded(msg.str(), required, cap);
  }
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      pairs.emplace_back(d1.atoms_[i] + d2.atoms_[j], d1.probs_[i] * d2.probs_[j]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> atoms;
  std::vector<double> probs;
  merge_sorted(pairs, atoms, probs);
  return DiscreteDistribution(DiscreteDistribution::Validated{}, std::move(atoms),
                              std::move(probs));
}

CdfPair cdf_pair(const DiscreteDistribution& d, double x) { return d.cdf_pair(x); }

std::vector<double> sample(const DiscreteDistribution& d, std::size_t count,
                           std::uint64_t seed) {
  RandomStream rng(seed, {kSampleStreamTag});
  const auto atoms = d.atoms();
  const auto cum = d.cumulative();
  std::vector<double> out(count);
  for (double& v : out) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    auto idx = static_cast<std::size_t>(it - cum.begin());
    if (idx >= atoms.size()) idx = atoms.size() - 1;
    v = atoms[idx];
  }
  return out;
}

std::vector<double> sample_standard_normal(std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed, {kNormalStreamTag});
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; i += 2) {
    const double radius = std::sqrt(-2.0 * std::log(rng.uniform_open_left()));
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    out[i] = radius * std::cos(angle);
    if (i + 1 < count) out[i + 1] = radius * std::sin(angle);
  }
  return out;
}

}  // namespace cltcert
