#include "cltcert/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "cltcert/numerics.hpp"
#include "cltcert/parallel.hpp"
#include "cltcert/random.hpp"

namespace cltcert {
namespace {

constexpr std::uint64_t kRowSumStreamTag = 0x726f7773756dULL;  // "rowsum"

double sup_gap(double a, double at, double below) {
  const double phi = normal_cdf(a);
  return std::max(std::abs(phi - at), std::abs(phi - below));
}

}  // namespace

std::string to_string(DistanceMethod m) {
  return m == DistanceMethod::exact ? "exact" : "empirical";
}

double dkw_half_width(std::size_t samples, double level) {
  if (samples == 0) throw std::invalid_argument("dkw_half_width: no samples");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("dkw_half_width: level must lie in (0, 1)");
  }
  return std::sqrt(std::log(2.0 / (1.0 - level)) / (2.0 * static_cast<double>(samples)));
}

std::size_t predicted_atom_count(const Row& row) {
  std::size_t count = 1;
  for (const auto& entry : row) {
    if (count > std::numeric_limits<std::size_t>::max() / entry.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= entry.size();
  }
  return count;
}

DiscreteDistribution row_sum_exact(const Row& row, std::size_t cap) {
  if (row.empty()) throw std::invalid_argument("row_sum_exact: empty row");
  std::optional<DiscreteDistribution> sum;
  auto fold = [&](const DiscreteDistribution& d) {
    sum = sum ? convolve(*sum, d, cap) : d;
  };
  std::size_t k = 0;
  while (k < row.size()) {
    std::size_t run = 1;
    while (k + run < row.size() && row[k + run] == row[k]) ++run;
    // run-fold convolution power of row[k] by repeated squaring.
    std::optional<DiscreteDistribution> power;
    DiscreteDistribution base = row[k];
    for (std::size_t e = run;;) {
      if (e & 1U) power = power ? convolve(*power, base, cap) : base;
      e >>= 1U;
      if (e == 0) break;
      base = convolve(base, base, cap);
    }
    fold(*power);
    k += run;
  }
  return *sum;
}

std::vector<double> row_sum_samples(const Row& row, std::size_t samples,
                                    std::uint64_t seed) {
  if (row.empty()) throw std::invalid_argument("row_sum_samples: empty row");
  if (samples == 0) throw std::invalid_argument("row_sum_samples: no samples");

  // Flatten the row so the inner loop walks contiguous memory.
  std::vector<double> atoms;
  std::vector<double> cumulative;
  std::vector<std::size_t> offsets{0};
  for (const auto& entry : row) {
    atoms.insert(atoms.end(), entry.atoms().begin(), entry.atoms().end());
    cumulative.insert(cumulative.end(), entry.cumulative().begin(),
                      entry.cumulative().end());
    offsets.push_back(atoms.size());
  }

  const std::uint64_t n = row.size();
  const std::size_t chunks = (samples + kSampleChunk - 1) / kSampleChunk;
  std::vector<double> out(samples);
  parallel_for(chunks, [&](std::size_t c) {
    RandomStream rng(seed, {kRowSumStreamTag, n, c});
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(samples, begin + kSampleChunk);
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum s;
      for (std::size_t k = 0; k < row.size(); ++k) {
        const double u = rng.uniform();
        std::size_t j = offsets[k];
        const std::size_t last = offsets[k + 1] - 1;
        while (j < last && cumulative[j] <= u) ++j;
        s += atoms[j];
      }
      out[i] = s.value();
    }
  });
  return out;
}

DistanceResult k_distance(const DiscreteDistribution& d, std::size_t n) {
  const auto atoms = d.atoms();
  const auto cum = d.cumulative();
  double best = 0.0;
  double below = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    best = std::max(best, sup_gap(atoms[i], cum[i], below));
    below = cum[i];
  }
  DistanceResult r;
  r.value = std::min(best, 1.0);
  r.method = DistanceMethod::exact;
  r.n = n;
  return r;
}

DistanceResult k_distance(std::vector<double> samples, double level, std::size_t n) {
  if (samples.empty()) throw std::invalid_argument("k_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double best = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    best = std::max(best, sup_gap(samples[i], static_cast<double>(j) / m,
                                  static_cast<double>(i) / m));
    i = j;
  }
  DistanceResult r;
  r.value = std::min(best, 1.0);
  r.method = DistanceMethod::empirical;
  r.confidence = Confidence{level, dkw_half_width(samples.size(), level)};
  r.n = n;
  r.samples = samples.size();
  return r;
}

DistanceResult row_distance(const Row& row, const MethodPolicy& policy) {
  using Mode = MethodPolicy::Mode;
  if (policy.mode != Mode::mc) {
    try {
      return k_distance(row_sum_exact(row, policy.cap), row.size());
    } catch (const AtomCapExceeded&) {
      if (policy.mode == Mode::exact) throw;
    }
  }
  DistanceResult r = k_distance(row_sum_samples(row, policy.samples, policy.seed),
                                policy.level, row.size());
  r.seed = policy.seed;
  return r;
}

KCurve k_curve(const ArraySpec& spec, std::span<const std::size_t> n_list,
               const MethodPolicy& policy) {
  if (n_list.empty()) throw std::invalid_argument("k_curve: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw std::invalid_argument("k_curve: n list must be strictly increasing");
    }
  }
  KCurve curve;
  std::vector<double> values;
  for (std::size_t n : n_list) {
    curve.points.push_back(row_distance(build_row(spec, n), policy));
    values.push_back(curve.points.back().value);
  }
  curve.plateau = limsup_proxy(values);
  const std::size_t tail = (values.size() + 2) / 3;
  for (std::size_t i = values.size() - tail; i < values.size(); ++i) {
    if (curve.points[i].confidence) {
      curve.plateau_half_width =
          std::max(curve.plateau_half_width, curve.points[i].confidence->half_width);
    }
  }
  return curve;
}

}  // namespace cltcert
