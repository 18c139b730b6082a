#pragma once

// Kolmogorov distance between row-sum laws and the standard normal: exact via
// convolution for small rows, Monte Carlo with a DKW band otherwise.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltcert/distributions.hpp"
#include "cltcert/triangular_array.hpp"

namespace cltcert {

inline constexpr std::size_t kDefaultSamples = 1'000'000;
inline constexpr double kDefaultConfidenceLevel = 0.99;
/// Samples per independently seeded Monte-Carlo chunk.
inline constexpr std::size_t kSampleChunk = 16384;

enum class DistanceMethod { exact, empirical };

std::string to_string(DistanceMethod m);

struct Confidence {
  double level = kDefaultConfidenceLevel;
  double half_width = 0.0;
};

struct DistanceResult {
  double value = 0.0;
  DistanceMethod method = DistanceMethod::exact;
  std::optional<Confidence> confidence;
  std::size_t n = 0;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
};

/// sqrt(ln(2 / (1 - level)) / (2 m)).
double dkw_half_width(std::size_t samples, double level);

/// Product of per-entry atom counts (saturating); an upper bound on the
/// support size of the row sum.
std::size_t predicted_atom_count(const Row& row);

/// Law of the row sum by left-fold convolution (runs of identical entries are
/// folded by repeated squaring). Throws AtomCapExceeded as soon as one
/// convolution would need more than `cap` atom pairs.
DiscreteDistribution row_sum_exact(const Row& row, std::size_t cap = kDefaultAtomCap);

/// `samples` draws of the row sum. Draws come in chunks of kSampleChunk, each
/// with its own stream keyed by (seed, row length, chunk index), so the output
/// does not depend on the worker count.
std::vector<double> row_sum_samples(const Row& row, std::size_t samples,
                                    std::uint64_t seed);

/// Exact K: max over atoms of |Phi(a) - F(a)| and |Phi(a) - F(a-)|.
DistanceResult k_distance(const DiscreteDistribution& d, std::size_t n = 0);

/// K of the empirical CDF, with the DKW half-width at `level` attached.
DistanceResult k_distance(std::vector<double> samples, double level = kDefaultConfidenceLevel,
                          std::size_t n = 0);

struct MethodPolicy {
  enum class Mode { automatic, exact, mc };
  Mode mode = Mode::automatic;
  std::size_t cap = kDefaultAtomCap;
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  double level = kDefaultConfidenceLevel;
};

/// Distance for one row. Automatic mode tries exact convolution under the cap
/// and falls back to Monte Carlo; exact mode lets AtomCapExceeded escape.
DistanceResult row_distance(const Row& row, const MethodPolicy& policy);

struct KCurve {
  std::vector<DistanceResult> points;
  double plateau = 0.0;  // max over the last third of the n list
  double plateau_half_width = 0.0;  // widest band among those points
};

KCurve k_curve(const ArraySpec& spec, std::span<const std::size_t> n_list,
               const MethodPolicy& policy);

}  // namespace cltcert
