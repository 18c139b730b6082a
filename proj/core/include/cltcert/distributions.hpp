#pragma once

// Finite discrete distributions with exact convolution and CDF queries, plus
// the standard-normal utilities every comparison is made against.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cltcert {

inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677940;

/// Phi(x), computed in extended precision; ~1 ulp relative in both tails.
double normal_cdf(double x);
double normal_pdf(double x);
/// Mills ratio Phi(-y) / phi(y), finite for all real y (no overflow).
double mills_ratio(double y);

class DistributionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A convolution or row sum would exceed the configured atom budget.
class AtomCapExceeded : public std::runtime_error {
 public:
  AtomCapExceeded(const std::string& what, std::size_t required, std::size_t cap)
      : std::runtime_error(what), required_(required), cap_(cap) {}
  std::size_t required() const noexcept { return required_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t required_;
  std::size_t cap_;
};

inline constexpr std::size_t kDefaultAtomCap = std::size_t{1} << 24;

struct CdfPair {
  double at;     // F(x)  = P[X <= x]
  double below;  // F(x-) = P[X <  x]
};

/// Immutable law on finitely many atoms. Atoms are sorted and strictly
/// increasing; atoms closer than kMergeTolerance are coalesced, zero-mass
/// atoms dropped, and the total mass must be 1 within kMassTolerance.
class DiscreteDistribution {
 public:
  static constexpr double kMergeTolerance = 1e-12;
  static constexpr double kMassTolerance = 1e-12;

  DiscreteDistribution(std::vector<double> atoms, std::vector<double> probs);

  static DiscreteDistribution point_mass(double c);
  /// Symmetric two-point law {-a, +a} with mass 1/2 each.
  static DiscreteDistribution symmetric_pair(double a);

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> probs() const noexcept { return probs_; }
  /// cumulative()[i] = P[X <= atoms()[i]].
  std::span<const double> cumulative() const noexcept { return cumulative_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mean() const;
  double second_moment() const;
  double variance() const;
  double expect(const std::function<double(double)>& g) const;

  CdfPair cdf_pair(double x) const;
  DiscreteDistribution scaled(double factor) const;

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  struct Validated {};
  DiscreteDistribution(Validated, std::vector<double> atoms,
                       std::vector<double> probs);
  void build_cumulative();

  std::vector<double> atoms_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;

  friend DiscreteDistribution convolve(const DiscreteDistribution&,
                                       const DiscreteDistribution&, std::size_t);
};

/// Law of X + Y for independent X ~ d1, Y ~ d2. Throws AtomCapExceeded when
/// |d1| * |d2| exceeds `cap` (use Monte Carlo instead).
DiscreteDistribution convolve(const DiscreteDistribution& d1,
                              const DiscreteDistribution& d2,
                              std::size_t cap = kDefaultAtomCap);

CdfPair cdf_pair(const DiscreteDistribution& d, double x);

/// i.i.d. inverse-CDF draws; identical (d, count, seed) gives identical output.
std::vector<double> sample(const DiscreteDistribution& d, std::size_t count,
                           std::uint64_t seed);

/// i.i.d. standard normal draws (Box-Muller on RandomStream uniforms).
std::vector<double> sample_standard_normal(std::size_t count, std::uint64_t seed);

}  // namespace cltcert
