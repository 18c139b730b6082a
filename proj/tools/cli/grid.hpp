#pragma once

// Grid syntax shared by the command-line flags:
//   "1e2:1e5"         geometric, four points per decade, both ends included
//   "10,100,2.5e3"    explicit comma list; scientific notation accepted

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cltcert::cli {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double parse_real(const std::string& text, const std::string& flag);
std::vector<double> parse_real_list(const std::string& text, const std::string& flag);
/// Counts (positive integers) as a comma list or a lo:hi geometric range.
std::vector<std::size_t> parse_count_grid(const std::string& text, const std::string& flag);
/// "lo:hi" as two reals.
std::pair<double, double> parse_range(const std::string& text, const std::string& flag);

}  // namespace cltcert::cli
