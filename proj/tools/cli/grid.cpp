#include "grid.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace cltcert::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::size_t to_count(double v, const std::string& flag) {
  if (!(v >= 1.0) || v > 1e15 || v != std::floor(v)) {
    std::ostringstream msg;
    msg << flag << ": " << v << " is not a positive integer";
    throw UsageError(msg.str());
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

double parse_real(const std::string& text, const std::string& flag) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw UsageError(flag + ": cannot read \"" + text + "\" as a number");
  }
  return v;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_real(part, flag));
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw UsageError(flag + ": expected lo:hi, got \"" + text + "\"");
  const double lo = parse_real(parts[0], flag);
  const double hi = parse_real(parts[1], flag);
  if (hi < lo) throw UsageError(flag + ": range " + text + " is reversed");
  return {lo, hi};
}

std::vector<std::size_t> parse_count_grid(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> grid;
  if (text.find(':') != std::string::npos) {
    const auto [lo, hi] = parse_range(text, flag);
    to_count(lo, flag);
    to_count(hi, flag);
    const double start = std::log10(lo);
    const double stop = std::log10(hi);
    for (int i = 0;; ++i) {
      const double e = start + i / 4.0;
      if (e > stop + 1e-12) break;
      const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
      if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    if (grid.back() != static_cast<std::size_t>(hi)) grid.push_back(static_cast<std::size_t>(hi));
    return grid;
  }
  for (double v : parse_real_list(text, flag)) grid.push_back(to_count(v, flag));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw UsageError(flag + ": values must be strictly increasing");
  }
  return grid;
}

}  // namespace cltcert::cli
