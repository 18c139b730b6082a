// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cltcert/certify.hpp"
#include "cltcert/constants.hpp"
#include "cltcert/kolmogorov.hpp"
#include "cltcert/stein.hpp"
#include "cltcert/triangular_array.hpp"

namespace fs = std::filesystem;
using namespace cltcert;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

// Central differences with Richardson extrapolation.
double fd_derivative(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  const double d1 = central(h), d2 = central(h / 2), d4 = central(h / 4);
  const double r1 = (4 * d2 - d1) / 3, r2 = (4 * d4 - d2) / 3;
  return (16 * r2 - r1) / 15;
}

Outcome c1_root() {
  const auto r = find_R(1.7);
  return {r.root > 1.4912 && r.root < 1.4914, fmt("R_1.7 = %.10f", r.root)};
}

Outcome c2_pipeline() {
  const auto rec = constants_pipeline(1.7);
  const bool ok = std::abs(rec.c_psi - 20.19) <= 0.02 && rec.c_half <= 30.3 &&
                  rec.c_tilde >= 0.033 && std::abs(rec.tv_muhat - 2.0) <= 1e-8 &&
                  rec.jump_residual <= 1e-6 && rec.f2_residual <= 1e-6;
  return {ok, fmt("c_psi = %.6f, c_half = %.6f, c_tilde = %.8f, tv = %.12f", rec.c_psi,
                  rec.c_half, rec.c_tilde, rec.tv_muhat) +
                  fmt(", residuals %.1e / %.1e", rec.jump_residual, rec.f2_residual)};
}

Outcome c3_indices() {
  Outcome o{true, ""};
  for (double alpha : {0.25, 0.5}) {
    const Row row = build_row(ArraySpec::example_alpha(alpha), 100000);
    const double tail = lindeberg_tail(row, 0.1);
    const double tail_limit = lindeberg_tail_limit(alpha, 0.1);
    const double rel = relaxed_sum(row, WeightFunction::phi_gamma(0.5));
    const double rel_closed = relaxed_closed_form(alpha, 0.5);
    o.pass = o.pass && std::abs(tail - tail_limit) <= 0.005 && std::abs(rel - rel_closed) <= 0.005;
    o.detail += fmt("alpha=%.2f: L(0.1) = %.6f vs %.6f, RelLin = %.7f", alpha, tail, tail_limit,
                    rel) +
                fmt(" vs %.7f; ", rel_closed);
  }
  return o;
}

Outcome c4_stein() {
  const std::vector<TestFunction> smooth{
      TestFunction::smoothstep(0.0, 1.0), TestFunction::smoothstep(1.0, 0.25),
      TestFunction::smoothstep(-1.5, 0.5), TestFunction::smoothstep(2.0, 2.0),
      TestFunction::smoothstep(0.3, 0.1)};
  double identity = 0.0;
  for (const auto& h : smooth) {
    const SteinSolution sol(h);
    const double step = 0.02 * std::min(1.0, h.delta());
    for (double x : grid(-6, 6, 0.25)) {
      const double fd = fd_derivative([&](double t) { return sol.f(t); }, x, step);
      identity = std::max(identity, std::abs(fd - (x * sol.f(x) + h(x) - h.expected())));
    }
  }
  const auto suite_grid = grid(-8, 8, 0.01);
  bool suites = true;
  double worst_osc = 0.0, worst_f2_margin = -std::numeric_limits<double>::infinity();
  std::vector<TestFunction> all = smooth;
  for (double z : {-1.0, 0.0, 2.0}) all.push_back(TestFunction::indicator(z));
  for (const auto& h : all) {
    const auto r = bound_suite(h, suite_grid);
    suites = suites && r.pass();
    worst_osc = std::max(worst_osc, r.osc_f1);
    if (r.bound_f2) worst_f2_margin = std::max(worst_f2_margin, r.sup_f2 - *r.bound_f2);
  }
  double closed_gap = 0.0;
  for (double z : {-1.0, 0.0, 2.0}) {
    const SteinSolution sol(TestFunction::indicator(z));
    for (double x : grid(-4, 4, 0.05)) {
      const auto c = indicator_solution(z, x);
      const auto q = sol.eval(x);
      closed_gap = std::max({closed_gap, std::abs(c.f - q.f), std::abs(c.f1 - q.f1)});
    }
  }
  const bool ok = identity < 1e-8 && suites && worst_osc <= 1.0 + 1e-9 &&
                  worst_f2_margin <= 1e-9 && closed_gap < 1e-8;
  return {ok, fmt("identity residual %.2e, max osc(f') %.9f, max sup|f''| - 2|h'| %.3e, "
                  "indicator closed-form gap %.2e",
                  identity, worst_osc, worst_f2_margin, closed_gap)};
}

Outcome c5_identities() {
  const auto r = identity_checks();
  double basic = 0.0, fourier = 0.0;
  bool basic_ok = true, fourier_ok = true;
  for (const auto& c : r.checks) {
    if (c.name.rfind("basic_relation", 0) == 0) {
      basic = std::max(basic, c.residual);
      basic_ok = basic_ok && c.residual < 1e-6;
    } else {
      fourier = std::max(fourier, c.residual);
      fourier_ok = fourier_ok && c.residual < 1e-8;
    }
  }
  const bool ok = r.sandwich.pass() && r.sandwich.slack == 1e-12 && basic_ok && fourier_ok &&
                  r.checks.size() == 6;
  return {ok, fmt("sandwich violations %.1e / %.1e over %.0f points, ",
                  r.sandwich.max_lower_violation, r.sandwich.max_upper_violation,
                  static_cast<double>(r.sandwich.points)) +
                  fmt("basicRelation %.2e, FourTransl %.2e", basic, fourier)};
}

Outcome c6_kolmogorov() {
  const double binomial =
      k_distance(row_sum_exact(Row(4, DiscreteDistribution::symmetric_pair(0.5)))).value;
  const Row row = build_row(ArraySpec::example_alpha(0.5), 8);
  const double exact = k_distance(row_sum_exact(row)).value;
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = k_distance(row_sum_samples(row, 10000, seed), 0.99);
    if (std::abs(r.value - exact) <= r.confidence->half_width) ++inside;
  }
  return {binomial == 0.1875 && inside >= 99,
          fmt("binomial K = %.17g, n=8 exact K = %.6f, %.0f/100 trials within DKW band", binomial,
              exact, inside)};
}

Outcome c7_certificate() {
  Outcome o{true, ""};
  for (double alpha : {0.25, 0.5}) {
    CertifyConfig config;
    config.k_grid = {2000};
    config.policy.mode = MethodPolicy::Mode::mc;
    config.policy.samples = 1'000'000;
    config.policy.seed = 20240;
    const auto cert = certify_bounds(ArraySpec::example_alpha(alpha), config);
    const auto& p = cert.empirical.points.at(0);
    const double hw = p.confidence ? p.confidence->half_width : 0.0;
    const double lower = cert.c_tilde * relaxed_closed_form(alpha, 0.5);
    const bool in_band = p.value >= lower - (hw + 0.005) && p.value <= alpha + (hw + 0.005);
    o.pass = o.pass && in_band && cert.verdict == Verdict::consistent;
    o.detail += fmt("alpha=%.2f: K(2000) = %.5f +- %.5f in [%.6f, ", alpha, p.value, hw, lower) +
                fmt("%.2f], verdict ", alpha) + to_string(cert.verdict) + "; ";
  }
  return o;
}

Outcome c8_optimality() {
  const double c_tilde = constants_pipeline(1.7).c_tilde;
  const auto rows = optimality_scan(1.0, {0.1, 0.01, 0.001}, c_tilde);
  double min_growth = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    min_growth = std::min(min_growth, rows[i].ratio / rows[i - 1].ratio);
  }
  return {min_growth >= 8.0, fmt("ratios %.5f, %.5f, %.5f; smallest growth per decade ",
                                 rows[0].ratio, rows[1].ratio, rows[2].ratio) +
                                 fmt("%.4f", min_growth)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome c9_determinism() {
  const fs::path dir = fs::temp_directory_path() / "cltcert_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> runs{
      {"indices", "--alpha", "0.25,0.5", "--n-grid", "1e2:1e4", "--psi"},
      {"distance", "--alpha", "0.5", "--n-grid", "8,200", "--samples", "20000", "--cap", "65536",
       "--seed", "9"},
      {"stein-check", "--z", "-1,0,2", "--delta", "1,0.25", "--indicator", "--x-step", "0.05"},
      {"constants", "--sigma", "1.7", "--sigma-range", "1.6:1.8", "--identities"},
      {"certify", "--alpha", "0.25,0.5", "--n-grid", "10,100", "--samples", "20000", "--cap",
       "65536", "--seed", "3"},
      {"optimality", "--p", "1", "--alpha", "0.1,0.01,0.001"}};
  Outcome o{true, ""};
  int index = 0;
  for (auto args : runs) {
    for (const std::string ext : {"json", "csv"}) {
      const std::string first = (dir / (std::to_string(index) + "a." + ext)).string();
      const std::string second = (dir / (std::to_string(index) + "b." + ext)).string();
      std::vector<std::string> a = args;
      a.insert(a.end(), {"--format", ext, "--output", first});
      std::ostringstream out, err;
      const int c1 = cli::run(a, out, err);
      const int c2 = cli::run({"--config", first, "--output", second}, out, err);
      const bool same = c1 == 0 && c2 == 0 && slurp(first) == slurp(second) &&
                        !slurp(first).empty();
      o.pass = o.pass && same;
      o.detail += args.front() + "/" + ext + (same ? " ok" : " DIFFERS") + "; ";
    }
    ++index;
  }
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // runtime limit, or infinity when none is set
  Outcome (*check)();
};

}  // namespace

int main() {
  constexpr double kNoLimit = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria{
      {1, "R_sigma bracket", 1.0, c1_root},
      {2, "constant pipeline", 10.0, c2_pipeline},
      {3, "index closed forms", 30.0, c3_indices},
      {4, "Stein suite", 30.0, c4_stein},
      {5, "sandwich and identities", 30.0, c5_identities},
      {6, "exact Kolmogorov oracle", kNoLimit, c6_kolmogorov},
      {7, "two-sided certificate", 300.0, c7_certificate},
      {8, "optimality trend", kNoLimit, c8_optimality},
      {9, "determinism", kNoLimit, c9_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    while (o.detail.size() >= 2 && o.detail.compare(o.detail.size() - 2, 2, "; ") == 0) {
      o.detail.resize(o.detail.size() - 2);
    }
    std::printf("[%s] %d %s: %s (%.2f s", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds);
    if (std::isfinite(c.budget_s)) std::printf(", limit %.0f s%s", c.budget_s, in_time ? "" : " EXCEEDED");
    std::printf(")\n");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
