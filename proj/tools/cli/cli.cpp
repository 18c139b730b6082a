#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cltcert/certify.hpp"
#include "cltcert/constants.hpp"
#include "cltcert/json_io.hpp"
#include "cltcert/kolmogorov.hpp"
#include "cltcert/random.hpp"
#include "cltcert/stein.hpp"
#include "cltcert/triangular_array.hpp"
#include "grid.hpp"
#include "svg.hpp"

namespace cltcert::cli {
namespace {

// Fully resolved experiment line. Everything here is embedded in the report,
// so a report can be re-run from its own "config" block.
struct RunConfig {
  std::string command;
  std::vector<double> alpha;
  std::optional<Json> spec;  // explicit array, normalized
  std::vector<std::size_t> n_grid;
  std::vector<double> eps_grid;
  std::vector<double> gamma;
  bool psi = false;
  std::string method = "auto";
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  double level = kDefaultConfidenceLevel;
  std::size_t cap = kDefaultAtomCap;
  double sigma = kDefaultSigma;
  std::optional<std::pair<double, double>> sigma_range;
  double sigma_step = 0.01;
  bool identities = false;
  double p = 1.0;
  bool rounded_constants = false;
  std::vector<double> z;
  std::vector<double> delta;
  bool indicator = false;
  double x_min = -8.0;
  double x_max = 8.0;
  double x_step = 0.01;
  std::string format = "json";
};

// Raw flag text as typed; resolved into a RunConfig after parsing.
struct RawFlags {
  std::string alpha, spec, n_grid, eps_grid, gamma, method, samples, seed, level, cap;
  std::string sigma, sigma_range, sigma_step, p, z, delta, x_min, x_max, x_step;
  std::string format, output, config;
  bool psi = false, identities = false, rounded = false, indicator = false, plot = false;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  Json results;
  Table table;
  std::string summary;
  bool failed = false;
  std::optional<Chart> chart;
};

bool uses_array(const std::string& command) {
  return command == "indices" || command == "distance" || command == "certify";
}

std::string label_of(const RunConfig& cfg, std::size_t i) {
  if (cfg.spec) return "explicit";
  return "alpha=" + report_text(cfg.alpha[i]);
}

std::vector<ArraySpec> arrays_of(const RunConfig& cfg) {
  if (cfg.spec) return {spec_from_json(*cfg.spec)};
  std::vector<ArraySpec> out;
  for (double a : cfg.alpha) out.push_back(ArraySpec::example_alpha(a));
  return out;
}

// ----- config <-> JSON ------------------------------------------------------

Json config_to_json(const RunConfig& c) {
  Json j{{"command", c.command}};
  auto array_fields = [&]() {
    if (c.spec) {
      j["spec"] = *c.spec;
    } else {
      j["alpha"] = c.alpha;
    }
  };
  auto mc_fields = [&]() {
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["level"] = c.level;
    j["cap"] = c.cap;
  };
  if (c.command == "indices") {
    array_fields();
    j["n_grid"] = c.n_grid;
    j["eps_grid"] = c.eps_grid;
    j["gamma"] = c.gamma;
    j["psi"] = c.psi;
  } else if (c.command == "distance") {
    array_fields();
    j["n_grid"] = c.n_grid;
    j["method"] = c.method;
    mc_fields();
  } else if (c.command == "stein-check") {
    j["z"] = c.z;
    j["delta"] = c.delta;
    j["indicator"] = c.indicator;
    j["x_min"] = c.x_min;
    j["x_max"] = c.x_max;
    j["x_step"] = c.x_step;
  } else if (c.command == "constants") {
    j["sigma"] = c.sigma;
    j["sigma_range"] =
        c.sigma_range ? Json{c.sigma_range->first, c.sigma_range->second} : Json(nullptr);
    j["sigma_step"] = c.sigma_step;
    j["identities"] = c.identities;
  } else if (c.command == "certify") {
    array_fields();
    j["n_grid"] = c.n_grid;
    j["eps_grid"] = c.eps_grid;
    j["method"] = c.method;
    mc_fields();
    j["sigma"] = c.sigma;
    j["rounded_constants"] = c.rounded_constants;
  } else if (c.command == "optimality") {
    j["p"] = c.p;
    j["alpha"] = c.alpha;
    j["sigma"] = c.sigma;
    j["rounded_constants"] = c.rounded_constants;
  }
  j["format"] = c.format;
  return j;
}

template <class T>
void read_field(const Json& j, const char* key, T& into) {
  if (!j.contains(key)) throw UsageError(std::string("config: missing field \"") + key + "\"");
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: field \"") + key + "\" has the wrong type");
  }
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  read_field(j, "command", c.command);
  auto array_fields = [&]() {
    if (j.contains("spec")) {
      c.spec = j["spec"];
    } else {
      read_field(j, "alpha", c.alpha);
    }
  };
  auto mc_fields = [&]() {
    read_field(j, "samples", c.samples);
    read_field(j, "seed", c.seed);
    read_field(j, "level", c.level);
    read_field(j, "cap", c.cap);
  };
  if (c.command == "indices") {
    array_fields();
    read_field(j, "n_grid", c.n_grid);
    read_field(j, "eps_grid", c.eps_grid);
    read_field(j, "gamma", c.gamma);
    read_field(j, "psi", c.psi);
  } else if (c.command == "distance") {
    array_fields();
    read_field(j, "n_grid", c.n_grid);
    read_field(j, "method", c.method);
    mc_fields();
  } else if (c.command == "stein-check") {
    read_field(j, "z", c.z);
    read_field(j, "delta", c.delta);
    read_field(j, "indicator", c.indicator);
    read_field(j, "x_min", c.x_min);
    read_field(j, "x_max", c.x_max);
    read_field(j, "x_step", c.x_step);
  } else if (c.command == "constants") {
    read_field(j, "sigma", c.sigma);
    if (j.contains("sigma_range") && !j["sigma_range"].is_null()) {
      std::vector<double> r;
      read_field(j, "sigma_range", r);
      if (r.size() != 2) throw UsageError("config: sigma_range needs two values");
      c.sigma_range = std::pair{r[0], r[1]};
    }
    read_field(j, "sigma_step", c.sigma_step);
    read_field(j, "identities", c.identities);
  } else if (c.command == "certify") {
    array_fields();
    read_field(j, "n_grid", c.n_grid);
    read_field(j, "eps_grid", c.eps_grid);
    read_field(j, "method", c.method);
    mc_fields();
    read_field(j, "sigma", c.sigma);
    read_field(j, "rounded_constants", c.rounded_constants);
  } else if (c.command == "optimality") {
    read_field(j, "p", c.p);
    read_field(j, "alpha", c.alpha);
    read_field(j, "sigma", c.sigma);
    read_field(j, "rounded_constants", c.rounded_constants);
  } else {
    throw UsageError("config: unknown command \"" + c.command + "\"");
  }
  read_field(j, "format", c.format);
  return c;
}

// ----- validation -----------------------------------------------------------

std::size_t parse_count(const std::string& text, const std::string& flag) {
  const double v = parse_real(text, flag);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
    throw UsageError(flag + ": expected a positive integer, got \"" + text + "\"");
  }
  return static_cast<std::size_t>(v);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void validate(RunConfig& c) {
  require(c.format == "json" || c.format == "csv", "--format must be json or csv");
  if (uses_array(c.command)) {
    if (c.spec) {
      const ArraySpec spec = spec_from_json(*c.spec);  // throws SpecError
      c.spec = to_json(spec);
      for (std::size_t n : c.n_grid) {
        require(spec.has_row(n), "--n-grid: the explicit array has no row " + std::to_string(n));
      }
    } else {
      require(!c.alpha.empty(), "--alpha: need at least one value");
      for (double a : c.alpha) ArraySpec::example_alpha(a);  // throws SpecError
    }
    require(!c.n_grid.empty(), "--n-grid: empty grid");
    for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
      require(c.n_grid[i] > c.n_grid[i - 1], "--n-grid: values must be strictly increasing");
    }
  }
  if (c.command == "indices" || c.command == "certify") {
    require(!c.eps_grid.empty(), "--eps-grid: empty grid");
    for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
      require(c.eps_grid[i] > 0.0, "--eps-grid: values must be > 0");
      require(i == 0 || c.eps_grid[i] < c.eps_grid[i - 1],
              "--eps-grid: values must decrease toward 0");
    }
  }
  if (c.command == "indices") {
    for (double g : c.gamma) require(g > 0.0 && std::isfinite(g), "--gamma: values must be > 0");
  }
  if (c.command == "distance" || c.command == "certify") {
    require(c.method == "auto" || c.method == "exact" || c.method == "mc",
            "--method must be auto, exact or mc");
    require(c.samples >= 1, "--samples must be >= 1");
    require(c.level > 0.0 && c.level < 1.0, "--level must lie in (0, 1)");
    require(c.cap >= 1, "--cap must be >= 1");
  }
  if (c.command == "constants" || c.command == "certify" || c.command == "optimality") {
    require(c.sigma > 0.0 && std::isfinite(c.sigma), "--sigma must be > 0");
  }
  if (c.command == "constants" && c.sigma_range) {
    require(c.sigma_range->first > 0.0, "--sigma-range: values must be > 0");
    require(c.sigma_step > 0.0, "--sigma-step must be > 0");
  }
  if (c.command == "optimality") {
    require(c.p >= 0.0 && std::isfinite(c.p), "--p must be >= 0");
    require(!c.alpha.empty(), "--alpha: need at least one value");
    for (std::size_t i = 0; i < c.alpha.size(); ++i) {
      require(c.alpha[i] > 0.0 && c.alpha[i] <= 0.5, "--alpha: values must lie in (0, 1/2]");
      require(i == 0 || c.alpha[i] < c.alpha[i - 1], "--alpha: values must decrease toward 0");
    }
  }
  if (c.command == "stein-check") {
    require(!c.z.empty(), "--z: need at least one value");
    for (double d : c.delta) require(d > 0.0, "--delta: values must be > 0");
    require(c.delta.size() + (c.indicator ? 1 : 0) > 0, "stein-check: nothing to check");
    require(c.x_step > 0.0 && c.x_max >= c.x_min, "stein-check: bad x grid");
    require((c.x_max - c.x_min) / c.x_step <= 1e6, "stein-check: x grid too large");
  }
}

RunConfig resolve(const std::string& command, const RawFlags& raw) {
  RunConfig c;
  c.command = command;
  if (!raw.format.empty()) c.format = raw.format;

  if (uses_array(command)) {
    require(raw.alpha.empty() || raw.spec.empty(), "give either --alpha or --spec, not both");
    if (!raw.spec.empty()) {
      std::ifstream in(raw.spec);
      require(static_cast<bool>(in), "--spec: cannot open " + raw.spec);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("--spec: " + raw.spec + " is not valid JSON: " + e.what());
      }
      c.spec = to_json(spec_from_json(j));
    } else {
      c.alpha = raw.alpha.empty() ? std::vector<double>{0.5} : parse_real_list(raw.alpha, "--alpha");
    }
    if (!raw.n_grid.empty()) {
      c.n_grid = parse_count_grid(raw.n_grid, "--n-grid");
    } else if (c.spec) {
      for (const auto& r : (*c.spec)["rows"]) c.n_grid.push_back(r["n"].get<std::size_t>());
    } else if (command == "indices") {
      c.n_grid = default_n_grid();
    } else {
      c.n_grid = {10, 100, 1000};
    }
    c.eps_grid = raw.eps_grid.empty() ? default_epsilon_grid()
                                      : parse_real_list(raw.eps_grid, "--eps-grid");
  }
  if (command == "indices") {
    c.gamma = raw.gamma.empty() ? std::vector<double>{0.5} : parse_real_list(raw.gamma, "--gamma");
    c.psi = raw.psi;
  }
  if (!raw.method.empty()) c.method = raw.method;
  if (!raw.samples.empty()) c.samples = parse_count(raw.samples, "--samples");
  if (!raw.seed.empty()) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(raw.seed, &used);
      require(used == raw.seed.size(), "");
    } catch (const std::exception&) {
      throw UsageError("--seed: expected a non-negative integer, got \"" + raw.seed + "\"");
    }
  }
  if (!raw.level.empty()) c.level = parse_real(raw.level, "--level");
  if (!raw.cap.empty()) c.cap = parse_count(raw.cap, "--cap");
  if (!raw.sigma.empty()) c.sigma = parse_real(raw.sigma, "--sigma");
  if (!raw.sigma_range.empty()) c.sigma_range = parse_range(raw.sigma_range, "--sigma-range");
  if (!raw.sigma_step.empty()) c.sigma_step = parse_real(raw.sigma_step, "--sigma-step");
  c.identities = raw.identities;
  if (!raw.p.empty()) c.p = parse_real(raw.p, "--p");
  c.rounded_constants = raw.rounded;
  if (command == "optimality") {
    c.alpha = raw.alpha.empty() ? std::vector<double>{0.1, 0.01, 0.001}
                                : parse_real_list(raw.alpha, "--alpha");
  }
  if (command == "stein-check") {
    c.z = raw.z.empty() ? std::vector<double>{0.0} : parse_real_list(raw.z, "--z");
    c.delta = raw.delta.empty() ? std::vector<double>{1.0} : parse_real_list(raw.delta, "--delta");
    c.indicator = raw.indicator;
    if (!raw.x_min.empty()) c.x_min = parse_real(raw.x_min, "--x-min");
    if (!raw.x_max.empty()) c.x_max = parse_real(raw.x_max, "--x-max");
    if (!raw.x_step.empty()) c.x_step = parse_real(raw.x_step, "--x-step");
  }
  return c;
}

// ----- commands ---------------------------------------------------------------

double c_tilde_for(const RunConfig& c) {
  return c.rounded_constants ? kQuotedCTildeBound : constants_pipeline(c.sigma).c_tilde;
}

MethodPolicy policy_of(const RunConfig& c) {
  MethodPolicy p;
  p.mode = c.method == "mc"      ? MethodPolicy::Mode::mc
           : c.method == "exact" ? MethodPolicy::Mode::exact
                                 : MethodPolicy::Mode::automatic;
  p.cap = c.cap;
  p.samples = c.samples;
  p.seed = c.seed;
  p.level = c.level;
  return p;
}

std::string opt_text(const std::optional<double>& v) { return v ? report_text(*v) : ""; }

Report run_indices(const RunConfig& c) {
  Report rep;
  rep.table.header = {"array", "index", "weight", "n", "epsilon", "value", "limit_estimate",
                      "closed_form"};
  rep.results = Json::array();
  Chart chart{"Lindeberg and relaxed Lindeberg sums", "n", "value", true, false, {}, {}};
  std::ostringstream summary;
  summary << "indices:";
  const auto arrays = arrays_of(c);
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const std::string label = label_of(c, i);
    std::vector<IndexReport> reports;
    reports.push_back(lin_index(arrays[i], c.eps_grid, c.n_grid));
    for (double g : c.gamma) {
      reports.push_back(relaxed_index(arrays[i], WeightFunction::phi_gamma(g), c.n_grid));
    }
    if (c.psi) reports.push_back(relaxed_index(arrays[i], WeightFunction::psi_half(), c.n_grid));

    Json entry{{"array", label}};
    Json relaxed = Json::array();
    summary << " [" << label << "]";
    for (const auto& r : reports) {
      if (r.index == "lindeberg") {
        entry["lindeberg"] = to_json(r);
      } else {
        relaxed.push_back(to_json(r));
      }
      const std::string name = r.index == "lindeberg" ? "Lin" : "RelLin[" + r.weight + "]";
      summary << " " << name << " ~ " << report_text(r.limit_estimate);
      if (r.closed_form) summary << " (closed form " << report_text(*r.closed_form) << ")";
      Series series{label + " " + name, {}};
      for (const auto& p : r.finite_values) {
        rep.table.rows.push_back({label, r.index, r.weight, std::to_string(p.n),
                                  report_text(p.parameter), report_text(p.value),
                                  report_text(r.limit_estimate), opt_text(r.closed_form)});
        // Plot the Lindeberg sums at the smallest eps only.
        if (r.index != "lindeberg" || p.parameter == c.eps_grid.back()) {
          series.points.emplace_back(static_cast<double>(p.n), p.value);
        }
      }
      if (r.index == "lindeberg") series.name += " eps=" + report_text(c.eps_grid.back());
      chart.series.push_back(std::move(series));
    }
    entry["relaxed"] = relaxed;
    rep.results.push_back(entry);
  }
  rep.summary = summary.str();
  rep.chart = std::move(chart);
  return rep;
}

void distance_rows(Table& t, const std::string& label, const KCurve& curve,
                   const std::vector<std::string>& extra) {
  for (const auto& p : curve.points) {
    std::vector<std::string> row{label,
                                 std::to_string(p.n),
                                 to_string(p.method),
                                 report_text(p.value),
                                 p.confidence ? report_text(p.confidence->level) : "",
                                 p.confidence ? report_text(p.confidence->half_width) : "",
                                 p.samples ? std::to_string(*p.samples) : "",
                                 p.seed ? std::to_string(*p.seed) : ""};
    row.insert(row.end(), extra.begin(), extra.end());
    t.rows.push_back(std::move(row));
  }
}

Report run_distance(const RunConfig& c) {
  Report rep;
  rep.table.header = {"array", "n", "method", "value", "level", "half_width", "samples",
                      "seed", "plateau"};
  rep.results = Json::array();
  Chart chart{"Kolmogorov distance to the standard normal", "n", "K", true, false, {}, {}};
  std::ostringstream summary;
  summary << "distance:";
  const auto arrays = arrays_of(c);
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const KCurve curve = k_curve(arrays[i], c.n_grid, policy_of(c));
    const std::string label = label_of(c, i);
    rep.results.push_back(Json{{"array", label}, {"curve", to_json(curve)}});
    distance_rows(rep.table, label, curve, {report_text(curve.plateau)});
    summary << " [" << label << "] plateau K ~ " << report_text(curve.plateau);
    if (curve.plateau_half_width > 0) summary << " +- " << report_text(curve.plateau_half_width);
    Series s{label, {}};
    for (const auto& p : curve.points) s.points.emplace_back(static_cast<double>(p.n), p.value);
    chart.series.push_back(std::move(s));
  }
  rep.summary = summary.str();
  rep.chart = std::move(chart);
  return rep;
}

Report run_stein_check(const RunConfig& c) {
  Report rep;
  rep.table.header = {"h", "grid_points", "sup_f2", "bound_f2", "osc_f1", "closed_form_gap",
                      "pass"};
  rep.results = Json::array();
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor((c.x_max - c.x_min) / c.x_step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(c.x_min + static_cast<double>(i) * c.x_step);

  std::vector<TestFunction> functions;
  for (double z : c.z) {
    for (double d : c.delta) functions.push_back(TestFunction::smoothstep(z, d));
  }
  if (c.indicator) {
    for (double z : c.z) functions.push_back(TestFunction::indicator(z));
  }
  std::size_t passed = 0;
  for (const auto& h : functions) {
    const BoundSuiteReport b = bound_suite(h, grid);
    Json entry = to_json(b);
    std::optional<double> gap;
    bool ok = b.pass();
    if (h.kind() == TestFunction::Kind::indicator) {
      // Closed form against the quadrature solution on the same grid.
      const SteinSolution solution(h);
      double worst = 0.0;
      for (double x : grid) {
        if (x == h.z()) continue;
        worst = std::max(worst, std::abs(solution.f(x) - indicator_solution(h.z(), x).f));
      }
      gap = worst;
      ok = ok && worst < 1e-8;
      entry["closed_form_gap"] = report_number(worst);
      entry["pass"] = ok;
    }
    passed += ok ? 1 : 0;
    rep.failed = rep.failed || !ok;
    rep.results.push_back(entry);
    rep.table.rows.push_back({b.h, std::to_string(b.grid_points), report_text(b.sup_f2),
                              opt_text(b.bound_f2), report_text(b.osc_f1), opt_text(gap),
                              ok ? "true" : "false"});
  }
  rep.summary = "stein-check: " + std::to_string(passed) + "/" +
                std::to_string(functions.size()) + " test functions within the derivative bounds";
  return rep;
}

Report run_constants(const RunConfig& c) {
  Report rep;
  rep.table.header = {"section", "name", "value"};
  const ConstantsRecord rec = constants_pipeline(c.sigma);
  Json results{{"record", to_json(rec)}};
  auto row = [&](const std::string& section, const std::string& name, const std::string& v) {
    rep.table.rows.push_back({section, name, v});
  };
  const std::pair<const char*, double> fields[] = {
      {"sigma", rec.sigma},       {"R", rec.R},
      {"integral_jump", rec.integral_jump}, {"tv_muhat", rec.tv_muhat},
      {"integral_f2", rec.integral_f2},     {"c_psi", rec.c_psi},
      {"c_half", rec.c_half},     {"c_tilde", rec.c_tilde},
      {"residual_integral_jump", rec.jump_residual},
      {"residual_tv_muhat", rec.tv_residual},
      {"residual_integral_f2", rec.f2_residual}};
  for (const auto& [name, v] : fields) row("record", name, report_text(v));

  const bool near = std::abs(rec.c_psi - kQuotedCPsi) <= 0.02;
  const bool half = rec.c_half <= kQuotedCHalfBound;
  const bool tilde = rec.c_tilde >= kQuotedCTildeBound;
  results["quoted"] = Json{{"c_psi_near_20.19", near},
                           {"c_half_at_most_30.3", half},
                           {"c_tilde_at_least_0.033", tilde}};
  row("quoted", "c_psi_near_20.19", near ? "true" : "false");
  row("quoted", "c_half_at_most_30.3", half ? "true" : "false");
  row("quoted", "c_tilde_at_least_0.033", tilde ? "true" : "false");

  std::ostringstream summary;
  summary << "constants: sigma=" << report_text(rec.sigma) << " R=" << report_text(rec.R)
          << " c_psi=" << report_text(rec.c_psi) << " c_half=" << report_text(rec.c_half)
          << " c_tilde=" << report_text(rec.c_tilde);

  if (c.sigma_range) {
    const SigmaScan scan = sigma_scan(c.sigma_range->first, c.sigma_range->second, c.sigma_step);
    results["scan"] = to_json(scan);
    Chart chart{"C_psi over the normal family", "sigma", "C_psi", false, false, {}, {}};
    Series s{"C_psi(sigma)", {}};
    for (const auto& [sigma, cp] : scan.table) {
      row("scan", report_text(sigma), report_text(cp));
      s.points.emplace_back(sigma, cp);
    }
    chart.series.push_back(std::move(s));
    rep.chart = std::move(chart);
    summary << "; scan best sigma=" << report_text(scan.best_sigma)
            << " c_psi=" << report_text(scan.best_c_psi);
  }
  if (c.identities) {
    const IdentityReport ids = identity_checks();
    results["identities"] = to_json(ids);
    for (const auto& chk : ids.checks) {
      row("identity", chk.name + " a=" + report_text(chk.parameter), report_text(chk.residual));
    }
    row("identity", "sandwich_lower_violation", report_text(ids.sandwich.max_lower_violation));
    row("identity", "sandwich_upper_violation", report_text(ids.sandwich.max_upper_violation));
    rep.failed = !ids.pass();
    summary << "; identities " << (ids.pass() ? "pass" : "FAIL");
  }
  rep.results = results;
  rep.summary = summary.str();
  return rep;
}

Report run_certify(const RunConfig& c) {
  Report rep;
  rep.table.header = {"array", "n", "method", "value", "level", "half_width", "samples",
                      "seed", "lower", "upper", "verdict"};
  rep.results = Json::array();
  CertifyConfig cfg;
  cfg.k_grid = c.n_grid;
  cfg.epsilon_grid = c.eps_grid;
  cfg.policy = policy_of(c);
  cfg.sigma = c.sigma;
  cfg.rounded_constants = c.rounded_constants;
  Chart chart{"Certified bounds and Kolmogorov distances", "n", "K", true, false, {}, {}};
  std::ostringstream summary;
  summary << "certify:";
  const auto arrays = arrays_of(c);
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const BoundCertificate cert = certify_bounds(arrays[i], cfg);
    const std::string label = label_of(c, i);
    Json j = to_json(cert);
    j["array"] = label;
    rep.results.push_back(j);
    distance_rows(rep.table, label, cert.empirical,
                  {report_text(cert.lower), report_text(cert.upper), to_string(cert.verdict)});
    rep.failed = rep.failed || cert.verdict == Verdict::inconsistent;
    summary << " [" << label << "] " << report_text(cert.lower) << " <= K <= "
            << report_text(cert.upper) << ", plateau " << report_text(cert.empirical.plateau)
            << ": " << to_string(cert.verdict);
    Series s{label + " K", {}};
    for (const auto& p : cert.empirical.points) {
      s.points.emplace_back(static_cast<double>(p.n), p.value);
    }
    chart.series.push_back(std::move(s));
    if (arrays.size() == 1) {
      chart.levels = {{"lower", cert.lower}, {"upper", cert.upper}};
    }
  }
  rep.summary = summary.str();
  rep.chart = std::move(chart);
  return rep;
}

Report run_optimality(const RunConfig& c) {
  Report rep;
  rep.table.header = {"alpha", "lower", "ratio", "growth_per_decade"};
  const double c_tilde = c_tilde_for(c);
  const auto table = optimality_scan(c.p, c.alpha, c_tilde);
  Json rows = to_json(table);
  Chart chart{"lower(alpha) / alpha^(1+p)", "alpha", "ratio", true, true, {}, {}};
  Series s{"p=" + report_text(c.p), {}};
  double min_growth = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::optional<double> growth;
    if (i > 0) {
      const double decades = std::log10(table[i - 1].alpha / table[i].alpha);
      growth = std::pow(table[i].ratio / table[i - 1].ratio, 1.0 / decades);
      min_growth = std::min(min_growth, *growth);
    }
    rows[i]["growth_per_decade"] = growth ? report_number(*growth) : Json(nullptr);
    rep.table.rows.push_back({report_text(table[i].alpha), report_text(table[i].lower),
                              report_text(table[i].ratio), opt_text(growth)});
    s.points.emplace_back(table[i].alpha, table[i].ratio);
  }
  chart.series.push_back(std::move(s));
  rep.chart = std::move(chart);
  rep.results = Json{{"p", report_number(c.p)},
                     {"c_tilde", report_number(c_tilde)},
                     {"table", rows}};
  std::ostringstream summary;
  summary << "optimality: p=" << report_text(c.p) << ", ratio "
          << report_text(table.front().ratio) << " -> " << report_text(table.back().ratio);
  if (std::isfinite(min_growth)) {
    summary << ", smallest growth per decade " << report_text(min_growth);
  }
  rep.summary = summary.str();
  return rep;
}

Report dispatch(const RunConfig& c) {
  if (c.command == "indices") return run_indices(c);
  if (c.command == "distance") return run_distance(c);
  if (c.command == "stein-check") return run_stein_check(c);
  if (c.command == "constants") return run_constants(c);
  if (c.command == "certify") return run_certify(c);
  if (c.command == "optimality") return run_optimality(c);
  throw UsageError("unknown command \"" + c.command + "\"");
}

// ----- rendering ---------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render(const RunConfig& c, const Report& rep) {
  const Json config = config_to_json(c);
  if (c.format == "json") {
    const Json doc{{"command", c.command},
                   {"generator", kGeneratorName},
                   {"seed", c.seed},
                   {"config", config},
                   {"results", rep.results}};
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "# cltcert " << c.command << "\n";
  out << "# generator: " << kGeneratorName << "\n";
  out << "# seed: " << c.seed << "\n";
  out << "# config: " << config.dump() << "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\n";
  };
  line(rep.table.header);
  for (const auto& r : rep.table.rows) line(r);
  return out.str();
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') {
      const Json doc = Json::parse(text);
      if (!doc.contains("config")) throw UsageError("--config: " + path + " has no config block");
      return doc["config"];
    }
    std::istringstream lines(text);
    std::string l;
    const std::string tag = "# config: ";
    while (std::getline(lines, l)) {
      if (l.rfind(tag, 0) == 0) return Json::parse(l.substr(tag.size()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("--config: " + path + ": " + e.what());
  }
  throw UsageError("--config: no embedded config found in " + path);
}

std::string plot_path(const std::string& output) {
  const auto slash = output.find_last_of('/');
  const auto dot = output.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return output.substr(0, dot) + ".svg";
  }
  return output + ".svg";
}

void add_array_flags(CLI::App* sub, RawFlags& raw) {
  sub->add_option("--alpha", raw.alpha, "alpha values of the example array, comma list (default 0.5)");
  sub->add_option("--spec", raw.spec, "JSON file with an explicit array");
  sub->add_option("--n-grid", raw.n_grid, "row lengths: lo:hi (4 per decade) or comma list");
}

void add_mc_flags(CLI::App* sub, RawFlags& raw) {
  sub->add_option("--method", raw.method, "auto | exact | mc (default auto)");
  sub->add_option("--samples", raw.samples, "Monte-Carlo samples per row (default 1e6)");
  sub->add_option("--seed", raw.seed, "random seed (default 0)");
  sub->add_option("--level", raw.level, "DKW confidence level (default 0.99)");
  sub->add_option("--cap", raw.cap, "atom budget for exact convolution (default 2^24)");
}

void add_output_flags(CLI::App* app, RawFlags& raw) {
  app->add_option("--format", raw.format, "json | csv (default json)");
  app->add_option("--output", raw.output, "report path (default: standard output)");
  app->add_flag("--plot", raw.plot, "also write an SVG chart next to --output");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantitative CLT certificates for triangular arrays", "cltcert"};
  app.require_subcommand(0, 1);
  RawFlags raw;
  app.add_option("--config", raw.config, "re-run the config embedded in a JSON or CSV report");
  add_output_flags(&app, raw);

  auto* indices = app.add_subcommand("indices", "Lindeberg and relaxed Lindeberg indices");
  add_array_flags(indices, raw);
  indices->add_option("--eps-grid", raw.eps_grid, "decreasing epsilon list (default 0.2,...,0.01)");
  indices->add_option("--gamma", raw.gamma, "gamma values for phi_gamma (default 0.5)");
  indices->add_flag("--psi", raw.psi, "also compute the index for psi_1/2");

  auto* distance = app.add_subcommand("distance", "Kolmogorov distance of row sums to N(0,1)");
  add_array_flags(distance, raw);
  add_mc_flags(distance, raw);

  auto* stein = app.add_subcommand("stein-check", "Stein solution derivative bounds");
  stein->add_option("--z", raw.z, "step locations, comma list (default 0)");
  stein->add_option("--delta", raw.delta, "smoothstep widths, comma list (default 1)");
  stein->add_flag("--indicator", raw.indicator, "also check indicators 1{x <= z}");
  stein->add_option("--x-min", raw.x_min, "grid start (default -8)");
  stein->add_option("--x-max", raw.x_max, "grid end (default 8)");
  stein->add_option("--x-step", raw.x_step, "grid step (default 0.01)");

  auto* constants = app.add_subcommand("constants", "constants from the normal family");
  constants->add_option("--sigma", raw.sigma, "sigma (default 1.7)");
  constants->add_option("--sigma-range", raw.sigma_range, "scan range lo:hi");
  constants->add_option("--sigma-step", raw.sigma_step, "scan step (default 0.01)");
  constants->add_flag("--identities", raw.identities, "run the identity and sandwich checks");

  auto* certify = app.add_subcommand("certify", "two-sided certificate with empirical K");
  add_array_flags(certify, raw);
  add_mc_flags(certify, raw);
  certify->add_option("--eps-grid", raw.eps_grid, "epsilon grid for explicit arrays");
  certify->add_option("--sigma", raw.sigma, "sigma for the constants (default 1.7)");
  certify->add_flag("--rounded-constants", raw.rounded, "use c_tilde = 0.033");

  auto* optimality = app.add_subcommand("optimality", "lower(alpha) / alpha^(1+p) diagnostic");
  optimality->add_option("--p", raw.p, "exponent p >= 0 (default 1)");
  optimality->add_option("--alpha", raw.alpha, "decreasing alpha list (default 0.1,0.01,0.001)");
  optimality->add_option("--sigma", raw.sigma, "sigma for the constants (default 1.7)");
  optimality->add_flag("--rounded-constants", raw.rounded, "use c_tilde = 0.033");

  for (auto* sub : {indices, distance, stein, constants, certify, optimality}) {
    add_output_flags(sub, raw);
  }

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  try {
    const auto subs = app.get_subcommands();
    if (!raw.config.empty()) {
      if (!subs.empty()) throw UsageError("--config cannot be combined with a subcommand");
      config = config_from_json(load_config(raw.config));
      if (!raw.format.empty()) config.format = raw.format;
    } else {
      if (subs.empty()) throw UsageError("no subcommand given");
      config = resolve(subs.front()->get_name(), raw);
    }
    validate(config);
    if (raw.plot && raw.output.empty()) throw UsageError("--plot needs --output");
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n" << "run 'cltcert --help' for usage\n";
    return kExitUsage;
  }

  Report report;
  try {
    report = dispatch(config);
  } catch (const IntegrationError& e) {
    err << "computation failed: " << e.what() << "\n";
    return kExitFailure;
  } catch (const BracketError& e) {
    err << "computation failed: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << "\n";
    return kExitFailure;
  }

  const std::string text = render(config, report);
  std::ostream& notes = raw.output.empty() ? err : out;
  if (raw.output.empty()) {
    out << text;
  } else {
    std::ofstream file(raw.output, std::ios::binary);
    file << text;
    if (!file) {
      err << "computation failed: cannot write " << raw.output << "\n";
      return kExitFailure;
    }
  }
  if (raw.plot) {
    if (!report.chart) {
      notes << "warning: no chart for " << config.command << "\n";
    } else {
      try {
        const std::string path = plot_path(raw.output);
        std::ofstream svg(path, std::ios::binary);
        svg << render_svg(*report.chart);
        if (!svg) throw std::runtime_error("cannot write " + path);
      } catch (const std::exception& e) {
        notes << "warning: plot skipped: " << e.what() << "\n";
      }
    }
  }
  notes << report.summary;
  if (!raw.output.empty()) notes << "; wrote " << raw.output;
  notes << "\n";
  return report.failed ? kExitFailure : kExitOk;
}

}  // namespace cltcert::cli
