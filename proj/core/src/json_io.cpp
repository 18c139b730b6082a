#include "cltcert/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace cltcert {
namespace {

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() && *end == '\0') return v;
  }
  throw DistributionError(std::string("distribution: ") + what + " entry is not a number: " +
                          j.dump());
}

template <class T>
Json optional_number(const std::optional<T>& v) {
  return v ? report_number(*v) : Json(nullptr);
}

Json kind_name(ArraySpec::Kind k) {
  return k == ArraySpec::Kind::example_alpha ? "example_alpha" : "explicit";
}

}  // namespace

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

Json report_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_significant(v);
}

std::string report_text(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, round_significant(v));
  return buf;
}

Json to_json(const DiscreteDistribution& d) {
  Json atoms = Json::array();
  Json probs = Json::array();
  for (double a : d.atoms()) atoms.push_back(full_precision(a));
  for (double p : d.probs()) probs.push_back(full_precision(p));
  return Json{{"atoms", atoms}, {"probs", probs}};
}

DiscreteDistribution distribution_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("probs") ||
      !j["atoms"].is_array() || !j["probs"].is_array()) {
    throw DistributionError("distribution: expected {\"atoms\": [...], \"probs\": [...]}");
  }
  std::vector<double> atoms;
  std::vector<double> probs;
  for (const auto& a : j["atoms"]) atoms.push_back(parse_number(a, "atom"));
  for (const auto& p : j["probs"]) probs.push_back(parse_number(p, "prob"));
  return DiscreteDistribution(std::move(atoms), std::move(probs));
}

Json to_json(const ArraySpec& spec) {
  Json j{{"kind", kind_name(spec.kind())}};
  if (spec.kind() == ArraySpec::Kind::example_alpha) {
    j["alpha"] = report_number(spec.alpha());
    return j;
  }
  Json rows = Json::array();
  for (const auto& [n, row] : spec.rows()) {
    Json entries = Json::array();
    for (const auto& e : row) entries.push_back(to_json(e));
    rows.push_back(Json{{"n", n}, {"entries", entries}});
  }
  j["rows"] = rows;
  return j;
}

ArraySpec spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw SpecError("array spec: expected an object with a \"kind\" field");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "example_alpha") {
    if (!j.contains("alpha") || !j["alpha"].is_number()) {
      throw SpecError("array spec: example_alpha needs a numeric \"alpha\"");
    }
    return ArraySpec::example_alpha(j["alpha"].get<double>());
  }
  if (kind != "explicit") throw SpecError("array spec: unknown kind \"" + kind + "\"");
  if (!j.contains("rows") || !j["rows"].is_array()) {
    throw SpecError("array spec: explicit needs a \"rows\" array");
  }
  std::map<std::size_t, Row> rows;
  for (const auto& r : j["rows"]) {
    if (!r.is_object() || !r.contains("n") || !r["n"].is_number_unsigned() ||
        !r.contains("entries") || !r["entries"].is_array()) {
      throw SpecError("array spec: each row needs \"n\" and \"entries\"");
    }
    Row row;
    for (const auto& e : r["entries"]) row.push_back(distribution_from_json(e));
    const auto n = r["n"].get<std::size_t>();
    if (!rows.emplace(n, std::move(row)).second) {
      throw SpecError("array spec: row " + std::to_string(n) + " given twice");
    }
  }
  return ArraySpec::explicit_rows(std::move(rows));
}

Json to_json(const IndexReport& r) {
  Json j;
  j["index"] = r.index;
  j["kind"] = kind_name(r.kind);
  j["alpha"] = optional_number(r.alpha);
  if (!r.weight.empty()) j["weight"] = r.weight;
  Json grid;
  grid["n"] = r.n_grid;
  if (!r.epsilon_grid.empty()) {
    Json eps = Json::array();
    for (double e : r.epsilon_grid) eps.push_back(report_number(e));
    grid["epsilon"] = eps;
  }
  j["grid"] = grid;
  Json finite = Json::array();
  for (const auto& p : r.finite_values) {
    Json point{{"n", p.n}};
    if (!std::isnan(p.parameter)) point["epsilon"] = report_number(p.parameter);
    point["value"] = report_number(p.value);
    finite.push_back(point);
  }
  j["finite"] = finite;
  j["limit_estimate"] = report_number(r.limit_estimate);
  j["closed_form"] = optional_number(r.closed_form);
  j["closed_form_gap"] = optional_number(r.closed_form_gap);
  return j;
}

Json to_json(const BoundSuiteReport& r) {
  return Json{{"h", r.h},
              {"grid_points", r.grid_points},
              {"sup_f2", report_number(r.sup_f2)},
              {"bound_f2", optional_number(r.bound_f2)},
              {"osc_f1", report_number(r.osc_f1)},
              {"pass", r.pass()}};
}

Json to_json(const DistanceResult& r) {
  Json j{{"n", r.n}, {"method", to_string(r.method)}, {"value", report_number(r.value)}};
  if (r.confidence) {
    j["confidence"] = Json{{"level", report_number(r.confidence->level)},
                           {"half_width", report_number(r.confidence->half_width)}};
  } else {
    j["confidence"] = nullptr;
  }
  j["samples"] = r.samples ? Json(*r.samples) : Json(nullptr);
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  return j;
}

Json to_json(const KCurve& c) {
  Json points = Json::array();
  for (const auto& p : c.points) points.push_back(to_json(p));
  return Json{{"points", points},
              {"plateau", report_number(c.plateau)},
              {"plateau_half_width", report_number(c.plateau_half_width)}};
}

Json to_json(const ConstantsRecord& r) {
  return Json{{"sigma", report_number(r.sigma)},
              {"R", report_number(r.R)},
              {"integral_jump", report_number(r.integral_jump)},
              {"tv_muhat", report_number(r.tv_muhat)},
              {"integral_f2", report_number(r.integral_f2)},
              {"c_psi", report_number(r.c_psi)},
              {"c_half", report_number(r.c_half)},
              {"c_tilde", report_number(r.c_tilde)},
              {"residuals",
               Json{{"integral_jump", report_number(r.jump_residual)},
                    {"tv_muhat", report_number(r.tv_residual)},
                    {"integral_f2", report_number(r.f2_residual)}}}};
}

Json to_json(const SigmaScan& s) {
  Json table = Json::array();
  for (const auto& [sigma, c] : s.table) {
    table.push_back(Json{{"sigma", report_number(sigma)}, {"c_psi", report_number(c)}});
  }
  return Json{{"best_sigma", report_number(s.best_sigma)},
              {"best_c_psi", report_number(s.best_c_psi)},
              {"table", table}};
}

Json to_json(const IdentityReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"a", report_number(c.parameter)},
                          {"lhs", report_number(c.lhs)},
                          {"rhs", report_number(c.rhs)},
                          {"residual", report_number(c.residual)},
                          {"tolerance", report_number(c.tolerance)},
                          {"pass", c.pass()}});
  }
  const auto& s = r.sandwich;
  return Json{{"checks", checks},
              {"sandwich",
               Json{{"x_min", report_number(s.x_min)},
                    {"x_max", report_number(s.x_max)},
                    {"step", report_number(s.step)},
                    {"points", s.points},
                    {"max_lower_violation", report_number(s.max_lower_violation)},
                    {"max_upper_violation", report_number(s.max_upper_violation)},
                    {"slack", report_number(s.slack)},
                    {"pass", s.pass()}}},
              {"pass", r.pass()}};
}

Json to_json(const BoundCertificate& c) {
  Json spec{{"kind", kind_name(c.kind)}};
  if (c.alpha) spec["alpha"] = report_number(*c.alpha);
  if (!c.rows.empty()) spec["rows"] = c.rows;
  Json empirical = Json::array();
  for (const auto& p : c.empirical.points) empirical.push_back(to_json(p));
  return Json{{"spec", spec},
              {"lower", report_number(c.lower)},
              {"upper", report_number(c.upper)},
              {"relaxed_index", report_number(c.relaxed_index)},
              {"lin_index", report_number(c.lin_index)},
              {"closed_forms", c.closed_forms},
              {"c_tilde", report_number(c.c_tilde)},
              {"rounded_constants", c.rounded_constants},
              {"empirical", empirical},
              {"plateau", report_number(c.empirical.plateau)},
              {"plateau_half_width", report_number(c.empirical.plateau_half_width)},
              {"constants", to_json(c.constants)},
              {"verdict", to_string(c.verdict)}};
}

Json to_json(const std::vector<OptimalityRow>& rows) {
  Json table = Json::array();
  for (const auto& r : rows) {
    table.push_back(Json{{"alpha", report_number(r.alpha)},
                         {"lower", report_number(r.lower)},
                         {"ratio", report_number(r.ratio)}});
  }
  return table;
}

}  // namespace cltcert
