#pragma once

// JSON forms of every report. Numbers are rounded to 12 significant digits
// (kReportDigits) so that JSON and CSV renderings carry identical values;
// distributions keep full precision as 17-digit decimal strings.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "cltcert/certify.hpp"
#include "cltcert/constants.hpp"
#include "cltcert/distributions.hpp"
#include "cltcert/kolmogorov.hpp"
#include "cltcert/stein.hpp"
#include "cltcert/triangular_array.hpp"

namespace cltcert {

using Json = nlohmann::ordered_json;

inline constexpr int kReportDigits = 12;

/// v rounded to `digits` significant decimal digits.
double round_significant(double v, int digits = kReportDigits);
/// Rounded number, or null for NaN / infinity.
Json report_number(double v);
/// The same rounded value as text ("%.12g"); empty for NaN / infinity.
std::string report_text(double v);

Json to_json(const DiscreteDistribution& d);
/// Accepts numbers or decimal strings for atoms and probs.
DiscreteDistribution distribution_from_json(const Json& j);

Json to_json(const ArraySpec& spec);
/// {"kind": "example_alpha", "alpha": a} or
/// {"kind": "explicit", "rows": [{"n": 4, "entries": [<distribution>, ...]}]}.
ArraySpec spec_from_json(const Json& j);

Json to_json(const IndexReport& r);
Json to_json(const BoundSuiteReport& r);
Json to_json(const DistanceResult& r);
Json to_json(const KCurve& c);
Json to_json(const ConstantsRecord& r);
Json to_json(const SigmaScan& s);
Json to_json(const IdentityReport& r);
Json to_json(const BoundCertificate& c);
Json to_json(const std::vector<OptimalityRow>& rows);

}  // namespace cltcert
