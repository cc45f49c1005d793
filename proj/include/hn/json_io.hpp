#pragma once

#include <string>

#include "json.hpp"

#include "hn/descent.hpp"
#include "hn/htmod.hpp"
#include "hn/newton.hpp"
#include "hn/polygon.hpp"
#include "hn/strata.hpp"

namespace hn::io {

using json = nlohmann::json;

// Rationals serialize as "num/den" strings (integers without the /den); no
// floats cross the interface. Parse failures raise InvalidInput naming the
// JSON-pointer path of the offending value.

json rat_json(const Rat& q);
Rat rat_from(const json& j, const std::string& path);

json to_json(const ConcavePolygon& p);
ConcavePolygon polygon_from_json(const json& j, const std::string& path = "");

json to_json(const HalfLinePolygon& p);

std::string polygon_csv(const ConcavePolygon& p);
ConcavePolygon polygon_from_csv(const std::string& csv);

json to_json(const FieldConfig& f);
FieldConfig field_from_json(const json& j, const std::string& path = "");

json to_json(const FieldElement& e);
FieldElement element_from_json(FieldConfig f, const json& j, const std::string& path = "");

json to_json(const IntegralHTModule& x);
IntegralHTModule integral_from_json(const json& j, const std::string& path = "");
/// Parses without running the mathematical validation (for the validate verb,
/// where diagnostics are the output).
IntegralHTModule integral_from_json_unchecked(const json& j, const std::string& path = "");

json to_json(const TorsionHTModule& x);
TorsionHTModule torsion_from_json(const json& j, const std::string& path = "");

/// Either kind, dispatched on the presence of "cyclic_type".
bool json_is_torsion_module(const json& j);

json to_json(const SlopeData& d);
SlopeData slopedata_from_json(const json& j, const std::string& path = "");

json to_json(const StratumLabel& l);
StratumLabel label_from_json(const json& j, const std::string& path = "");

/// Subgroups serialize through rational generator vectors modulo T.
json subgroup_json(const Subgroup& s);

json to_json(const DescentTrace& t);

json to_json(const LeviData& l);
json to_json(const NewtonCheckReport& r);
json to_json(const ClassifyResult& r);
json to_json(const ConvergenceReport& r);

} // namespace hn::io
