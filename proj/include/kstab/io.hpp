#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kstab/lab.hpp"

namespace kstab {

/// Reads and parses a JSON document. Syntax errors surface as
/// ValidationError carrying the path and 1-based line number of the
/// offending byte.
nlohmann::json load_json_file(const std::string& path);

/// {"dim": n, "vertices": [["p/q", ...], ...]} or
/// {"dim": n, "facets": [{"normal": [ints], "offset": "p/q"}, ...]}.
/// Rationals are "p/q" strings; plain JSON integers are accepted, floats are
/// not.
LatticePolytope polytope_from_json(const nlohmann::json& j);

/// {"pieces": [{"slope": ["p/q", ...], "constant": "p/q"}, ...]}.
PLConvexFunction plfun_from_json(const nlohmann::json& j);

/// {"polytope": {...}, "function": {...}}; runs denominator clearing.
ToricTestConfig config_from_json(const nlohmann::json& j);

/// {"configs": [{"id": "...", "polytope": {...}, "function": {...}}, ...]}.
std::vector<LabeledConfig> scan_from_json(const nlohmann::json& j);

/// "full", "none", or semicolon-separated rows of comma-separated rationals
/// such as "1,0;0,1".
SubtorusDirections torus_from_spec(const std::string& spec, int ambient_dim);

/// Decimal with 15 significant digits.
std::string real_string(double x);

/// Header k,a1,...,an,raw_weight,centered_weight; exact rational entries.
void write_spectrum_csv(std::ostream& os, const WeightSpectrum& spec);

/// Header k,m_k,target,residual; moments and target exact, residual real.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep);

/// Header id,DF,DF_T,norm1,ratio,product; ratio blank for product members.
void write_scan_csv(std::ostream& os, const ScanReport& rep);

}  // namespace kstab
