#include "kstab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "kstab/errors.hpp"

namespace kstab {

namespace {

using nlohmann::json;

/// Exact rational from a JSON value: "p/q" string or plain integer.
Rat rational_from_json(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long long>());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError(where + ": expected a \"p/q\" string or integer, got " + j.dump());
}

const json& require_key(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing key \"" + key + "\"");
  return *it;
}

RVec rvec_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ValidationError(where + ": expected a non-empty array");
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = rational_from_json(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t upto = std::min(text.size(), e.byte > 0 ? static_cast<std::size_t>(e.byte) - 1
                                                        : static_cast<std::size_t>(0));
    long line = 1 + static_cast<long>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ValidationError(path + ": line " + std::to_string(line) + ": " + e.what());
  }
}

LatticePolytope polytope_from_json(const nlohmann::json& j) {
  const json& dim_j = require_key(j, "dim", "polytope");
  if (!dim_j.is_number_integer()) throw ValidationError("polytope: \"dim\" must be an integer");
  int dim = dim_j.get<int>();
  if (j.contains("vertices")) {
    const json& verts = j["vertices"];
    if (!verts.is_array() || verts.empty())
      throw ValidationError("polytope: \"vertices\" must be a non-empty array");
    std::vector<RVec> points;
    for (std::size_t i = 0; i < verts.size(); ++i)
      points.push_back(rvec_from_json(verts[i], "vertices[" + std::to_string(i) + "]"));
    return LatticePolytope::from_vertices(dim, points);
  }
  if (j.contains("facets")) {
    const json& facets = j["facets"];
    if (!facets.is_array() || facets.empty())
      throw ValidationError("polytope: \"facets\" must be a non-empty array");
    std::vector<Facet> fs;
    for (std::size_t i = 0; i < facets.size(); ++i) {
      const std::string where = "facets[" + std::to_string(i) + "]";
      RVec normal = rvec_from_json(require_key(facets[i], "normal", where), where + ".normal");
      Facet f;
      f.normal = IVec(normal.size());
      for (Eigen::Index c = 0; c < normal.size(); ++c) {
        if (denominator(normal(c)) != 1)
          throw ValidationError(where + ".normal: entries must be integers");
        f.normal(c) = numerator(normal(c)).convert_to<long long>();
      }
      f.offset = rational_from_json(require_key(facets[i], "offset", where), where + ".offset");
      fs.push_back(std::move(f));
    }
    return LatticePolytope::from_facets(dim, fs);
  }
  throw ValidationError("polytope: needs either \"vertices\" or \"facets\"");
}

PLConvexFunction plfun_from_json(const nlohmann::json& j) {
  const json& pieces = require_key(j, "pieces", "function");
  if (!pieces.is_array() || pieces.empty())
    throw ValidationError("function: \"pieces\" must be a non-empty array");
  std::vector<AffinePiece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string where = "pieces[" + std::to_string(i) + "]";
    AffinePiece piece;
    piece.slope = rvec_from_json(require_key(pieces[i], "slope", where), where + ".slope");
    piece.constant =
        rational_from_json(require_key(pieces[i], "constant", where), where + ".constant");
    out.push_back(std::move(piece));
  }
  return PLConvexFunction(out);
}

ToricTestConfig config_from_json(const nlohmann::json& j) {
  LatticePolytope P = polytope_from_json(require_key(j, "polytope", "config"));
  PLConvexFunction f = plfun_from_json(require_key(j, "function", "config"));
  return make_toric_test_config(std::move(P), std::move(f));
}

std::vector<LabeledConfig> scan_from_json(const nlohmann::json& j) {
  const json& configs = require_key(j, "configs", "scan");
  if (!configs.is_array() || configs.empty())
    throw ValidationError("scan: \"configs\" must be a non-empty array");
  std::vector<LabeledConfig> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string where = "configs[" + std::to_string(i) + "]";
    const json& id_j = require_key(configs[i], "id", where);
    if (!id_j.is_string()) throw ValidationError(where + ": \"id\" must be a string");
    std::string id = id_j.get<std::string>();
    if (!seen.insert(id).second) throw ValidationError("scan: duplicate id \"" + id + "\"");
    out.push_back({std::move(id), config_from_json(configs[i])});
  }
  return out;
}

SubtorusDirections torus_from_spec(const std::string& spec, int ambient_dim) {
  if (spec == "full") return SubtorusDirections::full(ambient_dim);
  if (spec == "none") return SubtorusDirections::none(ambient_dim);
  std::vector<RVec> rows;
  std::stringstream row_stream(spec);
  std::string row;
  while (std::getline(row_stream, row, ';')) {
    std::vector<Rat> entries;
    std::stringstream entry_stream(row);
    std::string entry;
    while (std::getline(entry_stream, entry, ',')) {
      try {
        entries.push_back(parse_rational(entry));
      } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("torus: ") + e.what());
      }
    }
    if (entries.empty()) throw ValidationError("torus: empty row in \"" + spec + "\"");
    RVec v(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw ValidationError("torus: expected full, none, or a basis like \"1,0;0,1\"");
  return SubtorusDirections(ambient_dim, rows);
}

std::string real_string(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

void write_spectrum_csv(std::ostream& os, const WeightSpectrum& spec) {
  const Eigen::Index n = spec.points.cols();
  os << "k";
  for (Eigen::Index j = 0; j < n; ++j) os << ",a" << (j + 1);
  os << ",raw_weight,centered_weight\n";
  for (long long i = 0; i < spec.count(); ++i) {
    os << spec.k;
    for (Eigen::Index j = 0; j < n; ++j) os << "," << spec.points(i, j);
    os << "," << rational_to_string(spec.raw[i]) << ","
       << rational_to_string(spec.centered[i]) << "\n";
  }
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "k,m_k,target,residual\n";
  for (std::size_t i = 0; i < rep.k_list.size(); ++i)
    os << rep.k_list[i] << "," << rational_to_string(rep.quantized_moments[i]) << ","
       << rational_to_string(rep.continuous_target) << "," << real_string(rep.residuals[i])
       << "\n";
}

void write_scan_csv(std::ostream& os, const ScanReport& rep) {
  os << "id,DF,DF_T,norm1,ratio,product\n";
  for (const ScanRecord& rec : rep.records) {
    os << rec.id << "," << rational_to_string(rec.df_value) << ","
       << rational_to_string(rec.df_relative_value) << "," << rational_to_string(rec.norm1_inner)
       << ",";
    if (rec.ratio) os << real_string(*rec.ratio);
    os << "," << (rec.product ? "true" : "false") << "\n";
  }
}

}  // namespace kstab
