#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "kstab/errors.hpp"
#include "kstab/io.hpp"

using namespace kstab;

namespace {

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ValidationError("cannot open output file: " + path);
  return file;
}

std::string poly_string(const RVec& coeffs) {
  std::string out;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (i > 0) out += " + ";
    out += rational_to_string(coeffs(i));
    if (i == 1) out += " k";
    if (i > 1) out += " k^" + std::to_string(i);
  }
  return out;
}

std::string vec_string(const RVec& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += rational_to_string(v(i));
  }
  return out + ")";
}

std::string p_label(double p) {
  if (p == static_cast<long long>(p)) return std::to_string(static_cast<long long>(p));
  return real_string(p);
}

std::vector<long long> parse_k_list(const std::string& spec) {
  std::vector<long long> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      long long k = std::stoll(item, &used);
      if (used != item.size() || k < 1) throw std::invalid_argument(item);
      out.push_back(k);
    } catch (const std::exception&) {
      throw ValidationError("bad level \"" + item + "\" in \"" + spec + "\"");
    }
  }
  if (out.empty()) throw ValidationError("empty level list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-stability invariants of toric test configurations"};
  app.require_subcommand(1);

  std::string input, output;
  std::string torus = "full";
  std::string mode = "projected";
  std::string k_spec;
  long long k_level = 0, k_max = 0;
  double p = 2;
  int moment_p = 2;
  double tol = 1e-10;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input,--input", input, "configuration JSON file")->required();
    cmd->add_option("--output", output, "write to this file instead of stdout");
  };
  auto load = [&] { return config_from_json(load_json_file(input)); };
  auto torus_of = [&](const ToricTestConfig& tc) {
    return torus_from_spec(torus, tc.polytope.dim());
  };

  CLI::App* ehrhart_cmd = app.add_subcommand("ehrhart", "lattice count and weight polynomials");
  add_common(ehrhart_cmd);
  ehrhart_cmd->callback([&] {
    ToricTestConfig tc = load();
    EhrhartFit fit = ehrhart_fit(tc);
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    os << "q = " << fit.q << "\n";
    os << "N(k) = " << poly_string(fit.n_coeffs) << "\n";
    os << "w(k) = " << poly_string(fit.w_coeffs) << "\n";
    os << "F0 = " << rational_to_string(fit.f0) << "\n";
    os << "F1 = " << rational_to_string(fit.f1) << "\n";
  });

  CLI::App* weights_cmd = app.add_subcommand("weights", "weight spectrum at one level");
  add_common(weights_cmd);
  weights_cmd->add_option("--k", k_level, "quantization level")->required();
  weights_cmd->callback([&] {
    ToricTestConfig tc = load();
    if (k_level < 1) throw ValidationError("level must be positive");
    WeightSpectrum spec = weight_spectrum(tc, k_level);
    std::ofstream file;
    write_spectrum_csv(open_output(output, file), spec);
  });

  CLI::App* df_cmd = app.add_subcommand("df", "Donaldson-Futaki invariant");
  add_common(df_cmd);
  df_cmd->callback([&] {
    std::string value = rational_to_string(df(load()));
    std::ofstream file;
    open_output(output, file) << "DF = " << value << "\n";
  });

  CLI::App* norm_cmd = app.add_subcommand("norm", "L^p norm of the centered function");
  add_common(norm_cmd);
  norm_cmd->add_option("--p", p, "norm order")->capture_default_str();
  norm_cmd->callback([&] {
    NormReport rep = norm_p(load(), p);
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    os << "norm_" << p_label(p) << " = " << real_string(rep.value) << "\n";
    if (rep.exact_inner)
      os << "inner_" << p_label(p) << " = " << rational_to_string(*rep.exact_inner) << "\n";
  });

  CLI::App* reduced_cmd = app.add_subcommand("reduced-norm", "reduced L^p norm");
  add_common(reduced_cmd);
  reduced_cmd->add_option("--p", p, "norm order")->capture_default_str();
  reduced_cmd->add_option("--torus", torus, "full, none, or a basis like \"1,0;0,1\"")
      ->capture_default_str();
  reduced_cmd->callback([&] {
    ToricTestConfig tc = load();
    NormReport rep = reduced_norm(tc, torus_of(tc), p);
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    os << "reduced_norm_" << p_label(p) << " = " << real_string(rep.value) << "\n";
    if (rep.exact_inner)
      os << "inner_" << p_label(p) << " = " << rational_to_string(*rep.exact_inner) << "\n";
  });

  CLI::App* inf_cmd = app.add_subcommand("inf-norm", "infimum of twisted L^p norms");
  add_common(inf_cmd);
  inf_cmd->add_option("--p", p, "norm order")->capture_default_str();
  inf_cmd->add_option("--torus", torus)->capture_default_str();
  inf_cmd->add_option("--tol", tol, "line search tolerance")->capture_default_str();
  inf_cmd->callback([&] {
    ToricTestConfig tc = load();
    InfimumResult res = infimum_norm(tc, torus_of(tc), p, tol);
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    os << "inf_norm_" << p_label(p) << " = " << real_string(res.report.value) << "\n";
    os << "t = " << vec_string(res.t) << "\n";
    os << "evaluations = " << res.evaluations << "\n";
  });

  CLI::App* project_cmd = app.add_subcommand("project", "projection coefficients");
  add_common(project_cmd);
  project_cmd->add_option("--k", k_spec, "comma-separated levels")->required();
  project_cmd->add_option("--torus", torus)->capture_default_str();
  project_cmd->callback([&] {
    ToricTestConfig tc = load();
    SubtorusDirections W = torus_of(tc);
    std::vector<long long> ks = parse_k_list(k_spec);
    std::vector<RVec> coeffs = limit_projection_coefficients(tc, W, ks);
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    for (std::size_t i = 0; i < ks.size(); ++i)
      os << "quantized[" << ks[i] << "] = " << vec_string(coeffs[i]) << "\n";
    os << "continuous = "
       << vec_string(continuous_projection(tc.original, tc.polytope, W).coefficients) << "\n";
  });

  CLI::App* moments_cmd = app.add_subcommand("moments", "trace moment convergence table");
  add_common(moments_cmd);
  moments_cmd->add_option("--p", moment_p, "moment order")->capture_default_str();
  moments_cmd->add_option("--k", k_spec, "comma-separated levels (default: geometric)");
  moments_cmd->add_option("--k-max", k_max, "truncate the default level list");
  moments_cmd->add_option("--mode", mode, "projected or raw")->capture_default_str();
  moments_cmd->add_option("--torus", torus)->capture_default_str();
  moments_cmd->callback([&] {
    ToricTestConfig tc = load();
    MomentKind kind;
    if (mode == "projected")
      kind = MomentKind::Projected;
    else if (mode == "raw")
      kind = MomentKind::Raw;
    else
      throw ValidationError("mode must be projected or raw");
    std::vector<long long> ks;
    if (!k_spec.empty()) {
      ks = parse_k_list(k_spec);
    } else {
      for (long long k : default_k_list(tc))
        if (k_max == 0 || k <= k_max) ks.push_back(k);
      if (ks.empty()) throw ValidationError("no levels at or below the requested maximum");
    }
    ConvergenceReport rep = moment_convergence(tc, torus_of(tc), moment_p, ks, kind);
    std::ofstream file;
    write_convergence_csv(open_output(output, file), rep);
    if (rep.oscillatory) std::cerr << "note: residual prefix is oscillatory\n";
    if (rep.fitted_rate) std::cerr << "fitted_rate = " << real_string(*rep.fitted_rate) << "\n";
    if (rep.extrapolated_limit)
      std::cerr << "extrapolated_limit = " << rational_to_string(*rep.extrapolated_limit) << "\n";
  });

  CLI::App* detect_cmd = app.add_subcommand("detect-product", "product configuration test");
  add_common(detect_cmd);
  detect_cmd->add_option("--torus", torus)->capture_default_str();
  detect_cmd->callback([&] {
    ToricTestConfig tc = load();
    ProductReport rep = product_detector(tc, torus_of(tc));
    std::ofstream file;
    std::ostream& os = open_output(output, file);
    if (rep.is_product)
      os << "product: true, direction = " << vec_string(rep.direction) << "\n";
    else
      os << "product: false, residual_inner = " << rational_to_string(rep.reduced_inner) << "\n";
  });

  CLI::App* scan_cmd = app.add_subcommand("scan", "relative stability scan");
  add_common(scan_cmd);
  scan_cmd->add_option("--torus", torus)->capture_default_str();
  scan_cmd->callback([&] {
    std::vector<LabeledConfig> configs = scan_from_json(load_json_file(input));
    if (configs.empty()) throw ValidationError("scan file has no configurations");
    SubtorusDirections W = torus_from_spec(torus, configs.front().tc.polytope.dim());
    ScanReport rep = stability_scan(configs, W);
    std::ofstream file;
    write_scan_csv(open_output(output, file), rep);
    if (rep.empirical_delta)
      std::cerr << "empirical_delta = " << real_string(*rep.empirical_delta) << "\n";
    for (const std::string& id : rep.unstable_ids)
      std::cerr << "unstable: " << id << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
