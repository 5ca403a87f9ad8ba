#include "kstab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "kstab/errors.hpp"

namespace kstab {

namespace {

Int rat_floor(const Rat& r) {
  Int n = numerator(r), d = denominator(r);
  Int q = n / d;
  if (q * d > n) --q;
  return q;
}

Int rat_ceil(const Rat& r) { return -rat_floor(-r); }

Rat integer_pow(const Rat& base, int e) {
  Rat out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

ConvergenceReport moment_convergence(const ToricTestConfig& tc, const SubtorusDirections& W, int p,
                                     const std::vector<long long>& k_list, MomentKind mode) {
  if (p < 1) throw ValidationError("moment order must be at least 1");
  if (k_list.empty()) throw ValidationError("the level list is empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 1) throw ValidationError("levels must be positive");
    if (i > 0 && k_list[i] <= k_list[i - 1])
      throw ValidationError("levels must be strictly increasing");
  }

  const LatticePolytope& P = tc.polytope;
  Rat V = volume(P);
  ConvergenceReport rep;
  rep.p = p;
  rep.k_list = k_list;

  Rat fbar = mean(tc.original, P);
  if (mode == MomentKind::Raw) {
    rep.continuous_target =
        integrate_signed_power(add_affine(tc.original, {RVec::Zero(P.dim()), -fbar}), P, p) / V;
  } else {
    ProjectionResult proj = continuous_projection(tc.original, P, W);
    rep.continuous_target = integrate_signed_power(PLExpr(proj.projected), P, p) / V;
  }

  // Spectra for different k are independent; farm them out and assemble in
  // list order.
  Rat dp = integer_pow(Rat(tc.D), p);
  std::vector<std::future<Rat>> futures;
  futures.reserve(k_list.size());
  for (long long k : k_list) {
    futures.push_back(std::async(std::launch::async, [&tc, &W, p, mode, dp, k] {
      WeightSpectrum spec = weight_spectrum(tc, k);
      if (mode == MomentKind::Raw)
        return trace_moment(spec.centered, k, p, MomentMode::Signed) / dp;
      QuantizedProjection qp = quantized_projection(spec, W);
      return trace_moment(qp.projected, k, p, MomentMode::Signed) / dp;
    }));
  }
  for (auto& fut : futures) rep.quantized_moments.push_back(fut.get());
  for (const Rat& m : rep.quantized_moments)
    rep.residuals.push_back(std::abs(rat_to_double(m - rep.continuous_target)));

  // Quasi-period effects can break monotonicity off the q-progression; only
  // fit a rate when the safely sub-asymptotic prefix decreases.
  const long long k_max = k_list.back();
  bool monotone = true;
  double prev = -1;
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (2 * k_list[i] > k_max) break;
    if (prev >= 0 && rep.residuals[i] > prev + 1e-15) monotone = false;
    prev = rep.residuals[i];
  }
  rep.oscillatory = !monotone;
  if (monotone) {
    std::vector<double> xs, ys;
    for (std::size_t i = k_list.size() / 2; i < k_list.size(); ++i) {
      if (rep.residuals[i] > 0) {
        xs.push_back(std::log(static_cast<double>(k_list[i])));
        ys.push_back(std::log(rep.residuals[i]));
      }
    }
    if (xs.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      double m = static_cast<double>(xs.size());
      rep.fitted_rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
  }

  if (k_list.size() >= 2) {
    std::size_t m = k_list.size();
    Rat k1(k_list[m - 2]), k2(k_list[m - 1]);
    rep.extrapolated_limit =
        (k2 * rep.quantized_moments[m - 1] - k1 * rep.quantized_moments[m - 2]) / (k2 - k1);
  }
  return rep;
}

ProductReport product_detector(const ToricTestConfig& tc, const SubtorusDirections& W) {
  const LatticePolytope& P = tc.polytope;
  ProjectionResult proj = continuous_projection(tc.original, P, W);
  Rat fbar = mean(tc.original, P);
  PLConvexFunction residual =
      add_affine(tc.original, {RVec(-proj.projected.slope), -proj.projected.constant - fbar});
  Rat inner = integrate_abs_power(residual, P, 2) / volume(P);
  return ProductReport{inner == 0, inner, proj.projected.slope, residual};
}

NormEquivalenceReport norm_equivalence_probe(const std::vector<ToricTestConfig>& corpus,
                                             const SubtorusDirections& W, double p) {
  if (p < 1 || p > 2) throw ValidationError("probe order must lie in [1, 2]");
  NormEquivalenceReport rep;
  rep.p = p;
  for (const ToricTestConfig& tc : corpus) {
    NormEquivalenceRow row;
    NormReport red = reduced_norm(tc, W, p);
    InfimumResult inf = infimum_norm(tc, W, p);
    row.reduced = red.value;
    row.infimum = inf.report.value;
    if (row.infimum > row.reduced * (1 + 1e-9) + 1e-12)
      throw NonConvergence("norm_equivalence_probe", "optimizer exceeded the reduced norm");
    bool degenerate = red.exact_inner ? *red.exact_inner == 0 : red.value <= 1e-12;
    if (!degenerate) {
      row.ratio = row.infimum / row.reduced;
      if (!rep.empirical_delta || *row.ratio < *rep.empirical_delta)
        rep.empirical_delta = *row.ratio;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

ScanReport stability_scan(const std::vector<LabeledConfig>& configs,
                          const SubtorusDirections& W) {
  ScanReport rep;
  for (const LabeledConfig& lc : configs) {
    ScanRecord rec;
    rec.id = lc.id;
    rec.df_value = df(lc.tc);
    rec.df_relative_value = df_relative(lc.tc, W);
    NormReport red = reduced_norm(lc.tc, W, 1);
    rec.norm1_inner = *red.exact_inner;
    rec.product = product_detector(lc.tc, W).is_product;
    if (rec.norm1_inner > 0)
      rec.ratio = rat_to_double(rec.df_relative_value) / rat_to_double(rec.norm1_inner);
    if (rec.df_relative_value < 0) rep.unstable_ids.push_back(rec.id);
    if (!rec.product && rec.ratio &&
        (!rep.empirical_delta || *rec.ratio < *rep.empirical_delta))
      rep.empirical_delta = *rec.ratio;
    rep.records.push_back(rec);
  }
  return rep;
}

McResult mc_cross_check(const PLExpr& g, const LatticePolytope& P, double p, long long samples,
                        unsigned long long seed) {
  if (samples < 10000) throw ValidationError("monte carlo needs at least 10^4 samples");
  if (p < 1) throw ValidationError("norm order must be at least 1");
  if (g.dim() != P.dim()) throw ValidationError("function and polytope dimensions differ");
  const int n = P.dim();
  auto [lo, hi] = P.bounding_box();
  std::vector<double> lod(n), hid(n);
  double box_vol = 1;
  for (int j = 0; j < n; ++j) {
    lod[j] = rat_to_double(lo(j));
    hid[j] = rat_to_double(hi(j));
    box_vol *= hid[j] - lod[j];
  }

  struct DoubleAffine {
    std::vector<double> s;
    double c;
  };
  auto to_double = [n](const PLConvexFunction& f) {
    std::vector<DoubleAffine> out;
    for (const AffinePiece& piece : f.pieces()) {
      DoubleAffine da;
      da.c = rat_to_double(piece.constant);
      for (int j = 0; j < n; ++j) da.s.push_back(rat_to_double(piece.slope(j)));
      out.push_back(std::move(da));
    }
    return out;
  };
  auto eval_max = [n](const std::vector<DoubleAffine>& pieces, const std::vector<double>& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const DoubleAffine& da : pieces) {
      double v = da.c;
      for (int j = 0; j < n; ++j) v += da.s[j] * x[j];
      best = std::max(best, v);
    }
    return best;
  };
  std::vector<DoubleAffine> pos = to_double(g.pos), neg = to_double(g.neg);

  std::vector<DoubleAffine> halves;
  for (const Facet& f : P.facets()) {
    DoubleAffine h;
    h.c = rat_to_double(f.offset);
    for (int j = 0; j < n; ++j) h.s.push_back(static_cast<double>(f.normal(j)));
    halves.push_back(std::move(h));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double sum = 0, sumsq = 0;
  std::vector<double> x(n);
  for (long long i = 0; i < samples; ++i) {
    for (int j = 0; j < n; ++j) x[j] = lod[j] + (hid[j] - lod[j]) * unif(rng);
    bool inside = true;
    for (const DoubleAffine& h : halves) {
      double v = 0;
      for (int j = 0; j < n; ++j) v += h.s[j] * x[j];
      if (v > h.c + 1e-12) {
        inside = false;
        break;
      }
    }
    double v = 0;
    if (inside) v = std::pow(std::abs(eval_max(pos, x) - eval_max(neg, x)), p);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / static_cast<double>(samples);
  double var = std::max(0.0, sumsq / static_cast<double>(samples) - mean * mean);
  return {box_vol * mean, box_vol * std::sqrt(var / static_cast<double>(samples))};
}

std::vector<long long> default_k_list(const ToricTestConfig& tc) {
  const long long q = spectral_period(tc);
  const LatticePolytope& P = tc.polytope;
  const int n = P.dim();
  auto [lo, hi] = P.bounding_box();
  const long long budget = point_budget();
  auto box_points = [&](long long k) {
    long long prod = 1;
    for (int j = 0; j < n; ++j) {
      Int count = rat_floor(Rat(k) * hi(j)) - rat_ceil(Rat(k) * lo(j)) + 1;
      if (count <= 0) return static_cast<long long>(0);
      prod *= count.convert_to<long long>();
      if (prod > budget) return prod;
    }
    return prod;
  };
  std::vector<long long> ks{q};
  for (long long k = 2 * q; k <= 1024 && box_points(k) <= budget; k *= 2) ks.push_back(k);
  return ks;
}

}  // namespace kstab
