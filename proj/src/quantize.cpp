#include "kstab/quantize.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "kstab/errors.hpp"

namespace kstab {

ToricTestConfig make_toric_test_config(LatticePolytope P, PLConvexFunction f) {
  if (P.dim() != f.dim()) throw ValidationError("polytope and function dimensions differ");
  auto [scaled, D] = clear_denominators(f);
  return {std::move(P), std::move(scaled), std::move(f), D, true};
}

SubtorusDirections::SubtorusDirections(int ambient_dim, std::vector<RVec> basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  if (ambient_dim_ < 1) throw ValidationError("ambient dimension must be positive");
  for (const RVec& w : basis_)
    if (w.size() != ambient_dim_) throw ValidationError("torus direction has wrong dimension");
  if (static_cast<int>(basis_.size()) > ambient_dim_)
    throw ValidationError("more torus directions than ambient dimensions");
  if (!basis_.empty()) {
    RMat B(static_cast<Eigen::Index>(basis_.size()), ambient_dim_);
    for (std::size_t i = 0; i < basis_.size(); ++i) B.row(i) = basis_[i].transpose();
    if (Eigen::FullPivLU<RMat>(B).rank() != static_cast<Eigen::Index>(basis_.size()))
      throw ValidationError("torus directions are linearly dependent");
  }
}

SubtorusDirections SubtorusDirections::full(int ambient_dim) {
  std::vector<RVec> basis;
  for (int i = 0; i < ambient_dim; ++i) {
    RVec e = RVec::Zero(ambient_dim);
    e(i) = 1;
    basis.push_back(e);
  }
  return SubtorusDirections(ambient_dim, std::move(basis));
}

SubtorusDirections SubtorusDirections::none(int ambient_dim) {
  return SubtorusDirections(ambient_dim, {});
}

long long point_budget() {
  static const long long cached = [] {
    if (const char* env = std::getenv("KSTAB_POINT_BUDGET")) {
      char* end = nullptr;
      long long v = std::strtoll(env, &end, 10);
      if (end && *end == '\0' && v > 0) return v;
      throw ValidationError("KSTAB_POINT_BUDGET must be a positive integer");
    }
    return 1000000LL;
  }();
  return cached;
}

WeightSpectrum weight_spectrum(const ToricTestConfig& tc, long long k) {
  if (!tc.scaled) throw UnscaledConfig("weight_spectrum");
  if (k < 1) throw ValidationError("level k must be >= 1");
  const int n = tc.polytope.dim();
  {
    auto [lo, hi] = tc.polytope.bounding_box();
    Rat box = 1;
    for (int j = 0; j < n; ++j) box *= Rat(k) * (hi(j) - lo(j)) + 2;
    if (box > Rat(4) * Rat(point_budget()))
      throw PointBudgetExceeded("weight_spectrum",
                                "level " + std::to_string(k) + " exceeds the lattice point budget");
  }
  WeightSpectrum spec;
  spec.k = k;
  spec.points = lattice_points(tc.polytope, k);
  const long long N = spec.points.rows();
  if (N == 0) throw ComputeError("weight_spectrum", "no lattice points at this level");
  // The scaled pieces are integral, so k f(a/k) = max_j (<s_j, a> + k c_j)
  // evaluates in integer arithmetic.
  const auto& pieces = tc.f.pieces();
  std::vector<std::vector<long long>> slopes;
  std::vector<long long> consts;
  for (const AffinePiece& p : pieces) {
    std::vector<long long> s(n);
    for (int j = 0; j < n; ++j) {
      if (denominator(p.slope(j)) != 1 || denominator(p.constant) != 1)
        throw UnscaledConfig("weight_spectrum");
      s[j] = numerator(p.slope(j)).convert_to<long long>();
    }
    slopes.push_back(std::move(s));
    consts.push_back(numerator(p.constant).convert_to<long long>());
  }
  spec.raw.reserve(N);
  for (long long i = 0; i < N; ++i) {
    long long best = 0;
    bool first = true;
    for (std::size_t j = 0; j < slopes.size(); ++j) {
      long long v = consts[j] * k;
      for (int t = 0; t < n; ++t) v += slopes[j][t] * spec.points(i, t);
      if (first || v > best) best = v;
      first = false;
    }
    spec.raw.emplace_back(best);
    spec.trace += best;
  }
  Rat mean_weight = spec.trace / Rat(N);
  spec.centered.reserve(N);
  for (const Rat& r : spec.raw) spec.centered.push_back(r - mean_weight);
  return spec;
}

long long spectral_period(const ToricTestConfig& tc) {
  Int q = 1;
  for (const RVec& v : tc.polytope.vertices()) q = int_lcm(q, denominator_lcm(v));
  for (const auto& cell : linearity_regions(tc.f, tc.polytope).cells)
    for (const RVec& v : cell.region.vertices()) q = int_lcm(q, denominator_lcm(v));
  return q.convert_to<long long>();
}

EhrhartFit ehrhart_fit(const ToricTestConfig& tc) {
  if (!tc.scaled) throw UnscaledConfig("ehrhart_fit");
  const int n = tc.polytope.dim();
  EhrhartFit fit;
  fit.q = spectral_period(tc);
  std::vector<Rat> ks, Ns, ws;
  for (int s = 1; s <= n + 4; ++s) {
    long long k = fit.q * s;
    WeightSpectrum spec = weight_spectrum(tc, k);
    ks.emplace_back(k);
    Ns.emplace_back(spec.count());
    ws.push_back(spec.trace);
  }
  // Interpolate on the leading samples, validate on the rest plus the
  // held-out (n+4)q level.
  fit.n_coeffs = lagrange_interpolate({ks.begin(), ks.begin() + n + 1}, {Ns.begin(), Ns.begin() + n + 1});
  fit.w_coeffs = lagrange_interpolate({ks.begin(), ks.begin() + n + 2}, {ws.begin(), ws.begin() + n + 2});
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (poly_eval(fit.n_coeffs, ks[i]) != Ns[i] || poly_eval(fit.w_coeffs, ks[i]) != ws[i])
      throw FitMismatch("level " + rational_to_string(ks[i]) +
                        " disagrees with the interpolated quasi-polynomial");
  }
  // w(k)/(k N(k)) = F0 + F1/k + ...; matching the two top coefficients of
  // w(k) against (F0 + F1/k) k N(k) gives the closed forms below.
  const Rat w_top = fit.w_coeffs(n + 1), w_sub = fit.w_coeffs(n);
  const Rat n_top = fit.n_coeffs(n), n_sub = n >= 1 ? fit.n_coeffs(n - 1) : Rat(0);
  fit.f0 = w_top / n_top;
  fit.f1 = (w_sub - fit.f0 * n_sub) / n_top;
  return fit;
}

QuantizedProjection quantized_projection(const WeightSpectrum& spec, const SubtorusDirections& W) {
  const long long N = spec.count();
  const int d = W.dim();
  if (N < d + 1)
    throw ComputeError("quantized_projection", "spectrum has too few points for this torus");
  QuantizedProjection out;
  out.coefficients = RVec::Zero(d);
  if (d == 0) {
    out.projected.assign(N, Rat(0));
    out.residual = spec.centered;
    return out;
  }
  const int n = W.ambient_dim();
  // Centered generators G_i(a) = <w_i, a> - mean_i.
  std::vector<std::vector<Rat>> G(d, std::vector<Rat>(N, Rat(0)));
  for (int i = 0; i < d; ++i) {
    Rat sum = 0;
    for (long long a = 0; a < N; ++a) {
      Rat v = 0;
      for (int j = 0; j < n; ++j) v += W.basis()[i](j) * Rat(spec.points(a, j));
      G[i][a] = v;
      sum += v;
    }
    Rat m = sum / Rat(N);
    for (long long a = 0; a < N; ++a) G[i][a] -= m;
  }
  RMat gram(d, d);
  RVec rhs(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Rat s = 0;
      for (long long a = 0; a < N; ++a) s += G[i][a] * G[j][a];
      gram(i, j) = s;
      gram(j, i) = s;
    }
    Rat r = 0;
    for (long long a = 0; a < N; ++a) r += spec.centered[a] * G[i][a];
    rhs(i) = r;
  }
  Eigen::FullPivLU<RMat> lu(gram);
  if (lu.rank() != d)
    throw DegenerateGram("quantized_projection",
                         "generator Gram matrix is singular at level " + std::to_string(spec.k));
  out.coefficients = lu.solve(rhs);
  out.projected.assign(N, Rat(0));
  out.residual.assign(N, Rat(0));
  for (long long a = 0; a < N; ++a) {
    Rat v = 0;
    for (int i = 0; i < d; ++i) v += out.coefficients(i) * G[i][a];
    out.projected[a] = v;
    out.residual[a] = spec.centered[a] - v;
  }
  return out;
}

Rat trace_moment(const std::vector<Rat>& values, long long k, int p, MomentMode mode) {
  if (p < 1) throw ValidationError("moment order must be >= 1");
  if (k < 1) throw ValidationError("level k must be >= 1");
  if (values.empty()) throw ValidationError("empty value list");
  Rat sum = 0;
  for (const Rat& v : values) {
    Rat term = 1;
    for (int t = 0; t < p; ++t) term *= v;
    if (mode == MomentMode::Absolute) term = rat_abs(term);
    sum += term;
  }
  Rat scale = Rat(values.size());
  for (int t = 0; t < p; ++t) scale *= Rat(k);
  return sum / scale;
}

std::vector<RVec> limit_projection_coefficients(const ToricTestConfig& tc,
                                                const SubtorusDirections& W,
                                                const std::vector<long long>& k_list) {
  std::vector<RVec> out;
  for (long long k : k_list) {
    WeightSpectrum spec = weight_spectrum(tc, k);
    QuantizedProjection qp = quantized_projection(spec, W);
    out.push_back(RVec(qp.coefficients / Rat(tc.D)));
  }
  return out;
}

}  // namespace kstab
