#include "kstab/invariants.hpp"

#include <cmath>
#include <functional>

#include "kstab/errors.hpp"

namespace kstab {

namespace {

bool integer_power(double p) { return p == std::floor(p) && p >= 1 && p <= 64; }

/// f - fbar + ell as a single convex function (ell affine).
PLConvexFunction centered_plus_affine(const PLConvexFunction& f, const LatticePolytope& P,
                                      const AffinePiece& ell) {
  Rat fbar = mean(f, P);
  return add_affine(f, {ell.slope, ell.constant - fbar});
}

/// Exact integral of the product of two affine functions over Q, expanded
/// into monomial moments.
Rat integrate_affine_product(const LatticePolytope& Q, const AffinePiece& u, const AffinePiece& h) {
  const int n = Q.dim();
  std::vector<int> zero(n, 0);
  Rat s = u.constant * h.constant * moment_integral(Q, zero);
  for (int a = 0; a < n; ++a) {
    std::vector<int> ea(n, 0);
    ea[a] = 1;
    s += (u.constant * h.slope(a) + h.constant * u.slope(a)) * moment_integral(Q, ea);
    for (int b = 0; b < n; ++b) {
      std::vector<int> eab(n, 0);
      ++eab[a];
      ++eab[b];
      s += u.slope(a) * h.slope(b) * moment_integral(Q, eab);
    }
  }
  return s;
}

NormReport finish_norm(const PLConvexFunction& g, const LatticePolytope& P, double p,
                       NormKind kind) {
  NormReport report;
  report.p = p;
  report.kind = kind;
  Rat V = volume(P);
  if (integer_power(p)) {
    Rat inner = integrate_abs_power(g, P, static_cast<int>(p)) / V;
    report.exact_inner = inner;
    report.value = std::pow(rat_to_double(inner), 1.0 / p);
  } else {
    report.value = std::pow(integrate_abs_power_real(g, P, p) / rat_to_double(V), 1.0 / p);
  }
  return report;
}

}  // namespace

ProjectionResult continuous_projection(const PLConvexFunction& f, const LatticePolytope& P,
                                       const SubtorusDirections& W) {
  if (f.dim() != P.dim() || W.ambient_dim() != P.dim())
    throw ValidationError("function, polytope, and torus dimensions differ");
  const int d = W.dim();
  const int n = P.dim();
  Rat V = volume(P);
  Rat fbar = mean(f, P);
  ProjectionResult out;
  out.coefficients = RVec::Zero(d);
  // Hamiltonians h_i(x) = <w_i, x> - mean_i.
  std::vector<AffinePiece> ham;
  for (int i = 0; i < d; ++i) {
    const RVec& w = W.basis()[i];
    Rat mi = 0;
    for (int j = 0; j < n; ++j) {
      std::vector<int> ej(n, 0);
      ej[j] = 1;
      mi += w(j) * moment_integral(P, ej);
    }
    ham.push_back({w, -mi / V});
  }
  AffinePiece proj = zero_affine(n);
  Rat fitted = 0;  // c^T rhs = int (f - fbar) * projected
  if (d > 0) {
    RMat gram(d, d);
    RVec rhs(d);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        Rat s = integrate_affine_product(P, ham[i], ham[j]);
        gram(i, j) = s;
        gram(j, i) = s;
      }
      // int (f - fbar) h_i = int f h_i since h_i is mean-zero.
      rhs(i) = 0;
      for (const auto& cell : linearity_regions(f, P).cells)
        rhs(i) += integrate_affine_product(cell.region, cell.active, ham[i]);
    }
    Eigen::FullPivLU<RMat> lu(gram);
    if (lu.rank() != d)
      throw DegenerateGram("continuous_projection");
    out.coefficients = lu.solve(rhs);
    RVec slope = RVec::Zero(n);
    Rat constant = 0;
    for (int i = 0; i < d; ++i) {
      slope += out.coefficients(i) * ham[i].slope;
      constant += out.coefficients(i) * ham[i].constant;
    }
    proj = {slope, constant};
    fitted = out.coefficients.dot(rhs);
  }
  out.projected = proj;
  Rat var = integrate_abs_power(add_affine(f, {RVec::Zero(n), -fbar}), P, 2);
  out.residual_mean_square = (var - fitted) / V;
  return out;
}

Rat df(const ToricTestConfig& tc) { return ehrhart_fit(tc).f1 / Rat(tc.D); }

Rat df_boundary(const ToricTestConfig& tc) {
  if (!tc.scaled) throw UnscaledConfig("df_boundary");
  const LatticePolytope& P = tc.polytope;
  Rat V = volume(P);
  PLExpr one(AffinePiece{RVec::Zero(P.dim()), Rat(1)});
  Rat a = boundary_integral(P, one) / V;
  return (boundary_integral(P, tc.f) - a * integrate_pl(tc.f, P)) / (2 * V);
}

Rat df_affine(const LatticePolytope& P, const AffinePiece& ell) {
  Rat V = volume(P);
  PLExpr one(AffinePiece{RVec::Zero(P.dim()), Rat(1)});
  Rat a = boundary_integral(P, one) / V;
  PLExpr g(ell);
  return (boundary_integral(P, g) - a * integrate_pl(g, P)) / (2 * V);
}

NormReport norm_p(const ToricTestConfig& tc, double p) {
  if (p < 1) throw ValidationError("norm order must be >= 1");
  return finish_norm(centered_plus_affine(tc.original, tc.polytope, zero_affine(tc.polytope.dim())),
                     tc.polytope, p, NormKind::Plain);
}

NormReport twisted_norm(const ToricTestConfig& tc, const AffinePiece& ell, double p) {
  if (p < 1) throw ValidationError("norm order must be >= 1");
  if (ell.slope.size() != tc.polytope.dim())
    throw ValidationError("twist direction has wrong dimension");
  Rat lbar = mean(PLExpr(ell), tc.polytope);
  AffinePiece centered_ell{ell.slope, ell.constant - lbar};
  NormReport report =
      finish_norm(centered_plus_affine(tc.original, tc.polytope, centered_ell), tc.polytope, p,
                  NormKind::Twisted);
  return report;
}

NormReport reduced_norm(const ToricTestConfig& tc, const SubtorusDirections& W, double p) {
  if (p < 1) throw ValidationError("norm order must be >= 1");
  ProjectionResult proj = continuous_projection(tc.original, tc.polytope, W);
  AffinePiece neg{RVec(-proj.projected.slope), -proj.projected.constant};
  NormReport report = finish_norm(centered_plus_affine(tc.original, tc.polytope, neg), tc.polytope,
                                  p, NormKind::Reduced);
  return report;
}

namespace {

// Line-search iterates are generic doubles; converting them exactly would
// produce dyadic rationals with ~2^52 denominators, and the facet normals
// of the sign-split cells would then overflow the 64-bit representation.
// Best rational approximation with a bounded denominator keeps every
// derived normal small (absolute error below 2^-20, so the objective moves
// by O(2^-40) near a minimum) and still lands exactly on simple rationals
// such as warm starts at -1/3.
Rat snapped_rational(double x) {
  constexpr long long kMaxDen = 1 << 20;
  if (!std::isfinite(x) || std::abs(x) > 1e12)
    throw NonConvergence("infimum_norm", "line search iterate out of range");
  double v = std::abs(x);
  long long h1 = 1, h2 = 0, k1 = 0, k2 = 1;  // convergent recurrences
  long long best_p = 0, best_q = 1;
  double rem = v;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(rem);
    if (fl > 1.8e18) break;
    long long a = static_cast<long long>(fl);
    if (k1 > 0 && a > (kMaxDen - k2) / k1) break;
    long long h = a * h1 + h2;
    long long k = a * k1 + k2;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
    best_p = h;
    best_q = k;
    double frac = rem - fl;
    if (frac < 1e-12) break;
    rem = 1.0 / frac;
  }
  Rat r(best_p, best_q);
  return x < 0 ? Rat(-r) : r;
}

struct TwistObjective {
  const ToricTestConfig& tc;
  const SubtorusDirections& W;
  double p;
  Rat fbar;
  std::vector<Rat> ham_means;  // mean of <w_i, x> on P
  mutable long long evaluations = 0;
  long long cap = 100000;

  double operator()(const std::vector<double>& t) const {
    if (++evaluations > cap)
      throw NonConvergence("infimum_norm", "line search exceeded the evaluation cap");
    const int n = tc.polytope.dim();
    RVec slope = RVec::Zero(n);
    Rat constant = -fbar;
    for (int i = 0; i < W.dim(); ++i) {
      Rat ti = snapped_rational(t[i]);
      slope += ti * W.basis()[i];
      constant -= ti * ham_means[i];
    }
    PLConvexFunction g = add_affine(tc.original, {slope, constant});
    if (p == std::floor(p) && p >= 1)
      return rat_to_double(integrate_abs_power(g, tc.polytope, static_cast<int>(p)));
    return integrate_abs_power_real(g, tc.polytope, p);
  }
};

/// Golden-section minimization of a convex 1-D slice.
double golden_minimize(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return (a + b) / 2;
}

}  // namespace

InfimumResult infimum_norm(const ToricTestConfig& tc, const SubtorusDirections& W, double p,
                           double tol) {
  if (p < 1) throw ValidationError("norm order must be >= 1");
  if (tol <= 0) throw ValidationError("tolerance must be positive");
  const int d = W.dim();
  const int n = tc.polytope.dim();
  Rat V = volume(tc.polytope);

  ProjectionResult proj = continuous_projection(tc.original, tc.polytope, W);
  TwistObjective obj{tc, W, p, mean(tc.original, tc.polytope), {}, 0, 100000};
  for (int i = 0; i < d; ++i) {
    Rat m = 0;
    for (int j = 0; j < n; ++j) {
      std::vector<int> ej(n, 0);
      ej[j] = 1;
      m += W.basis()[i](j) * moment_integral(tc.polytope, ej);
    }
    obj.ham_means.push_back(m / V);
  }

  std::vector<double> t(d);
  for (int i = 0; i < d; ++i) t[i] = -rat_to_double(proj.coefficients(i));
  double best = d > 0 ? obj(t) : obj(std::vector<double>{});
  if (d > 0) {
    for (int sweep = 0; sweep < 60; ++sweep) {
      double before = best;
      for (int i = 0; i < d; ++i) {
        double step = std::max(0.25, 0.25 * std::abs(t[i]));
        auto line = [&](double x) {
          std::vector<double> tt = t;
          tt[i] = x;
          return obj(tt);
        };
        // Expand a bracket around the current point, then contract.
        double lo = t[i] - step, hi = t[i] + step;
        double fl = line(lo), fh = line(hi);
        while (fl < best && lo > t[i] - 64 * step) {
          lo -= step;
          fl = line(lo);
        }
        while (fh < best && hi < t[i] + 64 * step) {
          hi += step;
          fh = line(hi);
        }
        double x = golden_minimize(line, lo, hi, 48);
        double fx = line(x);
        if (fx < best) {
          best = fx;
          t[i] = x;
        }
      }
      if (before - best < tol * std::max(1.0, std::abs(best))) break;
    }
  }

  InfimumResult result;
  result.t = RVec(d);
  RVec slope = RVec::Zero(n);
  Rat constant = 0;
  for (int i = 0; i < d; ++i) {
    Rat ti = snapped_rational(t[i]);
    result.t(i) = ti;
    slope += ti * W.basis()[i];
    constant -= ti * obj.ham_means[i];
  }
  result.minimizer = {slope, constant};
  result.evaluations = obj.evaluations;
  result.report.p = p;
  result.report.kind = NormKind::Infimum;
  result.report.value = std::pow(best / rat_to_double(V), 1.0 / p);
  if (p == std::floor(p)) {
    // Recompute the inner value exactly at the rational minimizer.
    PLConvexFunction g = add_affine(tc.original, {slope, constant - mean(tc.original, tc.polytope)});
    result.report.exact_inner = integrate_abs_power(g, tc.polytope, static_cast<int>(p)) / V;
  }
  return result;
}

Rat df_relative(const ToricTestConfig& tc, const SubtorusDirections& W) {
  ProjectionResult proj = continuous_projection(tc.original, tc.polytope, W);
  return df(tc) - df_affine(tc.polytope, proj.projected);
}

}  // namespace kstab
