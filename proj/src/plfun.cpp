#include "kstab/plfun.hpp"

#include <algorithm>
#include <cmath>

#include "kstab/errors.hpp"

namespace kstab {

namespace {

Rat signed_power_over(const LatticePolytope& Q, const AffinePiece& h, int p) {
  Rat total = 0;
  for (const Simplex& s : triangulate(Q)) total += integrate_affine_power_over_simplex(s, h, p);
  return total;
}

AffinePiece negate(const AffinePiece& a) { return {RVec(-a.slope), -a.constant}; }

}  // namespace

PLConvexFunction::PLConvexFunction(std::vector<AffinePiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ValidationError("piecewise-linear function needs at least one piece");
  const Eigen::Index n = pieces_[0].slope.size();
  if (n < 1) throw ValidationError("piece slope must have positive dimension");
  for (const AffinePiece& p : pieces_)
    if (p.slope.size() != n) throw ValidationError("pieces have mismatched dimensions");
  // Merge exact duplicates so domination regions stay full-dimensional.
  std::vector<AffinePiece> unique;
  for (const AffinePiece& p : pieces_) {
    bool seen = false;
    for (const AffinePiece& q : unique)
      if (p == q) seen = true;
    if (!seen) unique.push_back(p);
  }
  pieces_ = std::move(unique);
}

PLConvexFunction::PLConvexFunction(const AffinePiece& piece)
    : PLConvexFunction(std::vector<AffinePiece>{piece}) {}

Rat PLConvexFunction::operator()(const RVec& x) const {
  Rat best = pieces_[0](x);
  for (std::size_t i = 1; i < pieces_.size(); ++i) best = std::max(best, pieces_[i](x));
  return best;
}

PLExpr::PLExpr(PLConvexFunction p) : pos(std::move(p)), neg(zero_affine(pos.dim())) {}
PLExpr::PLExpr(const AffinePiece& p) : PLExpr(PLConvexFunction(p)) {}
PLExpr::PLExpr(PLConvexFunction p, PLConvexFunction n) : pos(std::move(p)), neg(std::move(n)) {
  if (pos.dim() != neg.dim()) throw ValidationError("expression halves have mismatched dimensions");
}

PLExpr operator-(const PLConvexFunction& a, const PLConvexFunction& b) { return PLExpr(a, b); }

AffinePiece affine_sum(const AffinePiece& a, const AffinePiece& b) {
  return {RVec(a.slope + b.slope), a.constant + b.constant};
}

AffinePiece affine_diff(const AffinePiece& a, const AffinePiece& b) {
  return {RVec(a.slope - b.slope), a.constant - b.constant};
}

AffinePiece affine_scale(const AffinePiece& a, const Rat& m) {
  return {RVec(a.slope * m), a.constant * m};
}

PLConvexFunction add_affine(const PLConvexFunction& f, const AffinePiece& ell) {
  std::vector<AffinePiece> ps;
  for (const AffinePiece& p : f.pieces()) ps.push_back(affine_sum(p, ell));
  return PLConvexFunction(std::move(ps));
}

PLConvexFunction scale(const PLConvexFunction& f, const Rat& m) {
  if (m < 0) throw ValidationError("scaling a convex max by a negative factor breaks convexity");
  std::vector<AffinePiece> ps;
  for (const AffinePiece& p : f.pieces()) ps.push_back(affine_scale(p, m));
  return PLConvexFunction(std::move(ps));
}

PLExpr shift(const PLExpr& g, const Rat& c) {
  return PLExpr(add_affine(g.pos, {RVec::Zero(g.dim()), c}), g.neg);
}

std::pair<PLConvexFunction, long long> clear_denominators(const PLConvexFunction& f) {
  Int l = 1;
  for (const AffinePiece& p : f.pieces()) {
    l = int_lcm(l, denominator_lcm(p.slope));
    l = int_lcm(l, denominator(p.constant));
  }
  long long D = l.convert_to<long long>();
  return {scale(f, Rat(D)), D};
}

Subdivision linearity_regions(const PLConvexFunction& f, const LatticePolytope& P) {
  Subdivision out;
  const auto& ps = f.pieces();
  for (std::size_t j = 0; j < ps.size(); ++j) {
    std::vector<std::pair<RVec, Rat>> ineqs;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i == j) continue;
      // piece j >= piece i, i.e. <s_i - s_j, x> <= c_j - c_i
      ineqs.emplace_back(RVec(ps[i].slope - ps[j].slope), ps[j].constant - ps[i].constant);
    }
    if (auto cell = clip(P, ineqs)) out.cells.push_back({std::move(*cell), ps[j]});
  }
  return out;
}

Subdivision affine_cells(const PLExpr& g, const LatticePolytope& P) {
  Subdivision out;
  for (const auto& pc : linearity_regions(g.pos, P).cells)
    for (const auto& nc : linearity_regions(g.neg, pc.region).cells)
      out.cells.push_back({nc.region, affine_diff(pc.active, nc.active)});
  return out;
}

std::optional<AffinePiece> dominant_piece(const PLConvexFunction& f, const LatticePolytope& P) {
  if (f.dim() != P.dim()) throw ValidationError("function and polytope dimensions differ");
  for (const AffinePiece& p : f.pieces()) {
    bool dominates = true;
    for (const RVec& v : P.vertices())
      if (p(v) != f(v)) {
        dominates = false;
        break;
      }
    // f - p is convex, nonnegative, and zero at every vertex, hence zero on P.
    if (dominates) return p;
  }
  return std::nullopt;
}

bool is_affine_on(const PLConvexFunction& f, const LatticePolytope& P) {
  return dominant_piece(f, P).has_value();
}

Rat integrate_pl(const PLExpr& g, const LatticePolytope& P) {
  return integrate_signed_power(g, P, 1);
}

Rat integrate_signed_power(const PLExpr& g, const LatticePolytope& P, int p) {
  if (p < 0) throw ValidationError("power must be nonnegative");
  Rat total = 0;
  for (const auto& cell : affine_cells(g, P).cells) total += signed_power_over(cell.region, cell.active, p);
  return total;
}

Rat integrate_abs_power(const PLExpr& g, const LatticePolytope& P, int p) {
  if (p < 1) throw ValidationError("power must be >= 1");
  Rat total = 0;
  for (const auto& cell : affine_cells(g, P).cells) {
    const AffinePiece& h = cell.active;
    bool has_pos = false, has_neg = false;
    for (const RVec& v : cell.region.vertices()) {
      Rat val = h(v);
      if (val > 0) has_pos = true;
      if (val < 0) has_neg = true;
    }
    if (!has_neg) {
      total += signed_power_over(cell.region, h, p);
    } else if (!has_pos) {
      total += signed_power_over(cell.region, negate(h), p);
    } else {
      if (auto plus = clip(cell.region, {{RVec(-h.slope), h.constant}}))
        total += signed_power_over(*plus, h, p);
      if (auto minus = clip(cell.region, {{h.slope, -h.constant}}))
        total += signed_power_over(*minus, negate(h), p);
    }
  }
  return total;
}

namespace {

// Integral of h^p over Q for real p, given h >= 0 on Q. The sublevel volume
// V(t) = vol(Q n {h <= t}) is a polynomial of degree <= n between
// consecutive vertex values of h, so it is recovered exactly by
// interpolation; only int t^p dV(t) is evaluated in floating point.
double sliced_power_integral(const LatticePolytope& Q, const AffinePiece& h, double p) {
  const int n = Q.dim();
  std::vector<Rat> breaks;
  for (const RVec& v : Q.vertices()) breaks.push_back(h(v));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.size() == 1)
    return rat_to_double(volume(Q)) * std::pow(rat_to_double(breaks[0]), p);
  auto sublevel_volume = [&](const Rat& t) {
    auto cut = clip(Q, {{h.slope, t - h.constant}});
    return cut ? volume(*cut) : Rat(0);
  };
  double total = 0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const Rat &a = breaks[b], &c = breaks[b + 1];
    std::vector<Rat> xs(n + 1), ys(n + 1);
    for (int s = 0; s <= n; ++s) {
      xs[s] = a + (c - a) * Rat(s, n > 0 ? n : 1);
      ys[s] = sublevel_volume(xs[s]);
    }
    RVec coeffs = lagrange_interpolate(xs, ys);
    // int_a^c t^p V'(t) dt with V'(t) = sum m*v_m t^(m-1).
    double ad = rat_to_double(a), cd = rat_to_double(c);
    for (int m = 1; m < coeffs.size(); ++m) {
      double vm = rat_to_double(coeffs(m));
      double e = p + static_cast<double>(m);
      total += static_cast<double>(m) * vm * (std::pow(cd, e) - std::pow(ad, e)) / e;
    }
  }
  return total;
}

}  // namespace

double integrate_abs_power_real(const PLExpr& g, const LatticePolytope& P, double p) {
  if (p < 1) throw ValidationError("power must be >= 1");
  double total = 0;
  for (const auto& cell : affine_cells(g, P).cells) {
    const AffinePiece& h = cell.active;
    bool has_pos = false, has_neg = false;
    for (const RVec& v : cell.region.vertices()) {
      Rat val = h(v);
      if (val > 0) has_pos = true;
      if (val < 0) has_neg = true;
    }
    if (!has_neg) {
      total += sliced_power_integral(cell.region, h, p);
    } else if (!has_pos) {
      total += sliced_power_integral(cell.region, negate(h), p);
    } else {
      if (auto plus = clip(cell.region, {{RVec(-h.slope), h.constant}}))
        total += sliced_power_integral(*plus, h, p);
      if (auto minus = clip(cell.region, {{h.slope, -h.constant}}))
        total += sliced_power_integral(*minus, negate(h), p);
    }
  }
  return total;
}

Rat mean(const PLExpr& g, const LatticePolytope& P) { return integrate_pl(g, P) / volume(P); }

namespace {

PLConvexFunction pullback(const PLConvexFunction& f, const std::vector<AffinePiece>& lift,
                          int base_dim) {
  std::vector<AffinePiece> ps;
  for (const AffinePiece& piece : f.pieces()) {
    RVec slope = RVec::Zero(base_dim);
    Rat c = piece.constant;
    for (int m = 0; m < static_cast<int>(lift.size()); ++m) {
      slope += piece.slope(m) * lift[m].slope;
      c += piece.slope(m) * lift[m].constant;
    }
    ps.push_back({slope, c});
  }
  return PLConvexFunction(std::move(ps));
}

}  // namespace

Rat boundary_integral(const LatticePolytope& P, const PLExpr& g) {
  if (g.dim() != P.dim()) throw ValidationError("function and polytope dimensions differ");
  if (P.dim() == 1) return g(P.vertices()[0]) + g(P.vertices()[1]);
  Rat total = 0;
  for (int fi = 0; fi < static_cast<int>(P.facets().size()); ++fi) {
    FacetChart chart = facet_chart(P, fi);
    const int bd = P.dim() - 1;
    PLExpr pulled(pullback(g.pos, chart.lift, bd), pullback(g.neg, chart.lift, bd));
    total += chart.normalizer * integrate_pl(pulled, chart.base);
  }
  return total;
}

}  // namespace kstab
