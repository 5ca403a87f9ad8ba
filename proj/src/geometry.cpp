#include "kstab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <utility>

namespace kstab {

namespace {

constexpr int kMaxDim = 4;
constexpr int kMaxVertices = 64;
constexpr int kMaxFacets = 64;

// Visits all size-r index subsets of {0..m-1}.
template <typename F>
void for_each_subset(int m, int r, F&& fn) {
  if (r > m) return;
  std::vector<int> idx(r);
  for (int i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = r - 1;
    while (i >= 0 && idx[i] == m - r + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

int affine_rank(const std::vector<RVec>& pts) {
  if (pts.empty()) return -1;
  const int n = static_cast<int>(pts[0].size());
  RMat A(static_cast<Eigen::Index>(pts.size()) - 1, n);
  for (std::size_t i = 1; i < pts.size(); ++i) A.row(i - 1) = (pts[i] - pts[0]).transpose();
  if (A.rows() == 0) return 0;
  return static_cast<int>(Eigen::FullPivLU<RMat>(A).rank());
}

// Scales a rational normal direction to a primitive integer vector; the
// offset is rescaled by the same positive factor.
std::pair<IVec, Rat> primitivize(const RVec& normal, const Rat& offset) {
  const int n = static_cast<int>(normal.size());
  Int l = denominator_lcm(normal);
  Int g = 0;
  std::vector<Int> scaled(n);
  for (int i = 0; i < n; ++i) {
    scaled[i] = numerator(normal(i) * Rat(l));
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(scaled[i]));
  }
  if (g == 0) throw ValidationError("zero facet normal");
  IVec prim(n);
  for (int i = 0; i < n; ++i) {
    Int e = scaled[i] / g;
    // convert_to saturates silently out of range, which would corrupt the
    // facet; refuse instead.
    if (e > std::numeric_limits<long long>::max() || e < std::numeric_limits<long long>::min())
      throw ComputeError("primitivize", "facet normal component exceeds the 64-bit range");
    prim(i) = e.convert_to<long long>();
  }
  return {prim, offset * Rat(l) / Rat(g)};
}

Facet make_facet(const IVec& normal, const Rat& offset) {
  Facet f;
  f.normal = normal;
  f.offset = offset;
  long long best = 0;
  for (Eigen::Index i = 0; i < normal.size(); ++i) {
    long long a = normal(i) < 0 ? -normal(i) : normal(i);
    if (a > best) {
      best = a;
      f.pivot = static_cast<int>(i);
    }
  }
  f.covolume_normalizer = Rat(1, best);
  return f;
}

using FacetKey = std::pair<std::vector<long long>, Rat>;

FacetKey facet_key(const IVec& normal, const Rat& offset) {
  std::vector<long long> v(normal.data(), normal.data() + normal.size());
  return {std::move(v), offset};
}

Rat dot(const IVec& u, const RVec& x) {
  Rat s = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += Rat(u(i)) * x(i);
  return s;
}

bool lex_less(const RVec& a, const RVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

std::vector<RVec> dedupe_points(const std::vector<RVec>& pts) {
  std::vector<RVec> out = pts;
  std::sort(out.begin(), out.end(), lex_less);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const RVec& a, const RVec& b) { return a == b; }),
            out.end());
  return out;
}

// Supporting hyperplanes spanned by n affinely independent points of the
// cloud; every true facet of the hull arises this way.
std::vector<Facet> facets_from_points(int n, const std::vector<RVec>& pts) {
  std::map<FacetKey, Facet> found;
  if (n == 1) {
    Rat lo = pts[0](0), hi = pts[0](0);
    for (const RVec& p : pts) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    IVec up(1), dn(1);
    up(0) = 1;
    dn(0) = -1;
    found.emplace(facet_key(up, hi), make_facet(up, hi));
    found.emplace(facet_key(dn, -lo), make_facet(dn, -lo));
  } else {
    const int m = static_cast<int>(pts.size());
    for_each_subset(m, n, [&](const std::vector<int>& idx) {
      RMat A(n - 1, n);
      for (int i = 1; i < n; ++i) A.row(i - 1) = (pts[idx[i]] - pts[idx[0]]).transpose();
      Eigen::FullPivLU<RMat> lu(A);
      if (lu.rank() != n - 1) return;
      RMat ker = lu.kernel();
      RVec normal = ker.col(0);
      Rat c = normal.dot(pts[idx[0]]);
      bool below = false, above = false;
      for (const RVec& p : pts) {
        Rat s = normal.dot(p);
        if (s < c) below = true;
        if (s > c) above = true;
        if (below && above) return;
      }
      if (above) {
        normal = -normal;
        c = -c;
      }
      auto [prim, off] = primitivize(normal, c);
      FacetKey key = facet_key(prim, off);
      if (!found.count(key)) found.emplace(key, make_facet(prim, off));
    });
  }
  std::vector<Facet> out;
  for (auto& [k, f] : found) out.push_back(f);
  return out;
}

std::vector<RVec> vertices_from_facets(int n, const std::vector<Facet>& facets) {
  std::vector<RVec> verts;
  const int m = static_cast<int>(facets.size());
  for_each_subset(m, n, [&](const std::vector<int>& idx) {
    RMat A(n, n);
    RVec b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = Rat(facets[idx[i]].normal(j));
      b(i) = facets[idx[i]].offset;
    }
    Eigen::FullPivLU<RMat> lu(A);
    if (lu.rank() != n) return;
    RVec x = lu.solve(b);
    for (const Facet& f : facets)
      if (dot(f.normal, x) > f.offset) return;
    verts.push_back(x);
  });
  return dedupe_points(verts);
}

// A half-space intersection is bounded iff its recession cone {d : Ud <= 0}
// is trivial; extreme rays lie on n-1 active constraints, and a nontrivial
// lineality space shows up as a rank deficit.
bool halfspaces_bounded(int n, const std::vector<Facet>& facets) {
  const int m = static_cast<int>(facets.size());
  if (m < n + 1) return false;
  RMat U(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) U(i, j) = Rat(facets[i].normal(j));
  if (Eigen::FullPivLU<RMat>(U).rank() < n) return false;
  auto recedes = [&](const RVec& d) {
    bool nonzero = false;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (d(i) != 0) nonzero = true;
    if (!nonzero) return false;
    for (const Facet& f : facets)
      if (dot(f.normal, d) > 0) return false;
    return true;
  };
  bool unbounded = false;
  for_each_subset(m, n - 1, [&](const std::vector<int>& idx) {
    if (unbounded) return;
    RMat A(n - 1, n);
    for (int i = 0; i < n - 1; ++i) A.row(i) = U.row(idx[i]);
    Eigen::FullPivLU<RMat> lu(A);
    RMat ker = n == 1 ? RMat::Identity(1, 1) : RMat(lu.kernel());
    if (n > 1 && lu.rank() < static_cast<Eigen::Index>(n - 1)) return;
    for (Eigen::Index c = 0; c < ker.cols(); ++c) {
      RVec d = ker.col(c);
      if (recedes(d) || recedes(RVec(-d))) unbounded = true;
    }
  });
  return !unbounded;
}

std::vector<Facet> normalize_and_dedupe(int n, const std::vector<Facet>& raw) {
  std::map<std::vector<long long>, Rat> best;  // normal -> tightest offset
  for (const Facet& f : raw) {
    if (f.normal.size() != n) throw ValidationError("facet normal has wrong dimension");
    RVec dir(n);
    for (int j = 0; j < n; ++j) dir(j) = Rat(f.normal(j));
    auto [prim, off] = primitivize(dir, f.offset);
    std::vector<long long> key(prim.data(), prim.data() + prim.size());
    auto it = best.find(key);
    if (it == best.end())
      best.emplace(key, off);
    else
      it->second = std::min(it->second, off);
  }
  std::vector<Facet> out;
  for (auto& [key, off] : best) {
    IVec u(n);
    for (int j = 0; j < n; ++j) u(j) = key[j];
    out.push_back(make_facet(u, off));
  }
  return out;
}

}  // namespace

Rat AffinePiece::operator()(const RVec& x) const { return slope.dot(x) + constant; }

bool AffinePiece::operator==(const AffinePiece& o) const {
  return constant == o.constant && slope.size() == o.slope.size() && slope == o.slope;
}

AffinePiece zero_affine(int dim) { return {RVec::Zero(dim), Rat(0)}; }

Rat Simplex::volume() const {
  const Eigen::Index n = verts.cols();
  RMat A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) A.row(i) = verts.row(i + 1) - verts.row(0);
  Rat det = A.determinant();
  Rat fact = 1;
  for (Eigen::Index i = 2; i <= n; ++i) fact *= Rat(i);
  return rat_abs(det) / fact;
}

LatticePolytope LatticePolytope::from_vertices(int dim, const std::vector<RVec>& points) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be between 1 and 4");
  if (points.empty()) throw ValidationError("no vertices given");
  for (const RVec& p : points)
    if (p.size() != dim) throw ValidationError("vertex has wrong dimension");
  std::vector<RVec> pts = dedupe_points(points);
  if (static_cast<int>(pts.size()) > kMaxVertices)
    throw ValidationError("too many vertices (desk-scale limit)");
  if (affine_rank(pts) != dim)
    throw ValidationError("polytope is not full-dimensional");
  LatticePolytope P;
  P.dim_ = dim;
  P.facets_ = facets_from_points(dim, pts);
  P.vertices_ = vertices_from_facets(dim, P.facets_);
  return P;
}

LatticePolytope LatticePolytope::from_facets(int dim, const std::vector<Facet>& facets) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be between 1 and 4");
  if (facets.empty()) throw ValidationError("no facets given");
  if (static_cast<int>(facets.size()) > kMaxFacets)
    throw ValidationError("too many facets (desk-scale limit)");
  std::vector<Facet> fs = normalize_and_dedupe(dim, facets);
  if (!halfspaces_bounded(dim, fs))
    throw ValidationError("facet system describes an unbounded region");
  std::vector<RVec> verts = vertices_from_facets(dim, fs);
  if (verts.empty()) throw ValidationError("facet system has empty interior");
  if (affine_rank(verts) != dim)
    throw ValidationError("polytope is not full-dimensional");
  // Recompute the facet set from the recovered vertices; redundant input
  // inequalities are pruned here.
  LatticePolytope P;
  P.dim_ = dim;
  P.facets_ = facets_from_points(dim, verts);
  P.vertices_ = vertices_from_facets(dim, P.facets_);
  return P;
}

bool LatticePolytope::contains(const RVec& x) const {
  for (const Facet& f : facets_)
    if (dot(f.normal, x) > f.offset) return false;
  return true;
}

std::vector<int> LatticePolytope::facet_vertex_indices(int fi) const {
  const Facet& f = facets_.at(fi);
  std::vector<int> out;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (dot(f.normal, vertices_[i]) == f.offset) out.push_back(static_cast<int>(i));
  return out;
}

std::pair<RVec, RVec> LatticePolytope::bounding_box() const {
  RVec lo = vertices_[0], hi = vertices_[0];
  for (const RVec& v : vertices_)
    for (int j = 0; j < dim_; ++j) {
      lo(j) = std::min(lo(j), v(j));
      hi(j) = std::max(hi(j), v(j));
    }
  return {lo, hi};
}

bool LatticePolytope::operator==(const LatticePolytope& o) const {
  if (dim_ != o.dim_ || vertices_.size() != o.vertices_.size()) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (!(vertices_[i] == o.vertices_[i])) return false;
  return true;
}

Rat volume(const LatticePolytope& P) {
  Rat v = 0;
  for (const Simplex& s : triangulate(P)) v += s.volume();
  return v;
}

std::vector<Simplex> triangulate(const LatticePolytope& P) {
  const int n = P.dim();
  std::vector<Simplex> out;
  if (n == 1) {
    Simplex s;
    s.verts = RMat(2, 1);
    s.verts(0, 0) = P.vertices()[0](0);
    s.verts(1, 0) = P.vertices()[1](0);
    out.push_back(s);
    return out;
  }
  const RVec& apex = P.vertices()[0];
  for (int fi = 0; fi < static_cast<int>(P.facets().size()); ++fi) {
    const Facet& f = P.facets()[fi];
    if (dot(f.normal, apex) == f.offset) continue;  // apex on facet: zero-volume cone
    FacetChart chart = facet_chart(P, fi);
    for (const Simplex& base : triangulate(chart.base)) {
      Simplex s;
      s.verts = RMat(n + 1, n);
      s.verts.row(0) = apex.transpose();
      for (int r = 0; r < n; ++r) {
        RVec y = base.verts.row(r).transpose();
        for (int j = 0; j < n; ++j) s.verts(r + 1, j) = chart.lift[j](y);
      }
      out.push_back(s);
    }
  }
  return out;
}

Rat integrate_affine_power_over_simplex(const Simplex& S, const AffinePiece& piece, int p) {
  const Eigen::Index n = S.verts.cols();
  // In barycentric coordinates an affine function is sum(lambda_i * b_i);
  // integrating the expansion termwise gives n! vol p!/(n+p)! h_p(b),
  // h_p the complete homogeneous symmetric polynomial.
  std::vector<Rat> b(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) b[i] = piece(RVec(S.verts.row(i).transpose()));
  std::vector<Rat> h(p + 1, Rat(0));
  h[0] = 1;
  for (Eigen::Index i = 0; i <= n; ++i)
    for (int d = 1; d <= p; ++d) h[d] += b[i] * h[d - 1];
  Rat scale = S.volume();
  for (int d = 1; d <= p; ++d) scale *= Rat(d) / Rat(n + d);
  return scale * h[p];
}

Rat moment_over_simplex(const Simplex& S, const std::vector<int>& alpha) {
  const Eigen::Index n = S.verts.cols();
  if (static_cast<Eigen::Index>(alpha.size()) != n)
    throw ValidationError("multi-index has wrong length");
  // Expand prod_j (sum_i lambda_i v_ij)^alpha_j as a polynomial in the n+1
  // barycentric coordinates, then integrate monomials in closed form.
  using Mono = std::vector<int>;
  std::map<Mono, Rat> poly;
  poly[Mono(n + 1, 0)] = 1;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int rep = 0; rep < alpha[j]; ++rep) {
      std::map<Mono, Rat> next;
      for (const auto& [mono, coef] : poly) {
        for (Eigen::Index i = 0; i <= n; ++i) {
          if (S.verts(i, j) == 0) continue;
          Mono m = mono;
          ++m[i];
          next[m] += coef * S.verts(i, j);
        }
      }
      poly = std::move(next);
    }
  }
  auto factorial = [](long long v) {
    Rat f = 1;
    for (long long i = 2; i <= v; ++i) f *= Rat(i);
    return f;
  };
  Rat nfact_vol = factorial(n) * S.volume();
  Rat total = 0;
  for (const auto& [mono, coef] : poly) {
    int deg = 0;
    Rat betas = 1;
    for (int e : mono) {
      deg += e;
      betas *= factorial(e);
    }
    total += coef * nfact_vol * betas / factorial(n + deg);
  }
  return total;
}

Rat moment_integral(const LatticePolytope& P, const std::vector<int>& alpha) {
  Rat total = 0;
  for (const Simplex& s : triangulate(P)) total += moment_over_simplex(s, alpha);
  return total;
}

IMat lattice_points(const LatticePolytope& P, long long k) {
  if (k < 1) throw ValidationError("dilation level must be >= 1");
  const int n = P.dim();
  auto [lo, hi] = P.bounding_box();
  std::vector<long long> lob(n), hib(n);
  auto rat_floor = [](const Rat& r) {
    Int num = numerator(r), den = denominator(r);
    Int q = num / den;
    if (num < 0 && q * den != num) --q;
    return q.convert_to<long long>();
  };
  for (int j = 0; j < n; ++j) {
    lob[j] = -rat_floor(-Rat(k) * lo(j));  // ceil
    hib[j] = rat_floor(Rat(k) * hi(j));
  }
  struct ScaledIneq {
    std::vector<long long> u;
    long long num, den;  // <a,u>*den <= num
  };
  std::vector<ScaledIneq> ineqs;
  for (const Facet& f : P.facets()) {
    Rat rhs = Rat(k) * f.offset;
    ScaledIneq si;
    si.u.assign(f.normal.data(), f.normal.data() + n);
    si.num = numerator(rhs).convert_to<long long>();
    si.den = denominator(rhs).convert_to<long long>();
    ineqs.push_back(std::move(si));
  }
  std::vector<long long> flat;
  std::vector<long long> a(lob);
  bool more = true;
  for (int j = 0; j < n; ++j)
    if (lob[j] > hib[j]) more = false;
  while (more) {
    bool inside = true;
    for (const ScaledIneq& si : ineqs) {
      long long s = 0;
      for (int j = 0; j < n; ++j) s += si.u[j] * a[j];
      if (s * si.den > si.num) {
        inside = false;
        break;
      }
    }
    if (inside) flat.insert(flat.end(), a.begin(), a.end());
    int j = n - 1;
    while (j >= 0) {
      if (a[j] < hib[j]) {
        ++a[j];
        for (int l = j + 1; l < n; ++l) a[l] = lob[l];
        break;
      }
      --j;
    }
    if (j < 0) more = false;
  }
  const long long count = static_cast<long long>(flat.size()) / n;
  IMat pts(count, n);
  for (long long i = 0; i < count; ++i)
    for (int j = 0; j < n; ++j) pts(i, j) = flat[i * n + j];
  return pts;
}

FacetChart facet_chart(const LatticePolytope& P, int fi) {
  const int n = P.dim();
  if (n < 2) throw ValidationError("facet charts require dimension >= 2");
  const Facet& f = P.facets().at(fi);
  std::vector<int> kept;
  for (int j = 0; j < n; ++j)
    if (j != f.pivot) kept.push_back(j);
  std::vector<RVec> proj;
  for (int vi : P.facet_vertex_indices(fi)) {
    const RVec& v = P.vertices()[vi];
    RVec y(n - 1);
    for (int t = 0; t < n - 1; ++t) y(t) = v(kept[t]);
    proj.push_back(y);
  }
  std::vector<AffinePiece> lift(n, zero_affine(n - 1));
  for (int t = 0; t < n - 1; ++t) {
    RVec e = RVec::Zero(n - 1);
    e(t) = 1;
    lift[kept[t]] = {e, Rat(0)};
  }
  // Pivot coordinate solves <x, normal> = offset.
  RVec s(n - 1);
  for (int t = 0; t < n - 1; ++t) s(t) = Rat(-f.normal(kept[t])) / Rat(f.normal(f.pivot));
  lift[f.pivot] = {s, f.offset / Rat(f.normal(f.pivot))};
  return FacetChart{LatticePolytope::from_vertices(n - 1, proj), std::move(lift),
                    f.covolume_normalizer};
}

std::optional<LatticePolytope> clip(const LatticePolytope& P,
                                    const std::vector<std::pair<RVec, Rat>>& ineqs) {
  std::vector<Facet> fs = P.facets();
  for (const auto& [a, b] : ineqs) {
    bool zero = true;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a(i) != 0) zero = false;
    if (zero) {
      if (b < 0) return std::nullopt;  // infeasible constant constraint
      continue;
    }
    auto [prim, off] = primitivize(a, b);
    fs.push_back(make_facet(prim, off));
  }
  fs = normalize_and_dedupe(P.dim(), fs);
  std::vector<RVec> verts = vertices_from_facets(P.dim(), fs);
  if (verts.empty() || affine_rank(verts) != P.dim()) return std::nullopt;
  LatticePolytope Q;
  Q.dim_ = P.dim();
  Q.facets_ = facets_from_points(P.dim(), verts);
  Q.vertices_ = vertices_from_facets(P.dim(), Q.facets_);
  return Q;
}

RVec interval_facet_point(const LatticePolytope& P, int fi) {
  if (P.dim() != 1) throw ValidationError("interval_facet_point requires dimension 1");
  const Facet& f = P.facets().at(fi);
  RVec x(1);
  x(0) = f.offset / Rat(f.normal(0));
  return x;
}

}  // namespace kstab
