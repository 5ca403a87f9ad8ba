#ifndef KSTAB_GEOMETRY_HPP
#define KSTAB_GEOMETRY_HPP

#include <optional>
#include <utility>
#include <vector>

#include "kstab/errors.hpp"
#include "kstab/rational.hpp"

namespace kstab {

/// x -> <slope, x> + constant.
struct AffinePiece {
  RVec slope;
  Rat constant;

  Rat operator()(const RVec& x) const;
  bool operator==(const AffinePiece& o) const;
};

AffinePiece zero_affine(int dim);

/**
 * Facet inequality <x, normal> <= offset with primitive integer normal.
 *
 * The facet chart drops the `pivot` coordinate (largest |normal| entry);
 * `covolume_normalizer` = 1/|normal[pivot]| rescales Lebesgue measure in the
 * chart so that the induced (n-1)-lattice on the facet has covolume 1.  This
 * is the boundary measure for which the two-term lattice count expansion
 * |kP| = V k^n + (1/2) Vol(dP) k^(n-1) + ... holds.
 */
struct Facet {
  IVec normal;
  Rat offset;
  int pivot = 0;
  Rat covolume_normalizer = 1;
};

struct Simplex {
  RMat verts;  // (n+1) x n, one vertex per row
  Rat volume() const;
};

/**
 * Full-dimensional bounded rational polytope in R^n with both descriptions.
 *
 * Construction canonicalizes: vertices are the extreme points sorted
 * lexicographically, facets are recomputed from them and sorted, redundant
 * input (interior points, non-facet inequalities) is pruned.  Immutable
 * afterwards; all operations are pure.
 */
class LatticePolytope {
 public:
  static LatticePolytope from_vertices(int dim, const std::vector<RVec>& points);
  static LatticePolytope from_facets(int dim, const std::vector<Facet>& facets);

  int dim() const { return dim_; }
  const std::vector<RVec>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }

  bool contains(const RVec& x) const;
  /// Indices of vertices lying on facet fi.
  std::vector<int> facet_vertex_indices(int fi) const;
  /// Componentwise rational bounding box [lo, hi].
  std::pair<RVec, RVec> bounding_box() const;

  bool operator==(const LatticePolytope& o) const;

 private:
  LatticePolytope() = default;
  int dim_ = 0;
  std::vector<RVec> vertices_;
  std::vector<Facet> facets_;

  friend std::optional<LatticePolytope> clip(const LatticePolytope&,
                                             const std::vector<std::pair<RVec, Rat>>&);
};

/// Exact Euclidean volume, positive for any valid polytope.
Rat volume(const LatticePolytope& P);

/// Simplices with disjoint interiors covering P; volumes sum to volume(P).
std::vector<Simplex> triangulate(const LatticePolytope& P);

/// Exact integral of x^alpha over P (alpha a multi-index of length dim).
Rat moment_integral(const LatticePolytope& P, const std::vector<int>& alpha);

/// Exact integral of prod_j piece_j(x)^alpha_j over a simplex.
Rat moment_over_simplex(const Simplex& S, const std::vector<int>& alpha);

/// Exact integral of piece(x)^p over a simplex, p >= 0.
Rat integrate_affine_power_over_simplex(const Simplex& S, const AffinePiece& piece, int p);

/// All points of kP intersected with Z^n, in lexicographic order.
IMat lattice_points(const LatticePolytope& P, long long k);

/**
 * Parametrization of facet fi by its chart: base is the (n-1)-dimensional
 * projected polytope, lift maps chart coordinates back to ambient points,
 * and integrals against the lattice-normalized facet measure are
 * normalizer * (Lebesgue integral over base).  Requires dim >= 2.
 */
struct FacetChart {
  LatticePolytope base;
  std::vector<AffinePiece> lift;  // one affine map per ambient coordinate
  Rat normalizer;
};

FacetChart facet_chart(const LatticePolytope& P, int fi);

/// P intersected with extra half-spaces <a,x> <= b; nullopt when the result
/// is empty or not full-dimensional.
std::optional<LatticePolytope> clip(const LatticePolytope& P,
                                    const std::vector<std::pair<RVec, Rat>>& ineqs);

/// Ambient point of the 0-dimensional facet of an interval (dim 1 only).
RVec interval_facet_point(const LatticePolytope& P, int fi);

}  // namespace kstab

#endif
