#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "kstab/geometry.hpp"

namespace kstab {

/// Convex piecewise-linear function stored as a max of affine pieces,
/// f(x) = max_j (<slope_j, x> + constant_j). Duplicate pieces are merged on
/// construction; pieces that are never active are tolerated and ignored by
/// the subdivision routines.
class PLConvexFunction {
 public:
  explicit PLConvexFunction(std::vector<AffinePiece> pieces);
  PLConvexFunction(const AffinePiece& piece);  // NOLINT: affine promotes to PL

  int dim() const { return static_cast<int>(pieces_[0].slope.size()); }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  Rat operator()(const RVec& x) const;

 private:
  std::vector<AffinePiece> pieces_;
};

/// Signed piecewise-linear expression pos - neg; covers f - fbar - ell forms
/// while keeping both halves structurally convex.
struct PLExpr {
  PLConvexFunction pos;
  PLConvexFunction neg;

  PLExpr(PLConvexFunction p);  // NOLINT: convex function promotes, neg = 0
  PLExpr(const AffinePiece& p);
  PLExpr(PLConvexFunction p, PLConvexFunction n);

  int dim() const { return pos.dim(); }
  Rat operator()(const RVec& x) const { return pos(x) - neg(x); }
};

PLExpr operator-(const PLConvexFunction& a, const PLConvexFunction& b);

AffinePiece affine_sum(const AffinePiece& a, const AffinePiece& b);
AffinePiece affine_diff(const AffinePiece& a, const AffinePiece& b);
AffinePiece affine_scale(const AffinePiece& a, const Rat& m);

/// f + ell for affine ell; convexity is preserved piecewise.
PLConvexFunction add_affine(const PLConvexFunction& f, const AffinePiece& ell);
/// m*f for m >= 0.
PLConvexFunction scale(const PLConvexFunction& f, const Rat& m);
/// g + c.
PLExpr shift(const PLExpr& g, const Rat& c);

/// Polyhedral subdivision of P with one attached affine function per cell.
struct Subdivision {
  struct Cell {
    LatticePolytope region;
    AffinePiece active;
  };
  std::vector<Cell> cells;
};

/// Least D >= 1 with integer D*slope and D*constant for every piece, paired
/// with the scaled function D*f. Guarantees k*(Df)(a/k) is an integer for
/// all k >= 1 and lattice a.
std::pair<PLConvexFunction, long long> clear_denominators(const PLConvexFunction& f);

/// Cells where a single piece attains the max; empty or lower-dimensional
/// cells are dropped. Cells are closed and overlap only along walls, where
/// all active pieces agree.
Subdivision linearity_regions(const PLConvexFunction& f, const LatticePolytope& P);

/// Common refinement on which the signed expression g is a single affine
/// function per cell.
Subdivision affine_cells(const PLExpr& g, const LatticePolytope& P);

/// True iff one piece attains the max on all of P; checked at vertices,
/// which suffices by convexity.
bool is_affine_on(const PLConvexFunction& f, const LatticePolytope& P);
/// The dominating piece when is_affine_on holds.
std::optional<AffinePiece> dominant_piece(const PLConvexFunction& f, const LatticePolytope& P);

/// Exact integral of g over P.
Rat integrate_pl(const PLExpr& g, const LatticePolytope& P);
/// Exact integral of g^p (signed) over P, integer p >= 0.
Rat integrate_signed_power(const PLExpr& g, const LatticePolytope& P, int p);
/// Exact integral of |g|^p over P, integer p >= 1.
Rat integrate_abs_power(const PLExpr& g, const LatticePolytope& P, int p);
/// Integral of |g|^p for real p >= 1. Exact in the slicing variable: the
/// sublevel-volume function is piecewise polynomial and is interpolated
/// exactly; only the final power integrals are floating point.
double integrate_abs_power_real(const PLExpr& g, const LatticePolytope& P, double p);

/// Mean of g with respect to Lebesgue measure on P.
Rat mean(const PLExpr& g, const LatticePolytope& P);

/// Exact integral of g over the boundary of P against the lattice-normalized
/// facet measure (covolume-1 normalization; counting measure on endpoints
/// for n = 1).
Rat boundary_integral(const LatticePolytope& P, const PLExpr& g);

}  // namespace kstab
