#pragma once

#include <optional>

#include "kstab/quantize.hpp"

namespace kstab {

/// L^2(P) orthogonal projection of f - fbar onto the mean-zero affine
/// Hamiltonians spanned by W.
struct ProjectionResult {
  RVec coefficients;      // over the W basis
  AffinePiece projected;  // mean-zero on P
  Rat residual_mean_square = 0;
};

ProjectionResult continuous_projection(const PLConvexFunction& f, const LatticePolytope& P,
                                       const SubtorusDirections& W);

enum class NormKind { Plain, Twisted, Reduced, Infimum };

struct NormReport {
  double p = 1;
  double value = 0;
  std::optional<Rat> exact_inner;  // (1/V) * integral, present for integer p
  NormKind kind = NormKind::Plain;
};

/// Donaldson-Futaki invariant: the subleading coefficient F1 of
/// w_k/(k N_k), divided by D to undo the base-change scaling.
Rat df(const ToricTestConfig& tc);

/// Independent route to F1 of the scaled configuration:
/// (1/(2V)) (int_dP f dsigma - a int_P f dmu) with a = Vol_sigma(dP)/V.
/// Equals df(tc) * D.
Rat df_boundary(const ToricTestConfig& tc);

/// DF of the product configuration attached to an affine function, via the
/// boundary formula.
Rat df_affine(const LatticePolytope& P, const AffinePiece& ell);

NormReport norm_p(const ToricTestConfig& tc, double p);
NormReport twisted_norm(const ToricTestConfig& tc, const AffinePiece& ell, double p);
NormReport reduced_norm(const ToricTestConfig& tc, const SubtorusDirections& W, double p);

struct InfimumResult {
  NormReport report;
  AffinePiece minimizer;  // mean-zero representative of the optimal ell
  RVec t;                 // coordinates of the minimizer over the W basis
  long long evaluations = 0;
};

/// Minimizes the twisted norm over ell with slope in span(W) by coordinate
/// descent with golden-section line searches, warm-started at the negated
/// continuous projection so the result never exceeds the reduced norm.
InfimumResult infimum_norm(const ToricTestConfig& tc, const SubtorusDirections& W, double p,
                           double tol = 1e-10);

/// DF relative to the sub-torus: df(tc) - df of the projected product
/// configuration.
Rat df_relative(const ToricTestConfig& tc, const SubtorusDirections& W);

}  // namespace kstab
