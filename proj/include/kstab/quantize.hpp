#pragma once

#include <string>
#include <vector>

#include "kstab/plfun.hpp"

namespace kstab {

/// Toric test configuration: moment polytope plus PL convex function. The
/// stored f is the denominator-cleared scale D * original, so every weight
/// k * f(a/k) is an integer.
struct ToricTestConfig {
  LatticePolytope polytope;
  PLConvexFunction f;         // scaled by D
  PLConvexFunction original;  // as supplied by the caller
  long long D = 1;
  bool scaled = false;
};

ToricTestConfig make_toric_test_config(LatticePolytope P, PLConvexFunction f);

/// Rational basis of a subspace W of Q^n; models the chosen sub-torus
/// directions.
class SubtorusDirections {
 public:
  SubtorusDirections(int ambient_dim, std::vector<RVec> basis);
  static SubtorusDirections full(int ambient_dim);
  static SubtorusDirections none(int ambient_dim);

  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<RVec>& basis() const { return basis_; }

 private:
  int ambient_dim_;
  std::vector<RVec> basis_;
};

/// Raw and centered weights over the lattice points of kP.
struct WeightSpectrum {
  long long k = 0;
  IMat points;                // one lattice point of kP per row
  std::vector<Rat> raw;       // lambda'_a = k f(a/k)
  Rat trace = 0;              // sum of raw weights
  std::vector<Rat> centered;  // lambda_a = lambda'_a - trace/N_k

  long long count() const { return static_cast<long long>(raw.size()); }
};

WeightSpectrum weight_spectrum(const ToricTestConfig& tc, long long k);

/// Exact quasi-polynomial data on the arithmetic progression k in qZ:
/// N(k) = |kP cap Z^n| (degree n) and w(k) = sum of raw weights (degree
/// n+1), with the expansion w(k)/(k N(k)) = F0 + F1/k + O(1/k^2).
struct EhrhartFit {
  long long q = 1;
  RVec n_coeffs;  // index = power of k
  RVec w_coeffs;
  Rat f0 = 0;
  Rat f1 = 0;
};

EhrhartFit ehrhart_fit(const ToricTestConfig& tc);

/// Smallest q such that every vertex of the polytope and of the linearity
/// subdivision becomes integral on kP for k in qZ; the Ehrhart data is
/// polynomial along this progression.
long long spectral_period(const ToricTestConfig& tc);

/// Orthogonal projection of the centered spectrum onto the span of the
/// centered generators G_i(a) = <w_i, a> - mean_i, in the trace (Killing)
/// inner product of diagonal matrices.
struct QuantizedProjection {
  RVec coefficients;           // one per W basis vector
  std::vector<Rat> projected;  // sum_i c_i G_i(a) per point
  std::vector<Rat> residual;   // centered - projected
};

QuantizedProjection quantized_projection(const WeightSpectrum& spec, const SubtorusDirections& W);

enum class MomentMode { Signed, Absolute };

/// (1/(k^p N_k)) sum_a values(a)^p, signed or absolute.
Rat trace_moment(const std::vector<Rat>& values, long long k, int p, MomentMode mode);

/// Projection coefficients along k_list, divided by D so the sequence
/// converges to the continuous L^2(P) coefficients of the original f.
std::vector<RVec> limit_projection_coefficients(const ToricTestConfig& tc,
                                                const SubtorusDirections& W,
                                                const std::vector<long long>& k_list);

/// Lattice-point cap; reads KSTAB_POINT_BUDGET once, default 1000000.
long long point_budget();

}  // namespace kstab
