#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kstab/invariants.hpp"

namespace kstab {

enum class MomentKind { Projected, Raw };

/**
 * Convergence record for the trace moments m_k = Tr(B_k)^p / (k^p N_k D^p),
 * where B_k is the projected or centered weight matrix.  The division by D^p
 * undoes the denominator-clearing scale so that the moments approach the
 * continuous target of the original function.
 */
struct ConvergenceReport {
  int p = 2;
  std::vector<long long> k_list;
  std::vector<Rat> quantized_moments;
  Rat continuous_target = 0;
  std::vector<double> residuals;
  /// Least-squares slope of log residual against log k over the last half of
  /// the sequence; absent when the residuals vanish, the sequence is too
  /// short, or the prefix is oscillatory.
  std::optional<double> fitted_rate;
  /// Set when the residuals fail to decrease monotonically over the prefix
  /// k <= k_max / 2 (quasi-period artifacts off the q-progression).
  bool oscillatory = false;
  /// Richardson estimate from the last two moments assuming a 1/k leading
  /// correction; exact rational, reported but never asserted against.
  std::optional<Rat> extrapolated_limit;
};

ConvergenceReport moment_convergence(const ToricTestConfig& tc, const SubtorusDirections& W, int p,
                                     const std::vector<long long>& k_list, MomentKind mode);

/// Product test: the configuration is a product iff the reduced L^2 inner
/// value is exactly zero, in which case `direction` carries the rational
/// slope of the generating affine function.
struct ProductReport {
  bool is_product = false;
  Rat reduced_inner = 0;      // (1/V) int residual^2, exact
  RVec direction;             // slope of the projected affine part
  PLConvexFunction residual;  // f - fbar - projection
};

ProductReport product_detector(const ToricTestConfig& tc, const SubtorusDirections& W);

struct NormEquivalenceRow {
  double reduced = 0;
  double infimum = 0;
  std::optional<double> ratio;  // infimum / reduced, absent for product members
};

struct NormEquivalenceReport {
  double p = 1;
  std::vector<NormEquivalenceRow> rows;
  std::optional<double> empirical_delta;  // smallest observed ratio
};

NormEquivalenceReport norm_equivalence_probe(const std::vector<ToricTestConfig>& corpus,
                                             const SubtorusDirections& W, double p);

struct LabeledConfig {
  std::string id;
  ToricTestConfig tc;
};

struct ScanRecord {
  std::string id;
  Rat df_value = 0;
  Rat df_relative_value = 0;
  Rat norm1_inner = 0;          // reduced p=1 norm, exact
  std::optional<double> ratio;  // DF_T over the reduced norm when positive
  bool product = false;
};

struct ScanReport {
  std::vector<ScanRecord> records;
  std::optional<double> empirical_delta;   // min ratio over non-product records
  std::vector<std::string> unstable_ids;   // records with DF_T < 0
};

ScanReport stability_scan(const std::vector<LabeledConfig>& configs, const SubtorusDirections& W);

struct McResult {
  double estimate = 0;
  double stderr_ = 0;
};

/// Fixed-seed rejection-sampling estimate of int_P |g|^p, used as an
/// independent cross-check of the exact integrators.
McResult mc_cross_check(const PLExpr& g, const LatticePolytope& P, double p, long long samples,
                        unsigned long long seed = 20240601);

/// Geometric progression q, 2q, 4q, ... capped at 1024 and by the lattice
/// point budget (the enumeration box of kP must stay within budget).
std::vector<long long> default_k_list(const ToricTestConfig& tc);

}  // namespace kstab
