#include <doctest.h>

#include "kstab/errors.hpp"
#include "kstab/quantize.hpp"
#include "oracles.hpp"

using namespace kstab;

namespace {

LatticePolytope seg01() { return LatticePolytope::from_vertices(1, {make_rvec({0}), make_rvec({1})}); }

LatticePolytope square01() {
  return LatticePolytope::from_vertices(
      2, {make_rvec({0, 0}), make_rvec({1, 0}), make_rvec({0, 1}), make_rvec({1, 1})});
}

ToricTestConfig linear_tc() {
  return make_toric_test_config(seg01(), PLConvexFunction(AffinePiece{make_rvec({1}), Rat(0)}));
}

ToricTestConfig kink_tc() {
  return make_toric_test_config(
      seg01(), PLConvexFunction({{make_rvec({0}), Rat(0)}, {make_rvec({2}), Rat(-1)}}));
}

ToricTestConfig asym_kink_tc() {
  return make_toric_test_config(
      seg01(), PLConvexFunction({{make_rvec({0}), Rat(0)}, {make_rvec({3}), Rat(-1)}}));
}

}  // namespace

TEST_SUITE("quantize") {

TEST_CASE("config construction clears denominators") {
  PLConvexFunction f({{make_rvec({0}), Rat(0)}, {make_rvec({Rat(1, 2)}), Rat(-1, 3)}});
  ToricTestConfig tc = make_toric_test_config(seg01(), f);
  CHECK(tc.D == 6);
  CHECK(tc.scaled);
  CHECK(tc.f.pieces()[1].slope(0) == 3);
  CHECK(tc.original.pieces()[1].slope(0) == Rat(1, 2));
  CHECK_THROWS_AS(
      make_toric_test_config(square01(), PLConvexFunction(AffinePiece{make_rvec({1}), Rat(0)})),
      ValidationError);
}

TEST_CASE("subtorus validation") {
  CHECK(SubtorusDirections::full(2).dim() == 2);
  CHECK(SubtorusDirections::none(3).dim() == 0);
  CHECK_THROWS_AS(SubtorusDirections(2, {make_rvec({1, 0}), make_rvec({2, 0})}), ValidationError);
  CHECK_THROWS_AS(SubtorusDirections(1, {make_rvec({1, 0})}), ValidationError);
  SubtorusDirections W(2, {make_rvec({1, -1})});
  CHECK(W.dim() == 1);
}

TEST_CASE("spectrum of the linear function") {
  WeightSpectrum spec = weight_spectrum(linear_tc(), 3);
  REQUIRE(spec.count() == 4);
  CHECK(spec.raw[0] == 0);
  CHECK(spec.raw[3] == 3);
  CHECK(spec.trace == 6);
  CHECK(spec.centered[0] == Rat(-3, 2));
  CHECK(spec.centered[1] == Rat(-1, 2));
  CHECK(spec.centered[2] == Rat(1, 2));
  CHECK(spec.centered[3] == Rat(3, 2));
  Rat total = 0;
  for (const Rat& c : spec.centered) total += c;
  CHECK(total == 0);
}

TEST_CASE("spectrum of the kink") {
  WeightSpectrum spec = weight_spectrum(kink_tc(), 4);
  REQUIRE(spec.count() == 5);
  // Raw weights are max(0, 2a - 4) over a = 0..4.
  CHECK(spec.raw == std::vector<Rat>{0, 0, 0, 2, 4});
  CHECK(spec.trace == 6);
}

TEST_CASE("zero function gives zero weights") {
  ToricTestConfig tc =
      make_toric_test_config(square01(), PLConvexFunction(AffinePiece{make_rvec({0, 0}), Rat(0)}));
  WeightSpectrum spec = weight_spectrum(tc, 5);
  CHECK(spec.count() == 36);
  CHECK(spec.trace == 0);
  for (const Rat& r : spec.raw) CHECK(r == 0);
}

TEST_CASE("unscaled configurations are rejected") {
  ToricTestConfig tc = linear_tc();
  tc.scaled = false;
  CHECK_THROWS_AS(weight_spectrum(tc, 2), UnscaledConfig);
  CHECK_THROWS_AS(ehrhart_fit(tc), UnscaledConfig);

  ToricTestConfig frac = linear_tc();
  frac.f = PLConvexFunction(AffinePiece{make_rvec({Rat(1, 2)}), Rat(0)});
  CHECK_THROWS_AS(weight_spectrum(frac, 2), UnscaledConfig);
}

TEST_CASE("scaling equivariance of weights") {
  ToricTestConfig tc = kink_tc();
  ToricTestConfig tc3 = make_toric_test_config(seg01(), scale(tc.original, Rat(3)));
  WeightSpectrum a = weight_spectrum(tc, 6), b = weight_spectrum(tc3, 6);
  REQUIRE(a.count() == b.count());
  for (long long i = 0; i < a.count(); ++i) CHECK(b.raw[i] == 3 * a.raw[i]);
}

TEST_CASE("point budget guard") {
  CHECK(point_budget() == 1000000);
  CHECK_THROWS_AS(weight_spectrum(linear_tc(), 50000000), PointBudgetExceeded);
}

TEST_CASE("ehrhart fit for the linear function") {
  EhrhartFit fit = ehrhart_fit(linear_tc());
  CHECK(fit.q == 1);
  // N(k) = 1 + k, w(k) = k/2 + k^2/2.
  CHECK(fit.n_coeffs(0) == 1);
  CHECK(fit.n_coeffs(1) == 1);
  CHECK(fit.w_coeffs(0) == 0);
  CHECK(fit.w_coeffs(1) == Rat(1, 2));
  CHECK(fit.w_coeffs(2) == Rat(1, 2));
  CHECK(fit.f0 == Rat(1, 2));
  CHECK(fit.f1 == 0);
}

TEST_CASE("ehrhart fit for the kink") {
  EhrhartFit fit = ehrhart_fit(kink_tc());
  CHECK(fit.q == 2);
  // On even k: w(k) = (k/2)(k/2 + 1) = k^2/4 + k/2.
  CHECK(fit.w_coeffs(2) == Rat(1, 4));
  CHECK(fit.w_coeffs(1) == Rat(1, 2));
  CHECK(fit.f0 == Rat(1, 4));
  CHECK(fit.f1 == Rat(1, 4));
}

TEST_CASE("ehrhart fit with nontrivial denominator scale") {
  PLConvexFunction f({{make_rvec({0}), Rat(0)}, {make_rvec({Rat(1, 2)}), Rat(-1, 3)}});
  ToricTestConfig tc = make_toric_test_config(seg01(), f);
  EhrhartFit fit = ehrhart_fit(tc);
  CHECK(fit.q == 3);  // kink of the scaled function at x = 2/3
  CHECK(fit.f0 == Rat(1, 6));
  CHECK(fit.f1 == Rat(1, 3));
}

TEST_CASE("ehrhart fit on the square") {
  ToricTestConfig tc = make_toric_test_config(
      square01(), PLConvexFunction({{make_rvec({1, 0}), Rat(0)}, {make_rvec({0, 1}), Rat(0)}}));
  EhrhartFit fit = ehrhart_fit(tc);
  CHECK(fit.q == 1);
  CHECK(fit.n_coeffs(2) == 1);
  CHECK(fit.n_coeffs(1) == 2);
  // w(k) = sum of max(a,b) = (2/3)k^3 + (3/2)k^2 + (5/6)k.
  CHECK(fit.w_coeffs(3) == Rat(2, 3));
  CHECK(fit.w_coeffs(2) == Rat(3, 2));
  CHECK(fit.w_coeffs(1) == Rat(5, 6));
  CHECK(fit.f0 == Rat(2, 3));
  CHECK(fit.f1 == Rat(1, 6));
}

TEST_CASE("ehrhart fit on a rational polytope") {
  LatticePolytope P =
      LatticePolytope::from_vertices(1, {make_rvec({Rat(1, 2)}), make_rvec({Rat(3, 2)})});
  PLConvexFunction f({{make_rvec({0}), Rat(0)}, {make_rvec({1}), Rat(-1)}});
  ToricTestConfig tc = make_toric_test_config(P, f);
  EhrhartFit fit = ehrhart_fit(tc);
  CHECK(fit.q == 2);
  CHECK(fit.f0 == Rat(1, 8));
  CHECK(fit.f1 == Rat(1, 8));
}

TEST_CASE("fit errors carry the operation name") {
  FitMismatch err("synthetic");
  CHECK(err.operation() == "ehrhart_fit");
}

TEST_CASE("quantized projection reproduces a linear spectrum") {
  WeightSpectrum spec = weight_spectrum(linear_tc(), 7);
  QuantizedProjection qp = quantized_projection(spec, SubtorusDirections::full(1));
  CHECK(qp.coefficients(0) == 1);
  for (const Rat& r : qp.residual) CHECK(r == 0);
}

TEST_CASE("quantized projection of the kink") {
  WeightSpectrum spec = weight_spectrum(kink_tc(), 4);
  QuantizedProjection qp = quantized_projection(spec, SubtorusDirections::full(1));
  // Exact 5-point Gram data: sum G^2 = 10, sum lambda G = 10.
  CHECK(qp.coefficients(0) == 1);
  bool nonzero = false;
  for (const Rat& r : qp.residual)
    if (r != 0) nonzero = true;
  CHECK(nonzero);
  // Killing orthogonality: residual is orthogonal to the generator.
  Rat dot = 0;
  for (long long a = 0; a < spec.count(); ++a)
    dot += qp.residual[a] * (Rat(spec.points(a, 0)) - Rat(2));
  CHECK(dot == 0);
  // Pythagoras at level k.
  CHECK(trace_moment(spec.centered, 4, 2, MomentMode::Signed) ==
        trace_moment(qp.projected, 4, 2, MomentMode::Signed) +
            trace_moment(qp.residual, 4, 2, MomentMode::Signed));
}

TEST_CASE("empty torus projects to zero") {
  WeightSpectrum spec = weight_spectrum(kink_tc(), 4);
  QuantizedProjection qp = quantized_projection(spec, SubtorusDirections::none(1));
  CHECK(qp.coefficients.size() == 0);
  for (long long a = 0; a < spec.count(); ++a) {
    CHECK(qp.projected[a] == 0);
    CHECK(qp.residual[a] == spec.centered[a]);
  }
}

TEST_CASE("degenerate directions are detected") {
  LatticePolytope flat = LatticePolytope::from_vertices(
      2, {make_rvec({0, 0}), make_rvec({2, 0}), make_rvec({0, Rat(1, 2)}), make_rvec({2, Rat(1, 2)})});
  ToricTestConfig tc =
      make_toric_test_config(flat, PLConvexFunction(AffinePiece{make_rvec({1, 0}), Rat(0)}));
  WeightSpectrum spec = weight_spectrum(tc, 1);  // three collinear points, y = 0
  REQUIRE(spec.count() == 3);
  SubtorusDirections W(2, {make_rvec({0, 1})});
  CHECK_THROWS_AS(quantized_projection(spec, W), DegenerateGram);

  // Too few points for the requested torus.
  LatticePolytope tiny =
      LatticePolytope::from_vertices(1, {make_rvec({Rat(1, 3)}), make_rvec({Rat(2, 3)})});
  ToricTestConfig tc2 =
      make_toric_test_config(tiny, PLConvexFunction(AffinePiece{make_rvec({1}), Rat(0)}));
  WeightSpectrum one = weight_spectrum(tc2, 2);
  REQUIRE(one.count() == 1);
  CHECK_THROWS_AS(quantized_projection(one, SubtorusDirections::full(1)), ComputeError);
}

TEST_CASE("trace moments") {
  WeightSpectrum spec = weight_spectrum(linear_tc(), 3);
  CHECK(trace_moment(spec.centered, 3, 2, MomentMode::Signed) == Rat(5, 36));
  CHECK(trace_moment(spec.centered, 3, 1, MomentMode::Signed) == 0);
  std::vector<Rat> zeros(4, Rat(0));
  CHECK(trace_moment(zeros, 3, 2, MomentMode::Signed) == 0);
  WeightSpectrum kink4 = weight_spectrum(kink_tc(), 4);
  CHECK(trace_moment(kink4.centered, 4, 1, MomentMode::Absolute) == Rat(9, 25));
}

TEST_CASE("limit projection coefficients") {
  std::vector<RVec> seq =
      limit_projection_coefficients(kink_tc(), SubtorusDirections::full(1), {2, 4, 8, 16});
  for (const RVec& c : seq) CHECK(c(0) == 1);

  // Asymmetric kink: exact 5-point sequence values approach 20/9.
  std::vector<RVec> asym =
      limit_projection_coefficients(asym_kink_tc(), SubtorusDirections::full(1), {3, 6, 12, 24});
  CHECK(asym[0](0) == Rat(21, 10));
  CHECK(asym[1](0) == Rat(15, 7));
  CHECK(asym[2](0) == Rat(198, 91));
  CHECK(asym[3](0) == Rat(714, 325));
  for (std::size_t i = 1; i < asym.size(); ++i)
    CHECK(rat_abs(asym[i](0) - Rat(20, 9)) < rat_abs(asym[i - 1](0) - Rat(20, 9)));

  // Affine data is reproduced exactly, including the denominator scale.
  PLConvexFunction ell(AffinePiece{make_rvec({Rat(3, 2)}), Rat(-1, 2)});
  ToricTestConfig tc = make_toric_test_config(seg01(), ell);
  CHECK(tc.D == 2);
  std::vector<RVec> rep =
      limit_projection_coefficients(tc, SubtorusDirections::full(1), {2, 4, 8});
  for (const RVec& c : rep) CHECK(c(0) == Rat(3, 2));
}

TEST_CASE("ehrhart count matches enumeration everywhere sampled") {
  ToricTestConfig tc = kink_tc();
  EhrhartFit fit = ehrhart_fit(tc);
  for (long long s = 1; s <= 8; ++s) {
    long long k = fit.q * s;
    CHECK(poly_eval(fit.n_coeffs, Rat(k)) == lattice_points(tc.polytope, k).rows());
  }
}

}  // TEST_SUITE
