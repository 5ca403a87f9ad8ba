#include <doctest.h>

#include <cmath>

#include "kstab/errors.hpp"
#include "kstab/lab.hpp"
#include "oracles.hpp"

using namespace kstab;

namespace {

LatticePolytope seg01() { return LatticePolytope::from_vertices(1, {make_rvec({0}), make_rvec({1})}); }

LatticePolytope square01() {
  return LatticePolytope::from_vertices(
      2, {make_rvec({0, 0}), make_rvec({1, 0}), make_rvec({0, 1}), make_rvec({1, 1})});
}

LatticePolytope hexagon() {
  return LatticePolytope::from_vertices(
      2, {make_rvec({1, 0}), make_rvec({0, 1}), make_rvec({-1, 0}), make_rvec({0, -1}),
          make_rvec({1, 1}), make_rvec({-1, -1})});
}

LatticePolytope cube() {
  std::vector<RVec> vs;
  for (int i = 0; i < 8; ++i)
    vs.push_back(make_rvec({Rat(i & 1), Rat((i >> 1) & 1), Rat((i >> 2) & 1)}));
  return LatticePolytope::from_vertices(3, vs);
}

LatticePolytope trapezoid() {
  return LatticePolytope::from_vertices(
      2, {make_rvec({0, 0}), make_rvec({2, 0}), make_rvec({0, 1}), make_rvec({1, 1})});
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

ToricTestConfig hexagon_tc() {
  return make_toric_test_config(
      hexagon(), PLConvexFunction({{make_rvec({0, 0}), Rat(0)},
                                   {make_rvec({1, 0}), Rat(0)},
                                   {make_rvec({0, 1}), Rat(0)}}));
}

}  // namespace

TEST_SUITE("lab") {

TEST_CASE("moments of the linear function have an exact closed form") {
  ConvergenceReport rep = moment_convergence(linear_tc(), SubtorusDirections::full(1), 2,
                                             {1, 2, 4, 8, 16}, MomentKind::Projected);
  REQUIRE(rep.quantized_moments.size() == 5);
  for (std::size_t i = 0; i < rep.k_list.size(); ++i) {
    long long k = rep.k_list[i];
    CHECK(rep.quantized_moments[i] == Rat(k + 2, 12 * k));
    CHECK(rep.residuals[i] == doctest::Approx(1.0 / (6.0 * static_cast<double>(k))).epsilon(1e-13));
  }
  CHECK(rep.continuous_target == Rat(1, 12));
  CHECK(!rep.oscillatory);
  REQUIRE(rep.fitted_rate.has_value());
  CHECK(*rep.fitted_rate == doctest::Approx(-1.0).epsilon(1e-9));
  REQUIRE(rep.extrapolated_limit.has_value());
  CHECK(*rep.extrapolated_limit == Rat(1, 12));
}

TEST_CASE("a product configuration gives identical raw and projected moments") {
  ConvergenceReport proj = moment_convergence(linear_tc(), SubtorusDirections::full(1), 2,
                                              {1, 2, 4, 8}, MomentKind::Projected);
  ConvergenceReport raw = moment_convergence(linear_tc(), SubtorusDirections::full(1), 2,
                                             {1, 2, 4, 8}, MomentKind::Raw);
  CHECK(proj.continuous_target == raw.continuous_target);
  for (std::size_t i = 0; i < proj.quantized_moments.size(); ++i)
    CHECK(proj.quantized_moments[i] == raw.quantized_moments[i]);
}

TEST_CASE("the zero function is stationary at every level") {
  ToricTestConfig tc =
      make_toric_test_config(seg01(), PLConvexFunction(AffinePiece{make_rvec({0}), Rat(0)}));
  ConvergenceReport rep = moment_convergence(tc, SubtorusDirections::full(1), 2, {1, 2, 4, 8},
                                             MomentKind::Projected);
  CHECK(rep.continuous_target == 0);
  for (const Rat& m : rep.quantized_moments) CHECK(m == 0);
  for (double r : rep.residuals) CHECK(r == 0);
  CHECK(!rep.fitted_rate.has_value());
  CHECK(!rep.oscillatory);
  CHECK(*rep.extrapolated_limit == 0);
}

TEST_CASE("projected kink moments reproduce the linear spectrum exactly") {
  // The quantized projection coefficient is exactly 1 at every level, so the
  // projected spectrum coincides with the linear one.
  ConvergenceReport rep = moment_convergence(kink_tc(), SubtorusDirections::full(1), 2,
                                             {1, 2, 4, 8, 16, 32, 64}, MomentKind::Projected);
  CHECK(rep.continuous_target == Rat(1, 12));
  for (std::size_t i = 0; i < rep.k_list.size(); ++i)
    CHECK(rep.quantized_moments[i] == Rat(rep.k_list[i] + 2, 12 * rep.k_list[i]));
  CHECK(*rep.extrapolated_limit == Rat(1, 12));
  CHECK(*rep.fitted_rate == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("raw kink moments converge at first order") {
  ConvergenceReport rep = moment_convergence(kink_tc(), SubtorusDirections::full(1), 2,
                                             {2, 4, 8, 16, 32, 64}, MomentKind::Raw);
  CHECK(rep.continuous_target == Rat(5, 48));
  CHECK(rep.quantized_moments[0] == Rat(2, 9));
  CHECK(rep.quantized_moments[1] == Rat(4, 25));
  for (std::size_t i = 1; i < rep.residuals.size(); ++i)
    CHECK(rep.residuals[i] < rep.residuals[i - 1]);
  CHECK(!rep.oscillatory);
  REQUIRE(rep.fitted_rate.has_value());
  CHECK(*rep.fitted_rate == doctest::Approx(-1.0).epsilon(0.2));
  for (const Rat& m : rep.quantized_moments) CHECK(m >= 0);
}

TEST_CASE("pythagoras between the raw and projected targets") {
  ConvergenceReport proj = moment_convergence(kink_tc(), SubtorusDirections::full(1), 2, {2, 4},
                                              MomentKind::Projected);
  ConvergenceReport raw =
      moment_convergence(kink_tc(), SubtorusDirections::full(1), 2, {2, 4}, MomentKind::Raw);
  ProjectionResult pr =
      continuous_projection(kink_tc().original, seg01(), SubtorusDirections::full(1));
  CHECK(raw.continuous_target - proj.continuous_target == pr.residual_mean_square);
}

TEST_CASE("asymmetric kink converges to the projected target") {
  ConvergenceReport rep = moment_convergence(asym_kink_tc(), SubtorusDirections::full(1), 2,
                                             {3, 6, 12, 24, 48}, MomentKind::Projected);
  CHECK(rep.continuous_target == Rat(100, 243));
  CHECK(rep.quantized_moments[0] == Rat(49, 80));
  for (std::size_t i = 1; i < rep.residuals.size(); ++i)
    CHECK(rep.residuals[i] < rep.residuals[i - 1]);
  REQUIRE(rep.fitted_rate.has_value());
  CHECK(*rep.fitted_rate == doctest::Approx(-1.0).epsilon(0.35));
  double extrap_err = std::abs(rat_to_double(*rep.extrapolated_limit - rep.continuous_target));
  CHECK(extrap_err < rep.residuals.back());
}

TEST_CASE("denominator scaling cancels in the moments") {
  PLConvexFunction f({{make_rvec({0}), Rat(0)}, {make_rvec({Rat(1, 2)}), Rat(-1, 3)}});
  ToricTestConfig tc = make_toric_test_config(seg01(), f);
  REQUIRE(tc.D == 6);
  ConvergenceReport rep =
      moment_convergence(tc, SubtorusDirections::full(1), 2, {3, 6, 12, 24}, MomentKind::Raw);
  CHECK(rep.continuous_target == Rat(1, 432));
  CHECK(rep.residuals.back() < rep.residuals.front());
}

TEST_CASE("off-progression levels trip the oscillation flag") {
  LatticePolytope P =
      LatticePolytope::from_vertices(1, {make_rvec({Rat(1, 2)}), make_rvec({Rat(3, 2)})});
  ToricTestConfig tc = make_toric_test_config(
      P, PLConvexFunction({{make_rvec({0}), Rat(0)}, {make_rvec({1}), Rat(-1)}}));
  ConvergenceReport rep = moment_convergence(tc, SubtorusDirections::full(1), 2,
                                             {2, 3, 4, 6, 8, 12, 16}, MomentKind::Raw);
  CHECK(rep.continuous_target == Rat(5, 192));
  CHECK(rep.quantized_moments[0] == Rat(1, 18));
  CHECK(rep.quantized_moments[1] == Rat(2, 81));
  CHECK(rep.quantized_moments[2] == Rat(1, 25));
  CHECK(rep.oscillatory);
  CHECK(!rep.fitted_rate.has_value());
}

TEST_CASE("convergence input validation") {
  CHECK_THROWS_AS(moment_convergence(kink_tc(), SubtorusDirections::full(1), 2, {},
                                     MomentKind::Raw),
                  ValidationError);
  CHECK_THROWS_AS(moment_convergence(kink_tc(), SubtorusDirections::full(1), 2, {4, 2},
                                     MomentKind::Raw),
                  ValidationError);
  CHECK_THROWS_AS(moment_convergence(kink_tc(), SubtorusDirections::full(1), 2, {0, 2},
                                     MomentKind::Raw),
                  ValidationError);
  CHECK_THROWS_AS(moment_convergence(kink_tc(), SubtorusDirections::full(1), 0, {2, 4},
                                     MomentKind::Raw),
                  ValidationError);
}

TEST_CASE("product detector accepts an affine configuration") {
  ToricTestConfig tc = make_toric_test_config(
      seg01(), PLConvexFunction(AffinePiece{make_rvec({3}), Rat(-2)}));
  ProductReport rep = product_detector(tc, SubtorusDirections::full(1));
  CHECK(rep.is_product);
  CHECK(rep.reduced_inner == 0);
  CHECK(rep.direction(0) == 3);
  CHECK(integrate_abs_power(rep.residual, seg01(), 1) == 0);
}

TEST_CASE("product detector rejects the kink with an exact witness") {
  ProductReport rep = product_detector(kink_tc(), SubtorusDirections::full(1));
  CHECK(!rep.is_product);
  CHECK(rep.reduced_inner == Rat(1, 48));
  NormReport red = reduced_norm(kink_tc(), SubtorusDirections::full(1), 2);
  CHECK(rep.reduced_inner == *red.exact_inner);
}

TEST_CASE("affine function outside the sub-torus is not a product") {
  ToricTestConfig tc = make_toric_test_config(
      square01(), PLConvexFunction(AffinePiece{make_rvec({0, 1}), Rat(0)}));
  ProductReport rep = product_detector(tc, SubtorusDirections(2, {make_rvec({1, 0})}));
  CHECK(!rep.is_product);
  CHECK(rep.reduced_inner == Rat(1, 12));
  CHECK(rep.direction(0) == 0);
  CHECK(rep.direction(1) == 0);
  // The residual is y - 1/2.
  CHECK(rep.residual(make_rvec({Rat(1, 4), Rat(3, 4)})) == Rat(1, 4));
}

TEST_CASE("norm equivalence probe at p = 2 touches the reduced norm") {
  NormEquivalenceReport rep =
      norm_equivalence_probe({kink_tc()}, SubtorusDirections::full(1), 2);
  REQUIRE(rep.rows.size() == 1);
  REQUIRE(rep.rows[0].ratio.has_value());
  CHECK(*rep.rows[0].ratio == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.rows[0].infimum <= rep.rows[0].reduced * (1 + 1e-9) + 1e-12);
  CHECK(*rep.empirical_delta == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("norm equivalence probe at p = 1 reports a positive delta") {
  NormEquivalenceReport rep =
      norm_equivalence_probe({kink_tc()}, SubtorusDirections::full(1), 1);
  REQUIRE(rep.rows[0].ratio.has_value());
  CHECK(*rep.rows[0].ratio > 0);
  CHECK(*rep.rows[0].ratio <= 1 + 1e-12);
}

TEST_CASE("norm equivalence probe skips product members") {
  NormEquivalenceReport rep =
      norm_equivalence_probe({linear_tc(), kink_tc()}, SubtorusDirections::full(1), 2);
  CHECK(!rep.rows[0].ratio.has_value());
  CHECK(rep.rows[1].ratio.has_value());
  REQUIRE(rep.empirical_delta.has_value());
  NormEquivalenceReport affine_only =
      norm_equivalence_probe({linear_tc()}, SubtorusDirections::full(1), 2);
  CHECK(!affine_only.empirical_delta.has_value());
  CHECK_THROWS_AS(norm_equivalence_probe({kink_tc()}, SubtorusDirections::full(1), 3),
                  ValidationError);
  CHECK_THROWS_AS(norm_equivalence_probe({kink_tc()}, SubtorusDirections::full(1), 0.5),
                  ValidationError);
}

TEST_CASE("stability scan over a small family") {
  std::vector<LabeledConfig> configs;
  configs.push_back({"kink", kink_tc()});
  configs.push_back({"prod", make_toric_test_config(
                                 seg01(), PLConvexFunction(AffinePiece{make_rvec({3}), Rat(-2)}))});
  ScanReport rep = stability_scan(configs, SubtorusDirections::full(1));
  REQUIRE(rep.records.size() == 2);
  const ScanRecord& kink = rep.records[0];
  CHECK(kink.df_value == Rat(1, 4));
  CHECK(kink.df_relative_value == Rat(1, 4));
  CHECK(kink.norm1_inner == Rat(1, 8));
  REQUIRE(kink.ratio.has_value());
  CHECK(*kink.ratio == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(!kink.product);
  const ScanRecord& prod = rep.records[1];
  CHECK(prod.df_value == 0);
  CHECK(prod.df_relative_value == 0);
  CHECK(prod.norm1_inner == 0);
  CHECK(!prod.ratio.has_value());
  CHECK(prod.product);
  REQUIRE(rep.empirical_delta.has_value());
  CHECK(*rep.empirical_delta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.unstable_ids.empty());
}

TEST_CASE("scan values are homogeneous in the function") {
  std::vector<LabeledConfig> configs;
  for (int m = 1; m <= 3; ++m)
    configs.push_back({"m" + std::to_string(m),
                       make_toric_test_config(seg01(), scale(kink_tc().original, Rat(m)))});
  ScanReport rep = stability_scan(configs, SubtorusDirections::full(1));
  for (int m = 1; m <= 3; ++m) {
    const ScanRecord& r = rep.records[m - 1];
    CHECK(r.df_value == Rat(m, 4));
    CHECK(r.df_relative_value == Rat(m, 4));
    CHECK(r.norm1_inner == Rat(m, 8));
    CHECK(*r.ratio == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("scan flags a destabilising configuration") {
  // The y-direction on the blown-up plane has negative Futaki value, so the
  // associated product configuration destabilises relative to the trivial
  // torus.
  std::vector<LabeledConfig> configs;
  configs.push_back({"blowy", make_toric_test_config(
                                  trapezoid(), PLConvexFunction(AffinePiece{make_rvec({0, 1}), Rat(0)}))});
  ScanReport none = stability_scan(configs, SubtorusDirections::none(2));
  REQUIRE(none.records.size() == 1);
  CHECK(none.records[0].df_value == Rat(-2, 27));
  CHECK(none.records[0].df_relative_value == Rat(-2, 27));
  CHECK(none.records[0].norm1_inner > 0);
  CHECK(*none.records[0].ratio < 0);
  REQUIRE(none.unstable_ids.size() == 1);
  CHECK(none.unstable_ids[0] == "blowy");
  // Relative to the full torus the same member is a plain product again.
  ScanReport full = stability_scan(configs, SubtorusDirections::full(2));
  CHECK(full.records[0].product);
  CHECK(full.records[0].df_relative_value == 0);
  CHECK(full.unstable_ids.empty());
}

TEST_CASE("monte carlo agrees with exact one dimensional integrals") {
  McResult linear = mc_cross_check(PLExpr(AffinePiece{make_rvec({1}), Rat(-1, 2)}), seg01(), 2,
                                   50000);
  CHECK(linear.stderr_ > 0);
  CHECK(std::abs(linear.estimate - 1.0 / 12) < 3 * linear.stderr_);
  PLExpr centered_kink(kink_tc().original, PLConvexFunction(AffinePiece{make_rvec({0}), Rat(1, 4)}));
  McResult kink = mc_cross_check(centered_kink, seg01(), 2, 50000);
  CHECK(std::abs(kink.estimate - 5.0 / 48) < 3 * kink.stderr_);
}

TEST_CASE("monte carlo on the hexagon uses rejection correctly") {
  ToricTestConfig tc = hexagon_tc();
  Rat fbar = mean(tc.original, tc.polytope);
  PLExpr g(tc.original, PLConvexFunction(AffinePiece{make_rvec({0, 0}), fbar}));
  Rat exact = integrate_abs_power(g, tc.polytope, 2);
  McResult mc = mc_cross_check(g, tc.polytope, 2, 200000);
  CHECK(std::abs(mc.estimate - rat_to_double(exact)) < 3 * mc.stderr_);
}

TEST_CASE("monte carlo of the zero function is exactly zero") {
  McResult mc = mc_cross_check(PLExpr(AffinePiece{make_rvec({0, 0}), Rat(0)}), square01(), 2,
                               10000);
  CHECK(mc.estimate == 0);
  CHECK(mc.stderr_ == 0);
}

TEST_CASE("monte carlo validation") {
  CHECK_THROWS_AS(mc_cross_check(PLExpr(AffinePiece{make_rvec({1}), Rat(0)}), seg01(), 2, 9999),
                  ValidationError);
  CHECK_THROWS_AS(mc_cross_check(PLExpr(AffinePiece{make_rvec({1}), Rat(0)}), square01(), 2,
                                 10000),
                  ValidationError);
}

TEST_CASE("default level lists follow the geometric budgeted progression") {
  // The kink's breakpoint at 1/2 forces the even progression.
  std::vector<long long> kink_ks = default_k_list(kink_tc());
  REQUIRE(kink_ks.size() == 10);
  CHECK(kink_ks.front() == 2);
  CHECK(kink_ks.back() == 1024);
  for (std::size_t i = 1; i < kink_ks.size(); ++i) CHECK(kink_ks[i] == 2 * kink_ks[i - 1]);

  PLConvexFunction f6({{make_rvec({0}), Rat(0)}, {make_rvec({Rat(1, 2)}), Rat(-1, 3)}});
  std::vector<long long> d6 = default_k_list(make_toric_test_config(seg01(), f6));
  CHECK(d6.front() == 3);
  CHECK(d6.back() == 768);

  std::vector<long long> hex = default_k_list(hexagon_tc());
  CHECK(hex.front() == 1);
  CHECK(hex.back() == 256);  // the 1025 x 1025 box at k = 512 busts the budget

  ToricTestConfig cube_tc = make_toric_test_config(
      cube(), PLConvexFunction({{make_rvec({0, 0, 0}), Rat(0)}, {make_rvec({1, 1, 1}), Rat(-1)}}));
  std::vector<long long> cube_ks = default_k_list(cube_tc);
  CHECK(cube_ks.front() == 1);
  CHECK(cube_ks.back() == 64);  // 100^3 boxes exceed the budget
}

}  // TEST_SUITE
