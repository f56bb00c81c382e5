#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fkhull/criterion.hpp"

using namespace fkhull;

namespace {

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

// Simpson integral of the unit mollifier over [-1, 1].
double profile_integral() {
  const int K = 200000;
  const double step = 2.0 / K;
  auto phi = [](double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; };
  double s = 0.0;
  for (int k = 0; k <= K; ++k) s += (k == 0 || k == K ? 1.0 : (k % 2 ? 4.0 : 2.0)) * phi(-1.0 + k * step);
  return s * step / 3.0;
}

}  // namespace

TEST(EstimateLemma, EqualHullsGiveZero) {
  std::mt19937_64 rng(30);
  const auto h = random_monotone_hull(128, rng);
  const auto res = check_estimate_lemma(h, h, golden);
  EXPECT_EQ(res.lhs, 0.0);
  EXPECT_EQ(res.rhs, 0.0);
  EXPECT_TRUE(res.holds);
}

TEST(EstimateLemma, ShiftedIdentity) {
  const auto id = HullFunction::identity(256);
  const auto res = check_estimate_lemma(id, id.shifted(0.1), golden);
  EXPECT_NEAR(res.lhs, 0.0, 1e-12);
  EXPECT_NEAR(res.rhs, 0.2, 1e-12);
  EXPECT_TRUE(res.holds);
}

TEST(EstimateLemma, RandomPairsHoldWithDeltaInRange) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> conc(std::log(1e-3), std::log(10.0));
  for (int t = 0; t < 200; ++t) {
    const auto a = random_monotone_hull(512, rng, 0.0, std::exp(conc(rng)));
    const auto b = random_monotone_hull(512, rng, 0.0, std::exp(conc(rng)));
    const auto res = check_estimate_lemma(a, b, golden);
    EXPECT_TRUE(res.holds) << res.lhs << " vs " << res.rhs;
    EXPECT_TRUE(res.delta_in_range) << res.delta_min << " " << res.delta_max;
  }
}

TEST(EstimateLemma, RejectsBadRotation) {
  const auto id = HullFunction::identity(8);
  EXPECT_THROW((void)check_estimate_lemma(id, id, 1.5), error);
}

TEST(Competitor, IdentityWithWideBump) {
  const auto v = make_bump_potential(10, 1.0);  // R = 0.1
  ASSERT_NEAR(v.R, 0.1, 1e-15);
  const std::size_t N = 1000;
  const auto [h2, spec] = construct_competitor(HullFunction::identity(N), v);
  EXPECT_NEAR(spec.A, 0.4, 1.0 / N);
  EXPECT_NEAR(spec.B, 0.6, 1.0 / N);
  EXPECT_NEAR(spec.plateau, 0.4, 1e-15);
  EXPECT_NEAR(h2(0.5), 0.4, 1e-15);
  EXPECT_NEAR(h2(0.6), 0.4, 1e-15);
  EXPECT_NEAR(h2(0.61), 0.61, 1e-12);
  EXPECT_NEAR(max_gap(h2), 0.2, 2.0 / N);
  EXPECT_GE(max_gap(h2), 2 * v.R - 2.0 / N);
}

TEST(Competitor, MinimumRuleOnPlateau) {
  const auto v = make_bump_potential(10, 1.0);
  const std::size_t N = 100;
  std::vector<double> vals(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double th = static_cast<double>(k) / N;
    vals[k] = (th >= 0.3 && th <= 0.45) ? 0.4 : (th < 0.3 ? th + 0.1 : th - 0.05);
  }
  const HullFunction h1(vals);
  const auto [h2, spec] = construct_competitor(h1, v, 100.0);
  EXPECT_NEAR(spec.A, 0.3, 1e-12);
}

TEST(Competitor, InvariantsAndZeroPotentialIntegral) {
  const auto v = make_bump_potential(16, 0.5);
  const std::size_t N = 4096;
  const auto h1 = HullFunction::identity(N);
  const auto [h2, spec] = construct_competitor(h1, v);
  EXPECT_NO_THROW(HullFunction(std::vector<double>(h2.values().begin(), h2.values().end())));
  for (std::size_t k = 0; k < N; ++k) EXPECT_EQ(v(h2[k]), 0.0);
  const auto rep = destruction_margin(h1, h2, v);
  EXPECT_NEAR(rep.rhs, 2 * v.R * v.R, 4 * v.R / N);
}

TEST(Competitor, ErrorsOnBadInput) {
  const auto v = make_bump_potential(16, 0.5);
  EXPECT_THROW((void)construct_competitor(HullFunction::step(64), v), error);
  EXPECT_THROW((void)construct_competitor(HullFunction::identity(64), make_zero_potential()), error);
  try {
    // No node k/64 lies within 4096^-2 of 0.3.
    (void)construct_competitor(HullFunction::identity(64), make_bump_potential(4096, 0.5, 0.3));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), errc::preimage_not_found);
  }
}

TEST(Competitor, AnalyticPlateauMatchesConstruction) {
  const auto v = make_bump_potential(10, 1.0);
  const auto id = SmoothHull::identity();
  const auto [h2, spec] = construct_competitor(id, v);
  EXPECT_NEAR(spec.A, 0.4, 1e-12);
  EXPECT_NEAR(spec.B, 0.6, 1e-12);
  EXPECT_NEAR(h2(0.5), 0.4, 1e-15);
  EXPECT_NEAR(h2(1.5), 1.4, 1e-15);
  EXPECT_NEAR(h2(0.7), 0.7, 1e-15);
}

TEST(DestructionMargin, EqualHullsDoNotDestroy) {
  const auto v = make_bump_potential(16, 0.5);
  const auto id = HullFunction::identity(512);
  const auto rep = destruction_margin(id, id, v);
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_FALSE(rep.destroys);
}

TEST(DestructionMargin, IdentityScalingAtHalf) {
  const double c_phi = profile_integral();
  const auto id = SmoothHull::identity();
  bool seen = false;
  for (int e = 4; e <= 12; ++e) {
    const long n = 1L << e;
    const auto v = make_bump_potential(n, 0.5);
    const auto [h2, spec] = construct_competitor(id, v);
    const auto rep = destruction_margin(id, h2, v);
    EXPECT_NEAR(rep.lhs * std::pow(n, 3.0) / c_phi, 1.0, 1e-8) << n;
    EXPECT_NEAR(rep.rhs / (2.0 * v.R * v.R), 1.0, 1e-8) << n;
    EXPECT_EQ(rep.destroys, rep.margin_factor2 > 0.0);
    if (seen) {
      EXPECT_TRUE(rep.destroys) << "destroys must persist for larger n";
    }
    seen = seen || rep.destroys;
  }
  EXPECT_TRUE(seen);
}

TEST(DestructionMargin, NoDestructionAtTwo) {
  const auto id = SmoothHull::identity();
  for (int e = 6; e <= 12; ++e) {
    const auto v = make_bump_potential(1L << e, 2.0);
    const auto [h2, spec] = construct_competitor(id, v);
    EXPECT_FALSE(destruction_margin(id, h2, v).destroys);
  }
}

TEST(DestructionMargin, GridAgreesWithAnalytic) {
  const auto v = make_bump_potential(16, 0.5);
  const std::size_t N = 4096;
  const auto [g2, gs] = construct_competitor(HullFunction::identity(N), v);
  const auto grid = destruction_margin(HullFunction::identity(N), g2, v);
  const auto id = SmoothHull::identity();
  const auto [a2, as] = construct_competitor(id, v);
  const auto exact = destruction_margin(id, a2, v);
  EXPECT_NEAR(grid.lhs, exact.lhs, 1e-3 * exact.lhs);
  EXPECT_NEAR(grid.rhs, exact.rhs, 4 * v.R / N);
}

TEST(ScalingExponents, KnownValues) {
  auto e = scaling_exponents(0.5);
  EXPECT_DOUBLE_EQ(e.potential_exp, 3.0);
  EXPECT_DOUBLE_EQ(e.distance_exp, 4.0);
  EXPECT_TRUE(e.destroys_asymptotically);
  e = scaling_exponents(1.0);
  EXPECT_DOUBLE_EQ(e.potential_exp, 2.0);
  EXPECT_DOUBLE_EQ(e.distance_exp, 2.0);
  EXPECT_FALSE(e.destroys_asymptotically);
  e = scaling_exponents(2.0);
  EXPECT_DOUBLE_EQ(e.potential_exp, 1.5);
  EXPECT_DOUBLE_EQ(e.distance_exp, 1.0);
  EXPECT_FALSE(e.destroys_asymptotically);
  EXPECT_THROW((void)scaling_exponents(0.0), error);
}

TEST(ScalingExponents, ThresholdAtOne) {
  for (int k = 1; k <= 100; ++k) {
    const double r = 3.0 * k / 100.0;
    EXPECT_EQ(scaling_exponents(r).destroys_asymptotically, r < 1.0) << r;
  }
}

TEST(Survey, IntegrableIdentityDoesNotDestroy) {
  const Model m = Model::uniform(2, make_zero_potential());
  const auto out = necessary_condition_survey(m, std::vector<SmoothHull>{SmoothHull::identity()}, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].report.lhs, 0.0);
  EXPECT_LE(out[0].report.margin, 0.0);
  EXPECT_FALSE(out[0].report.destroys);
}

TEST(Survey, DestructionRegimeDestroysEveryMember) {
  const Model m = Model::uniform(2, make_bump_potential(4096, 0.5));
  const auto family = smooth_hull_family(6, 7);
  ASSERT_EQ(family.size(), 6u);
  for (std::size_t j = 0; j < 2; ++j)
    for (const auto& e : necessary_condition_survey(m, family, j)) EXPECT_TRUE(e.report.destroys);
}

TEST(Survey, FarMembersAreFlagged) {
  const Model m = Model::uniform(2, make_bump_potential(64, 0.5));
  SurveyOptions opt;
  opt.epsilon = 0.01;
  const auto out = necessary_condition_survey(m, std::vector<SmoothHull>{SmoothHull::identity(), SmoothHull({0.9})}, 0, opt);
  EXPECT_FALSE(out[0].outside_regime);
  EXPECT_TRUE(out[1].outside_regime);
  EXPECT_NEAR(out[1].sup_deviation, 0.9 / (2 * std::numbers::pi), 0.01);
}

TEST(Survey, GridFamily) {
  const Model m = Model::uniform(1, make_bump_potential(16, 0.5));
  const auto out = necessary_condition_survey(m, std::vector<HullFunction>{HullFunction::identity(4096)}, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].report.destroys);
}

TEST(Family, DeterministicAndMonotone) {
  const auto a = smooth_hull_family(6, 3), b = smooth_hull_family(6, 3);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k](0.3), b[k](0.3));
    double mass = 0.0;
    for (double c : a[k].coefficients()) mass += std::abs(c);
    EXPECT_LT(mass, 1.0);
  }
}

TEST(CriterionCsv, Columns) {
  std::ostringstream os;
  write_criterion_csv_header(os);
  CriterionReport rep;
  rep.j = 1;
  rep.n = 16;
  write_criterion_csv_row(os, rep);
  EXPECT_EQ(os.str().substr(0, 49), "j,n,r,lhs,rhs,margin,margin_factor2,destroys\n2,16");
}
