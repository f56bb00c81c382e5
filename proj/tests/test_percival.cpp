#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fkhull/percival.hpp"

using namespace fkhull;

namespace {

const RotationVector omega2 = default_rotation(2);

// Midpoint quadrature of the averaged action with the left-continuous
// evaluation of h, on M sub-cells per grid cell.
double fine_percival(const HullFunction& h, const RotationVector& w, const Model& m, int sub) {
  const std::size_t M = h.size() * static_cast<std::size_t>(sub);
  double total = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(M);
    for (std::size_t j = 0; j < m.d; ++j) {
      const double d = h(t + w[j]) - h(t);
      total += 0.5 * d * d + m.potential(j)(h(t));
    }
  }
  return total / static_cast<double>(M);
}

// Composite Simpson rule over the support of the bump.
double bump_integral(const Potential& v) {
  const int K = 20000;
  const double a = v.x0 - v.R, b = v.x0 + v.R, step = (b - a) / K;
  double s = v(a) + v(b);
  for (int k = 1; k < K; ++k) s += (k % 2 ? 4.0 : 2.0) * v(a + k * step);
  return s * step / 3.0;
}

}  // namespace

TEST(PercivalValue, IdentityIntegrable) {
  const Model m = Model::uniform(2, make_zero_potential());
  const double expected = 0.5 * (omega2[0] * omega2[0] + omega2[1] * omega2[1]);
  EXPECT_NEAR(percival_value(HullFunction::identity(1024), omega2, m), expected, 5e-7);
  EXPECT_NEAR(expected, 0.2767694, 1e-7);
}

TEST(PercivalValue, StepHullMatchesFineQuadrature) {
  const Model m = Model::uniform(1, make_zero_potential());
  const RotationVector w({0.4});
  const auto h = HullFunction::step(100);
  EXPECT_NEAR(percival_value(h, w, m), 0.2, 1e-12);
  EXPECT_NEAR(fine_percival(h, w, m, 64), 0.2, 1e-3);
}

TEST(PercivalValue, IdentityWithBump) {
  const auto v = make_bump_potential(16, 0.5);
  const Model m = Model::uniform(1, v);
  const RotationVector w({(std::sqrt(5.0) - 1.0) / 2.0});
  const double expected = 0.5 * w[0] * w[0] + bump_integral(v);
  EXPECT_NEAR(percival_value(HullFunction::identity(4096), w, m), expected, 1e-7);
}

TEST(PercivalValue, AgreesWithFineQuadratureOnRandomHulls) {
  std::mt19937_64 rng(11);
  const Model m = Model::uniform(2, make_bump_potential(4, 0.5));
  for (int t = 0; t < 5; ++t) {
    const auto h = random_monotone_hull(64, rng);
    EXPECT_NEAR(percival_value(h, omega2, m), fine_percival(h, omega2, m, 400), 2e-4);
  }
}

TEST(PercivalValue, GaugeInvariance) {
  std::mt19937_64 rng(12);
  const Model m = Model::uniform(2, make_bump_potential(4, 0.5));
  const std::size_t N = 256;
  const auto h = random_monotone_hull(N, rng);
  const double base = percival_value(h, omega2, m);
  EXPECT_DOUBLE_EQ(percival_value(h.shifted(1.0), omega2, m), base);
  EXPECT_DOUBLE_EQ(percival_value(h.shifted(-3.0), omega2, m), base);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double shift = s(rng);
    std::vector<double> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = h(static_cast<double>(k) / N + shift);
    EXPECT_NEAR(percival_value(HullFunction(v), omega2, m), base, 1.0 / N);
  }
}

TEST(PercivalValue, DimensionMismatch) {
  EXPECT_THROW((void)percival_value(HullFunction::identity(8), default_rotation(3),
                                    Model::uniform(2, make_zero_potential())),
               error);
}

TEST(PercivalGradient, IdentityIntegrableIsZero) {
  const auto g = percival_gradient(HullFunction::identity(512), omega2, Model::uniform(2, make_zero_potential()));
  for (double x : g) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(PercivalGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(13);
  const Model m = Model::uniform(2, make_bump_potential(4, 0.5));
  const std::size_t N = 128;
  const double eps = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const auto h = random_monotone_hull(N, rng, 0.1 / N);
    const auto g = percival_gradient(h, omega2, m);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      std::vector<double> up(h.values().begin(), h.values().end()), dn = up;
      up[k] += eps;
      dn[k] -= eps;
      const double fd = (percival_value(HullFunction(up), omega2, m) - percival_value(HullFunction(dn), omega2, m)) / (2 * eps);
      num += (g[k] - fd) * (g[k] - fd);
      den += g[k] * g[k];
    }
    EXPECT_LT(std::sqrt(num / den), 1e-5);
  }
}

TEST(PercivalGradient, PotentialTermIsLinearInAmplitude) {
  std::mt19937_64 rng(14);
  const auto h = random_monotone_hull(128, rng);
  const auto v = make_bump_potential(4, 0.5);
  const auto g0 = percival_gradient(h, omega2, Model::uniform(2, make_zero_potential()));
  const auto g1 = percival_gradient(h, omega2, Model::uniform(2, v));
  const auto g3 = percival_gradient(h, omega2, Model::uniform(2, v.scaled(3.0)));
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(g3[k] - g0[k], 3.0 * (g1[k] - g0[k]), 1e-14);
}

TEST(ElResidual, IdentityIntegrableVanishes) {
  const auto h = HullFunction::identity(1000);
  const Model m = Model::uniform(2, make_zero_potential());
  for (double t : {0.0, 0.123, 0.5, 0.999}) EXPECT_NEAR(el_residual(h, omega2, m, t), 0.0, 1e-14);
}

TEST(ElResidual, IdentityWithPotentialIsDerivativeSum) {
  const auto v = make_bump_potential(4, 0.5);
  const Model m = Model::uniform(2, v);
  const auto h = HullFunction::identity(1000);
  for (double t : {0.3, 0.45, 0.5, 0.61}) EXPECT_NEAR(el_residual(h, omega2, m, t), 2.0 * v.derivative(t), 1e-12);
}

TEST(ElResidual, NodeResidualIsScaledGradient) {
  std::mt19937_64 rng(15);
  const Model m = Model::uniform(2, make_bump_potential(4, 0.5));
  const auto h = random_monotone_hull(64, rng);
  const auto g = percival_gradient(h, omega2, m);
  for (std::size_t k = 0; k < h.size(); ++k)
    EXPECT_NEAR(el_residual(h, omega2, m, static_cast<double>(k) / 64.0), 64.0 * g[k], 1e-12);
}

TEST(MinimizeParams, Validation) {
  MinimizeParams p;
  EXPECT_NO_THROW(p.validate());
  p.max_iters = 0;
  EXPECT_THROW(p.validate(), error);
  p = {};
  p.tol_grad = 0.0;
  EXPECT_THROW(p.validate(), error);
  p = {};
  p.restarts = -1;
  EXPECT_THROW(p.validate(), error);
}

TEST(Minimize, IntegrableRecoveryAndMonotoneTrace) {
  const Model m = Model::uniform(2, make_zero_potential());
  const double exact = 0.5 * (omega2[0] * omega2[0] + omega2[1] * omega2[1]);
  std::mt19937_64 rng(16);
  const auto init = random_monotone_hull(1024, rng);
  const auto res = minimize_percival(omega2, m, init, MinimizeParams{});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.objective, exact, 1e-6);
  EXPECT_LE(max_gap(res.minimizer), 4.0 / 1024);
  EXPECT_LE(res.objective, percival_value(init, omega2, m));
  for (std::size_t k = 1; k < res.trace.size(); ++k) EXPECT_LE(res.trace[k], res.trace[k - 1]);
  EXPECT_LT(res.el_residual_sup, 1e-5);
  EXPECT_GE(res.minimizer[0], 0.0);
  EXPECT_LT(res.minimizer[0], 1.0);
}

TEST(Minimize, KnownMinimizerIsFixedPoint) {
  const Model m = Model::uniform(2, make_zero_potential());
  std::mt19937_64 rng(17);
  const auto first = minimize_percival(omega2, m, random_monotone_hull(256, rng), MinimizeParams{});
  ASSERT_TRUE(first.converged);
  const auto again = minimize_percival(omega2, m, first.minimizer, MinimizeParams{});
  EXPECT_TRUE(again.converged);
  EXPECT_LE(again.iterations, 2);
  EXPECT_NEAR(again.objective, first.objective, 1e-12);
}

TEST(Minimize, DeterministicWithRestarts) {
  const Model m = Model::uniform(2, make_bump_potential(16, 0.5));
  MinimizeParams p;
  p.restarts = 2;
  p.seed = 5;
  const auto a = minimize_percival(omega2, m, HullFunction::identity(512), p);
  const auto b = minimize_percival(omega2, m, HullFunction::identity(512), p);
  EXPECT_EQ(a.minimizer, b.minimizer);
  EXPECT_EQ(a.iterations, b.iterations);
  for (std::size_t k = 1; k < a.trace.size(); ++k) EXPECT_LE(a.trace[k], a.trace[k - 1]);
}

TEST(Minimize, DestructionRegimeOpensGap) {
  const auto v = make_bump_potential(16, 0.5);
  const Model m = Model::uniform(2, v);
  const auto res = minimize_percival(omega2, m, HullFunction::identity(1024), MinimizeParams{});
  EXPECT_TRUE(res.converged);
  EXPECT_GT(max_gap(res.minimizer), v.R);
  EXPECT_LT(res.objective, percival_value(HullFunction::identity(1024), omega2, m));
  EXPECT_GT(res.residual_excluded, 0u);
}
