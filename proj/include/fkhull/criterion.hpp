#pragma once

// Variational destruction criterion. A discontinuous competitor h2 rules out
// a continuous minimiser h1 when
//   int v(h1) - int v(h2) > int |h1 - h2|,
// because the kinetic part of the Percival Lagrangian moves by at most the
// right-hand side (the estimate lemma, checked by check_estimate_lemma).

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <optional>
#include <type_traits>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "fkhull/error.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/model.hpp"
#include "fkhull/quadrature.hpp"

namespace fkhull {

/// Base hull with the constant `plateau` (lifted) on the switch interval (A, B].
/// B may exceed 1 when the switch interval straddles the period boundary.
template <hull_like Base>
class PlateauHull {
 public:
  PlateauHull(Base base, double A, double B, double plateau)
      : base_(std::move(base)), A_(A), B_(B), plateau_(plateau) {}

  double operator()(double theta) const {
    const double s = theta - A_;
    const double m = std::ceil(s) - 1.0;  // s - m in (0, 1]
    if (A_ + (s - m) <= B_) return plateau_ + m;
    return base_(theta);
  }

  std::vector<double> breakpoints() const {
    auto b = base_.breakpoints();
    b.push_back(A_ - std::floor(A_));
    b.push_back(B_ - std::floor(B_));
    return b;
  }

  const Base& base() const { return base_; }

 private:
  Base base_;
  double A_, B_, plateau_;
};

template <class Base>
inline constexpr bool is_step_hull_v<PlateauHull<Base>> = is_step_hull_v<Base>;

struct CompetitorSpec {
  double A = 0.0;        // left switch point in [0, 1)
  double B = 0.0;        // right switch point, A < B < A + 1
  double level = 0.5;    // the lifted bump centre x0 + m that h1 crosses
  double plateau = 0.0;  // level - R
};

struct EstimateLemmaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double delta_min = 0.0;  // range of h1(t+w)-h1(t)+h2(t+w)-h2(t) over probed phases
  double delta_max = 0.0;
  bool delta_in_range = false;
};

/// lhs = |int (h1(t+w)-h1(t))^2 - (h2(t+w)-h2(t))^2|, rhs = 2 int |h1 - h2|.
template <hull_like H1, hull_like H2>
EstimateLemmaResult check_estimate_lemma(const H1& h1, const H2& h2, double omega_j, double slack) {
  if (!(omega_j > 0.0 && omega_j < 1.0))
    throw error(errc::invalid_parameter, "rotation component must lie in (0, 1)");
  std::vector<double> breaks;
  add_hull_breakpoints(breaks, h1);
  add_hull_breakpoints(breaks, h1, omega_j);
  add_hull_breakpoints(breaks, h2);
  add_hull_breakpoints(breaks, h2, omega_j);

  auto increment_gap = [&](double t) {
    const double a = h1(t + omega_j) - h1(t);
    const double b = h2(t + omega_j) - h2(t);
    return a * a - b * b;
  };
  constexpr bool step = is_step_hull_v<H1> && is_step_hull_v<H2>;
  EstimateLemmaResult res;
  res.lhs = std::abs(integrate_period(increment_gap, breaks, step));
  res.rhs = 2.0 * integrate_period([&](double t) { return std::abs(h1(t) - h2(t)); }, breaks, step);
  res.holds = res.lhs <= res.rhs + slack;

  // Delta is probed at every breakpoint and at every piece midpoint.
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(1.0);
  res.delta_min = std::numeric_limits<double>::infinity();
  res.delta_max = -res.delta_min;
  auto probe = [&](double t) {
    const double delta = h1(t + omega_j) - h1(t) + h2(t + omega_j) - h2(t);
    res.delta_min = std::min(res.delta_min, delta);
    res.delta_max = std::max(res.delta_max, delta);
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    probe(breaks[i]);
    probe(0.5 * (breaks[i] + breaks[i + 1]));
  }
  res.delta_in_range = res.delta_min >= -1e-12 && res.delta_max <= 2.0 + 1e-12;
  return res;
}

/// Grid pairs use the quadrature slack 8/N.
inline EstimateLemmaResult check_estimate_lemma(const HullFunction& h1, const HullFunction& h2,
                                                double omega_j) {
  return check_estimate_lemma(h1, h2, omega_j, 8.0 / static_cast<double>(std::max(h1.size(), h2.size())));
}

namespace detail {

// Bump copy x0 + m that h crosses first inside [h(0), h(0) + 1): the smallest
// m with x0 + m - R >= h(0).
inline double crossing_level(double h0, const Potential& v) {
  return v.x0 + std::ceil(h0 - v.x0 + v.R);
}

inline void require_bump(const Potential& v) {
  if (!v.is_bump()) throw error(errc::invalid_parameter, "competitor construction needs a bump potential");
}

}  // namespace detail

/// Grid competitor: h2 = h1 except on the lifted node block [kA, kB], which is
/// flattened to level - R. kA is the first node with h1 >= level - R (the
/// minimum preimage) and kB the last node with h1 <= level + R (the maximum).
/// Flattening node kA itself keeps h2 monotone when h1(A) overshoots the level.
inline std::pair<HullFunction, CompetitorSpec> construct_competitor(
    const HullFunction& h1, const Potential& v, double kappa = default_gap_kappa) {
  detail::require_bump(v);
  if (!is_continuous_at_resolution(h1, kappa))
    throw error(errc::invalid_parameter, "competitor base h1 must be continuous at resolution (max_gap <= kappa/N)");
  const auto N = static_cast<long long>(h1.size());
  const double level = detail::crossing_level(h1[0], v);
  const double lo = level - v.R;
  const double hi = level + v.R;

  long long kA = 0;
  while (kA <= N && h1.at(kA) < lo) ++kA;
  long long kB = kA - 1;
  while (kB + 1 < kA + N && h1.at(kB + 1) <= hi) ++kB;
  if (kA > N || kB < kA)
    throw error(errc::preimage_not_found,
                "no grid node of h1 lies in [x0 - R, x0 + R]; resolution too coarse (N*R = " +
                    std::to_string(static_cast<double>(N) * v.R) + ")");
  if (kA == N) {
    kA -= N;
    kB -= N;
  }

  std::vector<double> values(h1.values().begin(), h1.values().end());
  for (long long k = kA; k <= kB; ++k) {
    const long long idx = ((k % N) + N) % N;
    const double lift = static_cast<double>((k - idx) / N);
    values[static_cast<std::size_t>(idx)] = lo - lift;
  }
  CompetitorSpec spec{static_cast<double>(kA) / static_cast<double>(N),
                      static_cast<double>(kB) / static_cast<double>(N), level, lo};
  return {HullFunction(std::move(values)), spec};
}

/// Continuous-phase competitor for any continuous hull: A and B are the
/// minimum preimage of level - R and the maximum preimage of level + R.
template <hull_like H>
std::pair<PlateauHull<H>, CompetitorSpec> construct_competitor(const H& h1, const Potential& v) {
  detail::require_bump(v);
  const double level = detail::crossing_level(h1(0.0), v);
  const double A = lower_preimage(h1, level - v.R, 0.0, 1.0);
  const double B = upper_preimage(h1, level + v.R, A, A + 1.0);
  if (!(B > A))
    throw error(errc::preimage_not_found, "h1 does not cross the support of the potential");
  CompetitorSpec spec{A, B, level, level - v.R};
  return {PlateauHull<H>(h1, A, B, level - v.R), spec};
}

struct CriterionReport {
  std::size_t j = 0;
  long n = 0;
  double r = 0.0;
  double lhs = 0.0;             // int v(h1) - int v(h2)
  double rhs = 0.0;             // int |h1 - h2|
  double margin = 0.0;          // lhs - rhs
  double margin_factor2 = 0.0;  // lhs - 2 rhs
  bool destroys = false;        // margin_factor2 > 0
};

template <hull_like H1, hull_like H2>
CriterionReport destruction_margin(const H1& h1, const H2& h2, const Potential& v, std::size_t j = 0) {
  std::vector<double> breaks;
  add_hull_breakpoints(breaks, h1);
  add_hull_breakpoints(breaks, h2);
  add_support_crossings(breaks, h1, v);
  add_support_crossings(breaks, h2, v);

  CriterionReport rep;
  rep.j = j;
  rep.n = v.is_bump() ? v.n : 0;
  rep.r = v.is_bump() ? v.r : 0.0;
  constexpr bool step = is_step_hull_v<H1> && is_step_hull_v<H2>;
  rep.lhs = integrate_period([&](double t) { return v(h1(t)) - v(h2(t)); }, breaks, step);
  rep.rhs = integrate_period([&](double t) { return std::abs(h1(t) - h2(t)); }, breaks, step);
  rep.margin = rep.lhs - rep.rhs;
  rep.margin_factor2 = rep.lhs - 2.0 * rep.rhs;
  rep.destroys = rep.margin_factor2 > 0.0;
  return rep;
}

struct ScalingExponents {
  double potential_exp = 0.0;  // int v(h1) ~ n^-(1 + 1/r)
  double distance_exp = 0.0;   // int |h1 - h2| ~ n^-(2/r)
  bool destroys_asymptotically = false;
};

inline ScalingExponents scaling_exponents(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw error(errc::invalid_parameter, "r must be positive");
  ScalingExponents e;
  e.potential_exp = 1.0 + 1.0 / r;
  e.distance_exp = 2.0 / r;
  e.destroys_asymptotically = e.distance_exp > e.potential_exp;
  return e;
}

/// Grid sample h[k] = h(k / N) of any hull.
template <hull_like H>
HullFunction sample_hull(const H& h, std::size_t N) {
  std::vector<double> v(N);
  for (std::size_t k = 0; k < N; ++k) v[k] = h(static_cast<double>(k) / static_cast<double>(N));
  return HullFunction(std::move(v));
}

struct SurveyOptions {
  double epsilon = 0.1;            // deviation bound defining the near-rotation regime
  std::size_t deviation_grid = 4096;
  double kappa = default_gap_kappa;
};

struct SurveyEntry {
  CriterionReport report;
  CompetitorSpec competitor;
  double sup_deviation = 0.0;  // off the switch interval, best phase
  bool outside_regime = false;  // sup_deviation > epsilon
};

/// Builds the competitor of every continuous h1 against the potential of
/// direction j and reports the margins. A member with destroys = true cannot
/// be the profile of a continuous minimiser at this resolution.
template <hull_like H>
std::vector<SurveyEntry> necessary_condition_survey(const Model& model, const std::vector<H>& family,
                                                    std::size_t j, const SurveyOptions& opt = {}) {
  const Potential& v = model.potential(j);
  std::vector<SurveyEntry> out;
  out.reserve(family.size());
  for (const H& h1 : family) {
    SurveyEntry e;
    const HullFunction grid = [&] {
      if constexpr (std::is_same_v<H, HullFunction>) return h1;
      else return sample_hull(h1, opt.deviation_grid);
    }();
    if (!v.is_bump()) {
      // Flat potentials have no support to avoid; the competitor is h1 itself.
      e.report = destruction_margin(h1, h1, v, j);
      e.sup_deviation = sup_deviation_from_identity(grid);
    } else if constexpr (std::is_same_v<H, HullFunction>) {
      const auto [h2, spec] = construct_competitor(h1, v, opt.kappa);
      e.report = destruction_margin(h1, h2, v, j);
      e.competitor = spec;
      e.sup_deviation = sup_deviation_from_identity(grid, spec.A, spec.B);
    } else {
      const auto [h2, spec] = construct_competitor(h1, v);
      e.report = destruction_margin(h1, h2, v, j);
      e.competitor = spec;
      e.sup_deviation = sup_deviation_from_identity(grid, spec.A, spec.B);
    }
    e.outside_regime = e.sup_deviation > opt.epsilon;
    out.push_back(e);
  }
  return out;
}

/// Identity plus `count - 1` seeded perturbations
/// theta + sum_k a_k sin(2 pi k theta) / (2 pi k), k <= max_mode, whose
/// coefficient mass sum |a_k| is drawn in [0.1, budget] (budget < 1).
inline std::vector<SmoothHull> smooth_hull_family(std::size_t count, std::uint64_t seed,
                                                  double budget = 0.5, std::size_t max_mode = 8) {
  if (!(budget > 0.0 && budget < 1.0)) throw error(errc::invalid_parameter, "coefficient budget must lie in (0, 1)");
  std::vector<SmoothHull> family;
  if (count == 0) return family;
  family.push_back(SmoothHull::identity());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.1, budget);
  std::uniform_int_distribution<std::size_t> modes(1, max_mode);
  while (family.size() < count) {
    std::vector<double> a(modes(rng));
    double total = 0.0;
    for (double& x : a) {
      x = coef(rng);
      total += std::abs(x);
    }
    const double target = mass(rng);
    for (double& x : a) x *= target / total;
    family.emplace_back(std::move(a));
  }
  return family;
}

inline void write_criterion_csv_header(std::ostream& os) {
  os << "j,n,r,lhs,rhs,margin,margin_factor2,destroys\n";
}

inline void write_criterion_csv_row(std::ostream& os, const CriterionReport& rep) {
  const auto old = os.precision(17);
  os << rep.j + 1 << ',' << rep.n << ',' << rep.r << ',' << rep.lhs << ',' << rep.rhs << ','
     << rep.margin << ',' << rep.margin_factor2 << ',' << (rep.destroys ? "true" : "false") << '\n';
  os.precision(old);
}

}  // namespace fkhull
