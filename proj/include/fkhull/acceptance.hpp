#pragma once

// The eight end-to-end acceptance checks, shared by the acceptance test binary
// and the `accept` subcommand. Each check is deterministic and reports a
// one-line detail with the measured quantities.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fkhull/criterion.hpp"
#include "fkhull/experiments.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/lattice.hpp"
#include "fkhull/model.hpp"
#include "fkhull/percival.hpp"

namespace fkhull::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::vector<long> power_grid(int lo, int hi) {
  std::vector<long> n;
  for (int e = lo; e <= hi; ++e) n.push_back(1L << e);
  return n;
}

/// v = 0: the minimum is sum omega_j^2 / 2 and the minimiser is continuous.
inline Outcome integrable_recovery() {
  Outcome o{1, "integrable recovery", false, {}, 0.0};
  const std::size_t N = 1024;
  const RotationVector omega = default_rotation(2);
  const Model model = Model::uniform(2, make_zero_potential());
  const double exact = 0.5 * (omega[0] * omega[0] + omega[1] * omega[1]);
  double worst_obj = 0.0, worst_gap = 0.0;
  bool ok = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    std::mt19937_64 rng(1000 + s);
    MinimizeParams p;
    p.seed = s;
    const auto res = minimize_percival(omega, model, random_monotone_hull(N, rng), p);
    const double err = std::abs(res.objective - exact);
    const double gap = max_gap(res.minimizer);
    worst_obj = std::max(worst_obj, err);
    worst_gap = std::max(worst_gap, gap);
    ok = ok && err <= 1e-6 && gap <= 4.0 / static_cast<double>(N);
  }
  std::ostringstream os;
  os << "max |P - sum w^2/2| = " << worst_obj << " (tol 1e-6), max gap = " << worst_gap
     << " (tol " << 4.0 / static_cast<double>(N) << ")";
  o.passed = ok;
  o.detail = os.str();
  return o;
}

/// Quadratic-difference estimate on random monotone pairs.
inline Outcome estimate_property() {
  Outcome o{2, "increment estimate on random pairs", false, {}, 0.0};
  const std::size_t N = 512;
  const double omega = (std::sqrt(5.0) - 1.0) / 2.0;
  std::mt19937_64 rng(2024);
  long violations = 0, delta_out = 0;
  double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin, worst = -dmin;
  // Concentrations log-uniform in [1e-3, 10]: from near-rotations to a few jumps.
  std::uniform_real_distribution<double> log_conc(std::log(1e-3), std::log(10.0));
  for (int t = 0; t < 1000; ++t) {
    const auto h1 = random_monotone_hull(N, rng, 0.0, std::exp(log_conc(rng)));
    const auto h2 = random_monotone_hull(N, rng, 0.0, std::exp(log_conc(rng)));
    const auto res = check_estimate_lemma(h1, h2, omega);
    if (!res.holds) ++violations;
    if (!res.delta_in_range) ++delta_out;
    dmin = std::min(dmin, res.delta_min);
    dmax = std::max(dmax, res.delta_max);
    worst = std::max(worst, res.lhs - res.rhs);
  }
  std::ostringstream os;
  os << "violations = " << violations << "/1000, max(lhs - rhs) = " << worst << " (slack "
     << 8.0 / static_cast<double>(N) << "), delta in [" << dmin << ", " << dmax << "]";
  o.passed = violations == 0 && delta_out == 0;
  o.detail = os.str();
  return o;
}

struct ExponentFit {
  double potential_slope = 0.0;
  double distance_slope = 0.0;
  std::vector<CriterionReport> reports;
};

inline ExponentFit identity_exponents(double r, const std::vector<long>& ns) {
  ExponentFit fit;
  std::vector<double> x, lhs, rhs;
  const auto id = SmoothHull::identity();
  for (long n : ns) {
    const Potential v = make_bump_potential(n, r);
    const auto [h2, spec] = construct_competitor(id, v);
    const auto rep = destruction_margin(id, h2, v);
    fit.reports.push_back(rep);
    x.push_back(static_cast<double>(n));
    lhs.push_back(rep.lhs);
    rhs.push_back(rep.rhs);
  }
  fit.potential_slope = loglog_slope(x, lhs);
  fit.distance_slope = loglog_slope(x, rhs);
  return fit;
}

/// r = 0.5: potential integral ~ n^-3, competitor distance ~ n^-4.
inline Outcome exponent_reproduction() {
  Outcome o{3, "scaling exponents at r = 0.5", false, {}, 0.0};
  const double r = 0.5;
  const auto ns = power_grid(4, 12);
  const auto fit = identity_exponents(r, ns);
  const auto pred = scaling_exponents(r);
  std::optional<long> threshold;
  for (std::size_t k = ns.size(); k-- > 0;) {
    if (!fit.reports[k].destroys) break;
    threshold = ns[k];
  }
  std::ostringstream os;
  os << "slopes " << fit.potential_slope << " (expect " << -pred.potential_exp << " +- 0.1), "
     << fit.distance_slope << " (expect " << -pred.distance_exp << " +- 0.1), threshold n = "
     << (threshold ? std::to_string(*threshold) : std::string("none"));
  o.passed = std::abs(fit.potential_slope + pred.potential_exp) <= 0.1 &&
             std::abs(fit.distance_slope + pred.distance_exp) <= 0.1 && threshold.has_value();
  o.detail = os.str();
  return o;
}

/// r = 2: the conservative margin stays negative and the exponent test agrees.
inline Outcome no_false_destruction() {
  Outcome o{4, "no destruction for r >= 1", false, {}, 0.0};
  const auto ns = power_grid(4, 12);
  const auto fit = identity_exponents(2.0, ns);
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ns.size(); ++k)
    if (ns[k] >= 64) {
      worst = std::max(worst, fit.reports[k].margin_factor2);
      ok = ok && fit.reports[k].margin_factor2 < 0.0;
    }
  bool exps = true;
  for (double r : {1.0, 1.5, 2.0, 3.0}) exps = exps && !scaling_exponents(r).destroys_asymptotically;
  for (double r : {0.25, 0.5, 0.75, 0.99}) exps = exps && scaling_exponents(r).destroys_asymptotically;
  std::ostringstream os;
  os << "max conservative margin over n >= 64: " << worst << ", exponent classification "
     << (exps ? "ok" : "wrong");
  o.passed = ok && exps;
  o.detail = os.str();
  return o;
}

/// n = 16, r = 0.5 on N = 4096: the minimiser opens a gap and the competitor
/// beats every continuous family member.
inline Outcome gap_emergence() {
  Outcome o{5, "gap emergence at r = 0.5, n = 16", false, {}, 0.0};
  const std::size_t N = 4096;
  const Potential v = make_bump_potential(16, 0.5);
  const Model model = Model::uniform(2, v);
  const RotationVector omega = default_rotation(2);
  const auto res = minimize_percival(omega, model, HullFunction::identity(N), MinimizeParams{});
  const double gap = max_gap(res.minimizer);

  const auto family = smooth_hull_family(6, 0);
  const auto [competitor, spec] = construct_competitor(HullFunction::identity(N), v);
  const double p_comp = percival_value(competitor, omega, model);
  double p_family_min = std::numeric_limits<double>::infinity();
  for (const auto& h : family) p_family_min = std::min(p_family_min, percival_value(h.sample(N), omega, model));

  std::ostringstream os;
  os << "converged = " << (res.converged ? "yes" : "no") << ", max gap = " << gap << " (R = " << v.R
     << "), P(competitor) = " << p_comp << ", min P(family) = " << p_family_min;
  o.passed = res.converged && gap >= v.R && p_comp < p_family_min;
  o.detail = os.str();
  return o;
}

/// Norm-wise relative error of the analytic gradient against central differences.
inline Outcome gradient_check() {
  Outcome o{6, "gradient against central differences", false, {}, 0.0};
  const std::size_t N = 128;
  const RotationVector omega = default_rotation(2);
  const Model model = Model::uniform(2, make_bump_potential(4, 0.5));
  std::mt19937_64 rng(6);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto h = random_monotone_hull(N, rng, 0.1 / static_cast<double>(N));
    const auto g = percival_gradient(h, omega, model);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      std::vector<double> up(h.values().begin(), h.values().end()), dn = up;
      up[k] += eps;
      dn[k] -= eps;
      const double fd = (percival_value(HullFunction(std::move(up)), omega, model) -
                         percival_value(HullFunction(std::move(dn)), omega, model)) /
                        (2.0 * eps);
      num += (g[k] - fd) * (g[k] - fd);
      den += g[k] * g[k];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  std::ostringstream os;
  os << "max relative error = " << worst << " (tol 1e-5)";
  o.passed = worst < 1e-5;
  o.detail = os.str();
  return o;
}

/// Hoelder norms of the bump family at r = 0.5.
inline Outcome holder_decay() {
  Outcome o{7, "Hoelder norm decay at r = 0.5", false, {}, 0.0};
  const double r = 0.5;
  const auto ns = power_grid(4, 12);
  std::vector<double> x, low, high;
  for (long n : ns) {
    const Potential v = make_bump_potential(n, r);
    x.push_back(static_cast<double>(n));
    low.push_back(holder_norm(v, 0.4));
    high.push_back(holder_norm(v, 0.6));
  }
  bool decreasing = true, nondecreasing = true;
  for (std::size_t k = 1; k < ns.size(); ++k) {
    decreasing = decreasing && low[k] < low[k - 1];
    nondecreasing = nondecreasing && high[k] >= high[k - 1];
  }
  const double slope = loglog_slope(x, low);
  std::ostringstream os;
  os << "alpha 0.4: " << (decreasing ? "strictly decreasing" : "NOT decreasing") << ", slope " << slope
     << " (expect -0.2 +- 0.05); alpha 0.6: " << (nondecreasing ? "non-decreasing" : "DECREASING");
  o.passed = decreasing && nondecreasing && std::abs(slope + 0.2) <= 0.05;
  o.detail = os.str();
  return o;
}

namespace detail {
inline double hull_lattice_mismatch(const HullFunction& h, const RotationVector& omega, const Model& model,
                                    const Box& box) {
  const auto u = configuration_from_hull(h, omega, box);
  const auto res = lattice_el_residual(u, model);
  const Box inner{res.d, res.radius};
  double worst = 0.0;
  for (std::size_t f = 0; f < res.values.size(); ++f) {
    const auto i = inner.site(f);
    double phase = 0.0;
    for (std::size_t k = 0; k < box.d; ++k) phase += omega[k] * static_cast<double>(i[k]);
    worst = std::max(worst, std::abs(res.values[f] - el_residual(h, omega, model, phase)));
  }
  return worst;
}
}  // namespace detail

/// Lattice residual of hull-induced configurations against the hull residual,
/// plus the sampled ground-state check on the linear configuration.
inline Outcome hull_lattice_consistency() {
  Outcome o{8, "hull-lattice consistency", false, {}, 0.0};
  const RotationVector omega = default_rotation(2);
  const Box box{2, 16};

  const Model flat = Model::uniform(2, make_zero_potential());
  const auto lin = configuration_from_hull(HullFunction::identity(1024), omega, box);
  const double flat_res = lattice_el_residual(lin, flat).sup_abs();

  const Model bump = Model::uniform(2, make_bump_potential(16, 0.5));
  const auto res = minimize_percival(omega, bump, HullFunction::identity(1024), MinimizeParams{});
  const double mismatch = detail::hull_lattice_mismatch(res.minimizer, omega, bump, box);

  ClassACheckOptions opt;
  opt.trials = 1000;
  opt.seed = 8;
  const auto class_a = sampled_class_a_check(linear_configuration(omega, box), flat, opt);

  std::ostringstream os;
  os << "v = 0 lattice residual = " << flat_res << " (rounding level)" << ", bump mismatch = " << mismatch
     << " (tol 1e-3), class-A violations = " << class_a.violations << "/" << class_a.trials;
  o.passed = flat_res <= 1e-12 && mismatch <= 1e-3 && class_a.violations == 0;
  o.detail = os.str();
  return o;
}

inline std::vector<std::function<Outcome()>> all_checks() {
  return {integrable_recovery, estimate_property, exponent_reproduction, no_false_destruction,
          gap_emergence,       gradient_check,    holder_decay,          hull_lattice_consistency};
}

inline Outcome timed(const std::function<Outcome()>& check, int id) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.id = id;
    o.name = "check";
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

inline std::string format(const Outcome& o) {
  std::ostringstream os;
  os << (o.passed ? "PASS" : "FAIL") << " [" << o.id << "] " << o.name << ": " << o.detail << " ("
     << std::fixed << std::setprecision(2) << o.seconds << " s)";
  return os.str();
}

/// Runs every check, printing one line each; returns the number of failures.
inline int run_all(std::ostream& os) {
  int failures = 0;
  const auto checks = all_checks();
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto o = timed(checks[k], static_cast<int>(k + 1));
    if (!o.passed) ++failures;
    os << format(o) << std::endl;
  }
  return failures;
}

}  // namespace fkhull::acceptance
