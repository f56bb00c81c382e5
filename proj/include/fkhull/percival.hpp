#pragma once

// Percival Lagrangian P(h) = sum_j int_0^1 H_j(h(theta), h(theta + omega_j)) dtheta
// on grid hull functions, its gradient, and a projected-gradient minimiser.
//
// For a left-continuous piecewise-constant hull the shifted value
// h(theta + omega_j) on a cell takes two node values, with weights 1 - f and
// f where omega_j N = q + f. The quadrature below integrates both pieces, so
// P is exact for the discretised object. Its node gradient is
// (1/N) * residual(theta_k) where the residual reads the shifted values from
// the piecewise-linear interpolant; el_residual uses the same interpolant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fkhull/error.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/model.hpp"

namespace fkhull {

namespace detail {

struct grid_shift {
  long long q;  // whole cells
  double f;     // fractional part in [0, 1)
};

inline grid_shift shift_of(double omega, std::size_t N) {
  const double x = omega * static_cast<double>(N);
  const double q = std::floor(x);
  return {static_cast<long long>(q), x - q};
}

}  // namespace detail

inline double percival_value(const HullFunction& h, const RotationVector& omega, const Model& model) {
  check_dimensions(model, omega);
  const std::size_t N = h.size();
  double total = 0.0;
  for (std::size_t j = 0; j < model.d; ++j) {
    const auto [q, f] = detail::shift_of(omega[j], N);
    const Potential& v = model.potential(j);
    double sum = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
      const auto k = static_cast<long long>(p);
      const double x = h[p];
      const double a = x - h.at(k + q);
      const double b = x - h.at(k + q + 1);
      sum += 0.5 * ((1.0 - f) * a * a + f * b * b) + v(x);
    }
    total += sum;
  }
  return total / static_cast<double>(N);
}

/// Exact gradient of percival_value with respect to the N node values.
inline std::vector<double> percival_gradient(const HullFunction& h, const RotationVector& omega,
                                             const Model& model) {
  check_dimensions(model, omega);
  const std::size_t N = h.size();
  const double inv_n = 1.0 / static_cast<double>(N);
  std::vector<double> g(N, 0.0);
  for (std::size_t j = 0; j < model.d; ++j) {
    const auto [q, f] = detail::shift_of(omega[j], N);
    const Potential& v = model.potential(j);
    for (std::size_t i = 0; i < N; ++i) {
      const auto k = static_cast<long long>(i);
      const double x = h[i];
      const double near = 2.0 * x - h.at(k + q) - h.at(k - q);
      const double far = 2.0 * x - h.at(k + q + 1) - h.at(k - q - 1);
      g[i] += inv_n * (v.derivative(x) + (1.0 - f) * near + f * far);
    }
  }
  return g;
}

/// sum_j [d1 H_j(h(theta), h(theta + w_j)) + d2 H_j(h(theta - w_j), h(theta))]
/// with h read from the piecewise-linear interpolant of the nodes.
inline double el_residual(const HullFunction& h, const RotationVector& omega, const Model& model,
                          double theta) {
  check_dimensions(model, omega);
  const double x = h.interpolate(theta);
  double r = 0.0;
  for (std::size_t j = 0; j < model.d; ++j) {
    r += d1_H(model, j, x, h.interpolate(theta + omega[j]));
    r += d2_H(model, j, h.interpolate(theta - omega[j]), x);
  }
  return r;
}

/// Nodes where the pointwise equation is not expected to hold: members of a
/// tied block (an active monotonicity constraint) and nodes next to a gap.
inline std::vector<bool> residual_exclusions(const HullFunction& h, double kappa = default_gap_kappa) {
  const std::size_t N = h.size();
  const double gap = kappa / static_cast<double>(N);
  std::vector<bool> out(N, false);
  for (std::size_t k = 0; k < N; ++k) {
    const auto i = static_cast<long long>(k);
    const double up = h.at(i + 1) - h.at(i);
    const double down = h.at(i) - h.at(i - 1);
    if (up == 0.0 || down == 0.0 || up > gap || down > gap) out[k] = true;
  }
  return out;
}

struct ResidualSummary {
  double sup = 0.0;
  std::size_t excluded = 0;
};

inline ResidualSummary el_residual_sup(const HullFunction& h, const RotationVector& omega,
                                       const Model& model, bool exclude_irregular = true) {
  const auto skip = exclude_irregular ? residual_exclusions(h) : std::vector<bool>(h.size(), false);
  ResidualSummary s;
  const double dN = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (skip[k]) {
      ++s.excluded;
      continue;
    }
    s.sup = std::max(s.sup, std::abs(el_residual(h, omega, model, static_cast<double>(k) / dN)));
  }
  return s;
}

struct MinimizeParams {
  long max_iters = 200000;
  double step_size = 0.1;  // initial step on the residual N * grad
  double tol_grad = 1e-8;
  double tol_obj = 1e-12;
  std::uint64_t seed = 0;
  int restarts = 0;
  double restart_amplitude = 1e-3;
  long stall_window = 50;

  void validate() const {
    if (max_iters < 1) throw error(errc::invalid_parameter, "max_iters must be >= 1");
    if (!(step_size > 0.0)) throw error(errc::invalid_parameter, "step_size must be positive");
    if (!(tol_grad > 0.0) || !(tol_obj > 0.0))
      throw error(errc::invalid_parameter, "tolerances must be positive");
    if (restarts < 0) throw error(errc::invalid_parameter, "restarts must be >= 0");
    if (stall_window < 1) throw error(errc::invalid_parameter, "stall_window must be >= 1");
  }

  friend bool operator==(const MinimizeParams&, const MinimizeParams&) = default;
};

struct MinimizeResult {
  HullFunction minimizer;
  double objective = 0.0;
  double el_residual_sup = 0.0;
  std::size_t residual_excluded = 0;
  long iterations = 0;
  bool converged = false;  // projected-gradient sup-norm reached tol_grad
  bool stalled = false;    // objective decrease below tol_obj over the stall window
  double projected_gradient = 0.0;
  std::vector<double> trace;  // objective after every accepted iterate
};

/// sup_k |h - P(h - g)|, zero exactly at a KKT point of the cone-constrained problem.
inline double projected_gradient_norm(const HullFunction& h, const std::vector<double>& g) {
  std::vector<double> y(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) y[k] = h[k] - g[k];
  const HullFunction p = project_monotone(y);
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s = std::max(s, std::abs(h[k] - p[k]));
  return s;
}

namespace detail {

struct descent_run {
  HullFunction x;
  double fx;
  long iterations = 0;
  bool converged = false;
  bool stalled = false;
  double pg = 0.0;
};

inline double checked(double f) {
  if (!std::isfinite(f)) throw error(errc::non_finite_objective, "Percival objective is not finite");
  return f;
}

// Projected gradient with Barzilai-Borwein trial steps and halving until the
// objective does not increase; every accepted iterate is monotone in value.
inline descent_run projected_descent(HullFunction x, const RotationVector& omega, const Model& model,
                                     const MinimizeParams& params, long budget,
                                     std::vector<double>& trace) {
  const std::size_t N = x.size();
  const double dN = static_cast<double>(N);
  descent_run run{x, checked(percival_value(x, omega, model))};
  auto g = percival_gradient(x, omega, model);
  double alpha = params.step_size;
  std::vector<double> y(N);

  for (long it = 0; it < budget; ++it) {
    run.pg = projected_gradient_norm(run.x, g);
    if (run.pg <= params.tol_grad) {
      run.converged = true;
      break;
    }
    HullFunction next;
    double fnext = 0.0;
    double shift = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings, alpha *= 0.5) {
      for (std::size_t k = 0; k < N; ++k) y[k] = run.x[k] - alpha * dN * g[k];
      const HullFunction raw = project_monotone(y);
      shift = std::floor(raw[0]);
      next = shift == 0.0 ? raw : raw.shifted(-shift);
      fnext = checked(percival_value(next, omega, model));
      if (fnext <= run.fx) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      run.stalled = true;
      break;
    }
    auto gnext = percival_gradient(next, omega, model);

    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double s = next[k] + shift - run.x[k];
      ss += s * s;
      sy += s * dN * (gnext[k] - g[k]);
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(alpha * 4.0, 1e6);

    run.x = std::move(next);
    run.fx = fnext;
    g = std::move(gnext);
    ++run.iterations;
    trace.push_back(run.fx);

    const auto window = static_cast<std::size_t>(params.stall_window);
    if (trace.size() > window && trace[trace.size() - 1 - window] - run.fx <= params.tol_obj) {
      run.pg = projected_gradient_norm(run.x, g);
      run.converged = run.pg <= params.tol_grad;
      run.stalled = !run.converged;
      break;
    }
  }
  if (!run.converged && !run.stalled) run.pg = projected_gradient_norm(run.x, g);
  return run;
}

}  // namespace detail

/// Projected-gradient minimisation of the Percival Lagrangian from `init`,
/// followed by `params.restarts` seeded random restarts around the best point.
inline MinimizeResult minimize_percival(const RotationVector& omega, const Model& model,
                                        const HullFunction& init, const MinimizeParams& params) {
  check_dimensions(model, omega);
  params.validate();

  MinimizeResult result;
  const HullFunction start = normalize_gauge(project_monotone(init.values()));
  result.trace.push_back(detail::checked(percival_value(start, omega, model)));

  auto best = detail::projected_descent(start, omega, model, params, params.max_iters, result.trace);
  long used = best.iterations;

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> noise(-params.restart_amplitude, params.restart_amplitude);
  for (int r = 0; r < params.restarts && used < params.max_iters; ++r) {
    std::vector<double> y(best.x.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = best.x[k] + noise(rng);
    const HullFunction restart = normalize_gauge(project_monotone(y));
    // Restarts are scored separately so the recorded trace stays monotone.
    std::vector<double> scratch;
    auto run = detail::projected_descent(restart, omega, model, params, params.max_iters - used, scratch);
    used += run.iterations;
    if (run.fx < best.fx) {
      best = std::move(run);
      result.trace.push_back(best.fx);
    }
  }

  result.minimizer = std::move(best.x);
  result.objective = percival_value(result.minimizer, omega, model);
  result.iterations = used;
  result.converged = best.converged;
  result.stalled = best.stalled;
  result.projected_gradient = best.pg;
  const auto res = el_residual_sup(result.minimizer, omega, model);
  result.el_residual_sup = res.sup;
  result.residual_excluded = res.excluded;
  return result;
}

}  // namespace fkhull
