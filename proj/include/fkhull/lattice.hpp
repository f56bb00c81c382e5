#pragma once

// Configurations on the hypercube {i in Z^d : |i|_inf <= M}, the lattice
// Euler-Lagrange residual, and sampled class-A (ground state) checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include "fkhull/error.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/model.hpp"

namespace fkhull {

/// Hypercube of sites with |i|_inf <= radius, stored row-major with the first
/// coordinate fastest.
struct Box {
  std::size_t d = 1;
  long radius = 2;

  void validate() const {
    if (d == 0) throw error(errc::invalid_parameter, "box dimension must be positive");
    if (radius < 2)
      throw error(errc::invalid_parameter, "box radius must be >= 2, got " + std::to_string(radius));
  }

  long side() const { return 2 * radius + 1; }

  std::size_t sites() const {
    std::size_t s = 1;
    for (std::size_t k = 0; k < d; ++k) s *= static_cast<std::size_t>(side());
    return s;
  }

  std::size_t stride(std::size_t j) const {
    std::size_t s = 1;
    for (std::size_t k = 0; k < j; ++k) s *= static_cast<std::size_t>(side());
    return s;
  }

  std::vector<long> site(std::size_t flat) const {
    std::vector<long> i(d);
    for (std::size_t k = 0; k < d; ++k) {
      i[k] = static_cast<long>(flat % static_cast<std::size_t>(side())) - radius;
      flat /= static_cast<std::size_t>(side());
    }
    return i;
  }

  std::size_t flat(const std::vector<long>& i) const {
    std::size_t f = 0;
    for (std::size_t k = d; k-- > 0;) f = f * static_cast<std::size_t>(side()) + static_cast<std::size_t>(i[k] + radius);
    return f;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline long sup_norm(const std::vector<long>& i) {
  long m = 0;
  for (long c : i) m = std::max(m, c < 0 ? -c : c);
  return m;
}

struct Configuration {
  Box box;
  std::vector<double> values;

  double operator[](const std::vector<long>& i) const { return values[box.flat(i)]; }
};

/// Values on the interior sites |i|_inf <= radius - 1 of a configuration box.
struct SiteField {
  std::size_t d = 1;
  long radius = 1;
  std::vector<double> values;

  double sup_abs() const {
    double s = 0.0;
    for (double x : values) s = std::max(s, std::abs(x));
    return s;
  }
};

/// Compactly supported perturbation: zero wherever |i|_inf >= support.
struct Perturbation {
  Box box;
  long support = 1;
  std::vector<double> values;

  static Perturbation zero(const Box& box, long support) {
    return {box, support, std::vector<double>(box.sites(), 0.0)};
  }
};

inline Configuration configuration_from_hull(const HullFunction& h, const RotationVector& omega,
                                             const Box& box) {
  box.validate();
  if (omega.size() != box.d)
    throw error(errc::dimension_mismatch, "rotation vector and box dimensions differ");
  Configuration u{box, std::vector<double>(box.sites())};
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    const auto i = box.site(f);
    double phase = 0.0;
    for (std::size_t k = 0; k < box.d; ++k) phase += omega[k] * static_cast<double>(i[k]);
    u.values[f] = h.interpolate(phase);
  }
  return u;
}

inline Configuration linear_configuration(const RotationVector& omega, const Box& box,
                                          double offset = 0.0) {
  box.validate();
  if (omega.size() != box.d)
    throw error(errc::dimension_mismatch, "rotation vector and box dimensions differ");
  Configuration u{box, std::vector<double>(box.sites())};
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    const auto i = box.site(f);
    double phase = offset;
    for (std::size_t k = 0; k < box.d; ++k) phase += omega[k] * static_cast<double>(i[k]);
    u.values[f] = phase;
  }
  return u;
}

inline SiteField lattice_el_residual(const Configuration& u, const Model& model) {
  u.box.validate();
  if (model.d != u.box.d) throw error(errc::dimension_mismatch, "model and box dimensions differ");
  const Box inner{u.box.d, u.box.radius - 1};
  SiteField r{inner.d, inner.radius, std::vector<double>(inner.sites(), 0.0)};
  for (std::size_t f = 0; f < r.values.size(); ++f) {
    const std::size_t c = u.box.flat(inner.site(f));
    double s = 0.0;
    for (std::size_t j = 0; j < model.d; ++j) {
      const std::size_t e = u.box.stride(j);
      s += d1_H(model, j, u.values[c], u.values[c + e]);
      s += d2_H(model, j, u.values[c - e], u.values[c]);
    }
    r.values[f] = s;
  }
  return r;
}

/// Energy change sum_{|i| <= N+1} sum_j [H_j(u + phi) - H_j(u)] over the bonds
/// (i, i + e_j). Each bond is evaluated as delta * (a + delta / 2) plus the
/// potential difference, which avoids cancellation for small phi.
inline double energy_difference(const Configuration& u, const Perturbation& phi, const Model& model) {
  u.box.validate();
  if (!(phi.box == u.box)) throw error(errc::dimension_mismatch, "perturbation box differs from configuration box");
  if (model.d != u.box.d) throw error(errc::dimension_mismatch, "model and box dimensions differ");
  if (phi.support < 0 || !(phi.support + 1 < u.box.radius))
    throw error(errc::support_too_large, "perturbation support " + std::to_string(phi.support) +
                                             " needs support + 1 < box radius " +
                                             std::to_string(u.box.radius));
  double total = 0.0;
  const long reach = phi.support + 1;
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    const auto i = u.box.site(f);
    if (sup_norm(i) > reach) continue;
    for (std::size_t j = 0; j < model.d; ++j) {
      const std::size_t g = f + u.box.stride(j);
      const double a = u.values[f] - u.values[g];
      const double delta = phi.values[f] - phi.values[g];
      const Potential& v = model.potential(j);
      total += delta * (a + 0.5 * delta) + (v(u.values[f] + phi.values[f]) - v(u.values[f]));
    }
  }
  return total;
}

struct ClassACheckOptions {
  long trials = 1000;
  std::uint64_t seed = 0;
  double amplitude = 0.0;  // <= 0 selects 2R of the model, or 0.1 without bumps
  double tolerance = 1e-10;
};

struct ClassAReport {
  long trials = 0;
  long violations = 0;
  double min_delta = std::numeric_limits<double>::infinity();
  double amplitude = 0.0;
};

/// Random compactly supported perturbations centred at the origin. A violation
/// (energy drop below -tolerance) certifies non-minimality; zero violations is
/// evidence only. Trial t draws from its own stream seeded by (seed, t).
inline ClassAReport sampled_class_a_check(const Configuration& u, const Model& model,
                                          const ClassACheckOptions& opt = {}) {
  u.box.validate();
  if (opt.trials < 1) throw error(errc::invalid_parameter, "class-A check needs at least one trial");
  ClassAReport rep;
  rep.trials = opt.trials;
  rep.amplitude = opt.amplitude > 0.0 ? opt.amplitude
                  : model.max_support_radius() > 0.0 ? 2.0 * model.max_support_radius()
                                                      : 0.1;
  const long max_support = std::min<long>(4, u.box.radius - 2);
  if (max_support < 1) throw error(errc::invalid_parameter, "box too small for perturbations");

  for (long t = 0; t < opt.trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    const long support = std::uniform_int_distribution<long>(1, max_support)(rng);
    std::uniform_real_distribution<double> amp(-rep.amplitude, rep.amplitude);
    auto phi = Perturbation::zero(u.box, support);
    for (std::size_t f = 0; f < phi.values.size(); ++f)
      if (sup_norm(u.box.site(f)) < support) phi.values[f] = amp(rng);
    const double delta = energy_difference(u, phi, model);
    rep.min_delta = std::min(rep.min_delta, delta);
    if (delta < -opt.tolerance) ++rep.violations;
  }
  return rep;
}

inline void write_configuration_csv(std::ostream& os, const Configuration& u) {
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < u.box.d; ++k) os << 'i' << (k + 1) << ',';
  os << "u\n";
  for (std::size_t f = 0; f < u.values.size(); ++f) {
    for (long c : u.box.site(f)) os << c << ',';
    os << u.values[f] << '\n';
  }
  os.precision(old);
}

}  // namespace fkhull
