#pragma once

// Periodic on-site potentials and the nearest-neighbour generating functions
//   H_j(x, x') = (x - x')^2 / 2 + v_j(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fkhull/error.hpp"

namespace fkhull {

enum class profile_kind { mollifier, zero, constant };

inline std::string_view profile_id(profile_kind p) {
  switch (p) {
    case profile_kind::mollifier: return "mollifier";
    case profile_kind::zero: return "zero";
    case profile_kind::constant: return "constant";
  }
  return "unknown";
}

inline profile_kind parse_profile_id(std::string_view id) {
  if (id == "mollifier") return profile_kind::mollifier;
  if (id == "zero") return profile_kind::zero;
  if (id == "constant") return profile_kind::constant;
  throw error(errc::invalid_parameter, "unknown potential profile '" + std::string(id) + "'");
}

namespace detail {

// phi(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, zero elsewhere; phi(0) = 1.
inline double mollifier(double t) {
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

inline double mollifier_derivative(double t) {
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q) * (-2.0 * t / (q * q));
}

// x - x0 reduced to [-1/2, 1/2).
inline double signed_offset(double x, double x0) {
  const double s = x - x0;
  return s - std::floor(s + 0.5);
}

}  // namespace detail

/// A 1-periodic non-negative potential. The bump member is
/// v(x) = amplitude * phi((x - x0) / R) with R = n^(-1/r) and amplitude = 1/n.
struct Potential {
  profile_kind profile = profile_kind::zero;
  long n = 1;
  double r = 1.0;
  double x0 = 0.5;
  double R = 0.0;          // support radius, zero for flat profiles
  double amplitude = 0.0;  // peak value (1/n for a bump) or the constant

  double operator()(double x) const {
    switch (profile) {
      case profile_kind::zero: return 0.0;
      case profile_kind::constant: return amplitude;
      case profile_kind::mollifier: {
        const double s = detail::signed_offset(x, x0);
        if (std::abs(s) >= R) return 0.0;
        return amplitude * detail::mollifier(s / R);
      }
    }
    return 0.0;
  }

  double derivative(double x) const {
    if (profile != profile_kind::mollifier) return 0.0;
    const double s = detail::signed_offset(x, x0);
    if (std::abs(s) >= R) return 0.0;
    return amplitude * detail::mollifier_derivative(s / R) / R;
  }

  bool is_bump() const { return profile == profile_kind::mollifier; }

  /// Same shape, amplitude multiplied by `lambda`.
  Potential scaled(double lambda) const {
    Potential p = *this;
    p.amplitude *= lambda;
    return p;
  }
};

inline Potential make_zero_potential() { return Potential{}; }

inline Potential make_constant_potential(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw error(errc::invalid_parameter, "constant potential must be finite and non-negative");
  Potential p;
  p.profile = profile_kind::constant;
  p.amplitude = c;
  return p;
}

inline Potential make_bump_potential(long n, double r, double x0 = 0.5) {
  if (n < 1) throw error(errc::invalid_parameter, "bump amplitude parameter n must be >= 1");
  if (!(r > 0.0) || !std::isfinite(r))
    throw error(errc::invalid_parameter, "bump support exponent r must be positive");
  if (!(x0 >= 0.0 && x0 < 1.0))
    throw error(errc::invalid_parameter, "bump centre x0 must lie in [0, 1)");
  const double R = std::pow(static_cast<double>(n), -1.0 / r);
  if (!(R < 0.5))
    throw error(errc::degenerate_support,
                "support radius n^(-1/r) = " + std::to_string(R) + " is not below 1/2 for (n=" +
                    std::to_string(n) + ", r=" + std::to_string(r) + ")");
  Potential p;
  p.profile = profile_kind::mollifier;
  p.n = n;
  p.r = r;
  p.x0 = x0;
  p.R = R;
  p.amplitude = 1.0 / static_cast<double>(n);
  return p;
}

inline double eval_potential(const Potential& v, double x) { return v(x); }

struct RotationVector {
  std::vector<double> components;

  RotationVector() = default;
  explicit RotationVector(std::vector<double> c) : components(std::move(c)) {
    if (components.empty()) throw error(errc::invalid_parameter, "rotation vector is empty");
    for (double w : components)
      if (!std::isfinite(w) || !(w > 0.0 && w < 1.0))
        throw error(errc::invalid_parameter,
                    "rotation vector components must lie in (0, 1), got " + std::to_string(w));
  }

  std::size_t size() const { return components.size(); }
  double operator[](std::size_t j) const { return components[j]; }
};

/// Golden-mean and silver-mean components, the defaults for experiments.
inline RotationVector default_rotation(std::size_t d) {
  static const double base[] = {(std::sqrt(5.0) - 1.0) / 2.0, std::sqrt(2.0) - 1.0,
                                std::sqrt(3.0) - 1.0, (std::sqrt(13.0) - 3.0) / 2.0};
  std::vector<double> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = base[j % 4];
  return RotationVector(std::move(c));
}

struct Model {
  std::size_t d = 1;
  std::vector<Potential> potentials;

  Model() = default;
  Model(std::size_t dim, std::vector<Potential> pots) : d(dim), potentials(std::move(pots)) {
    if (d == 0) throw error(errc::invalid_parameter, "lattice dimension must be positive");
    if (potentials.size() != d)
      throw error(errc::dimension_mismatch, "model needs exactly d = " + std::to_string(d) +
                                                " potentials, got " +
                                                std::to_string(potentials.size()));
  }

  /// Every direction carries the same potential.
  static Model uniform(std::size_t dim, const Potential& v) {
    return Model(dim, std::vector<Potential>(dim, v));
  }

  const Potential& potential(std::size_t j) const { return potentials.at(j); }

  /// Largest support radius over the directions, zero when no bump is present.
  double max_support_radius() const {
    double R = 0.0;
    for (const auto& p : potentials) R = std::max(R, p.R);
    return R;
  }
};

inline void check_dimensions(const Model& model, const RotationVector& omega) {
  if (omega.size() != model.d)
    throw error(errc::dimension_mismatch, "rotation vector has " + std::to_string(omega.size()) +
                                              " components but the model has d = " +
                                              std::to_string(model.d));
}

inline double eval_H(const Model& model, std::size_t j, double x, double xp) {
  const double dx = x - xp;
  return 0.5 * dx * dx + model.potential(j)(x);
}

inline double d1_H(const Model& model, std::size_t j, double x, double xp) {
  return (x - xp) + model.potential(j).derivative(x);
}

inline double d2_H(const Model&, std::size_t, double x, double xp) { return -(x - xp); }

/// Grid lower bound for sup|v| + [v]_alpha. Nodes are a uniform grid of
/// `grid_size` points on the circle plus, for bumps, `grid_size + 1` points
/// spanning the support, so doubling `grid_size` only adds nodes.
inline double holder_norm(const Potential& v, double alpha, std::size_t grid_size = 4096) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw error(errc::invalid_parameter, "Hoelder exponent must lie in (0, 1)");
  if (grid_size < 2) throw error(errc::invalid_parameter, "Hoelder grid needs at least 2 points");

  struct node {
    double x;
    double value;
  };
  std::vector<node> nodes;
  nodes.reserve(2 * grid_size + 1);
  const double g = static_cast<double>(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double x = static_cast<double>(k) / g;
    nodes.push_back({x, v(x)});
  }
  if (v.is_bump()) {
    for (std::size_t k = 0; k <= grid_size; ++k) {
      double x = v.x0 + v.R * (-1.0 + 2.0 * static_cast<double>(k) / g);
      x -= std::floor(x);
      nodes.push_back({x, v(x)});
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const node& a, const node& b) { return a.x < b.x; });

  double sup = 0.0;
  for (const auto& p : nodes) sup = std::max(sup, std::abs(p.value));

  auto circle_dist = [](double a, double b) {
    const double t = std::abs(a - b);
    return std::min(t, 1.0 - t);
  };

  // Pairs of two zero nodes contribute nothing. For a non-zero node against
  // the zero nodes, the quotient is largest at the nearest zero on each side.
  const std::size_t m = nodes.size();
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < m; ++i)
    if (nodes[i].value != 0.0) nonzero.push_back(i);
  if (nonzero.empty()) return sup;

  double semi = 0.0;
  auto consider = [&](const node& a, const node& b) {
    const double dist = circle_dist(a.x, b.x);
    if (dist <= 0.0) return;
    semi = std::max(semi, std::abs(a.value - b.value) / std::pow(dist, alpha));
  };

  for (std::size_t a = 0; a < nonzero.size(); ++a)
    for (std::size_t b = a + 1; b < nonzero.size(); ++b) consider(nodes[nonzero[a]], nodes[nonzero[b]]);

  if (nonzero.size() < m) {
    for (std::size_t i : nonzero) {
      for (std::size_t step = 1; step < m; ++step) {
        const auto& z = nodes[(i + step) % m];
        if (z.value == 0.0) {
          consider(nodes[i], z);
          break;
        }
      }
      for (std::size_t step = 1; step < m; ++step) {
        const auto& z = nodes[(i + m - step) % m];
        if (z.value == 0.0) {
          consider(nodes[i], z);
          break;
        }
      }
    }
  }
  return sup + semi;
}

}  // namespace fkhull
