#pragma once

// Hull functions: monotone degree-one circle maps h(theta + 1) = h(theta) + 1.
//
// HullFunction is the discretised object (uniform N-grid, left-continuous
// piecewise-constant), SmoothHull an analytic continuous one. Both model the
// `hull_like` concept used by the criterion machinery.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fkhull/error.hpp"

namespace fkhull {

template <class H>
concept hull_like = requires(const H& h, double theta) {
  { h(theta) } -> std::convertible_to<double>;
  { h.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

/// Continuity threshold at resolution N: increments above kappa/N count as gaps.
inline constexpr double default_gap_kappa = 4.0;

class HullFunction {
 public:
  HullFunction() = default;

  /// Validates monotonicity including the wrap h[N-1] <= h[0] + 1.
  explicit HullFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw error(errc::invalid_hull, "hull function needs N >= 1 values");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k]))
        throw error(errc::invalid_hull, "non-finite value at node " + std::to_string(k));
      if (k + 1 < values_.size() && values_[k] > values_[k + 1])
        throw error(errc::invalid_hull, "values decrease between nodes " + std::to_string(k) +
                                            " and " + std::to_string(k + 1));
    }
    if (values_.back() > values_.front() + 1.0)
      throw error(errc::invalid_hull, "wrap constraint h[N-1] <= h[0] + 1 violated");
  }

  static HullFunction identity(std::size_t N) {
    std::vector<double> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = static_cast<double>(k) / static_cast<double>(N);
    return HullFunction(std::move(v));
  }

  /// All nodes at `level`: a single unit jump per period.
  static HullFunction step(std::size_t N, double level = 0.0) {
    return HullFunction(std::vector<double>(N, level));
  }

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// Node value with the integer lift, valid for any integer index.
  double at(long long k) const {
    const auto n = static_cast<long long>(values_.size());
    long long q = k / n;
    long long r = k % n;
    if (r < 0) {
      r += n;
      --q;
    }
    return values_[static_cast<std::size_t>(r)] + static_cast<double>(q);
  }

  /// h(theta) with the left-continuous convention: constant h[k] on ((k-1)/N, k/N].
  double operator()(double theta) const {
    const double x = theta * static_cast<double>(size());
    double k = std::ceil(x);
    // Snap nodes computed as k/N that land one ulp above the node.
    if (k - x > 1.0 - 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      k -= 1.0;
    return at(static_cast<long long>(k));
  }

  /// Piecewise-linear interpolant through the nodes, used wherever a value at
  /// off-grid phases must be consistent with the discrete Euler-Lagrange system.
  double interpolate(double theta) const {
    const double x = theta * static_cast<double>(size());
    const double k = std::floor(x);
    const double t = x - k;
    const auto ki = static_cast<long long>(k);
    if (t == 0.0) return at(ki);
    return (1.0 - t) * at(ki) + t * at(ki + 1);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> b(size());
    for (std::size_t k = 0; k < size(); ++k)
      b[k] = static_cast<double>(k) / static_cast<double>(size());
    return b;
  }

  HullFunction shifted(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x += c;
    return HullFunction(std::move(v));
  }

  friend bool operator==(const HullFunction&, const HullFunction&) = default;

 private:
  std::vector<double> values_;
};

inline double evaluate(const HullFunction& h, double theta) { return h(theta); }

/// True for hulls that are constant between consecutive breakpoints.
template <class H>
inline constexpr bool is_step_hull_v = false;

template <>
inline constexpr bool is_step_hull_v<HullFunction> = true;

/// theta + c + sum_k a_k sin(2 pi k theta) / (2 pi k); monotone when sum |a_k| < 1.
class SmoothHull {
 public:
  SmoothHull() = default;
  explicit SmoothHull(std::vector<double> coefficients, double offset = 0.0)
      : coeffs_(std::move(coefficients)), offset_(offset) {
    double total = 0.0;
    for (double a : coeffs_) total += std::abs(a);
    if (!(total < 1.0))
      throw error(errc::invalid_hull, "smooth hull needs sum |a_k| < 1 for monotonicity");
  }

  static SmoothHull identity() { return SmoothHull{}; }

  double operator()(double theta) const {
    double y = theta + offset_;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1);
      y += coeffs_[k] * std::sin(w * theta) / w;
    }
    return y;
  }

  double derivative(double theta) const {
    double s = 1.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1);
      s += coeffs_[k] * std::cos(w * theta);
    }
    return s;
  }

  std::vector<double> breakpoints() const { return {}; }

  std::span<const double> coefficients() const { return coeffs_; }
  double offset() const { return offset_; }

  /// Grid discretisation h[k] = h(k/N).
  HullFunction sample(std::size_t N) const {
    std::vector<double> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = (*this)(static_cast<double>(k) / static_cast<double>(N));
    return HullFunction(std::move(v));
  }

 private:
  std::vector<double> coeffs_;
  double offset_ = 0.0;
};

/// inf{theta in [lo, hi] : h(theta) >= y} for monotone h, by bisection.
template <class F>
double lower_preimage(const F& h, double y, double lo, double hi) {
  if (h(lo) >= y) return lo;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) >= y)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// sup{theta in [lo, hi] : h(theta) <= y} for monotone h.
template <class F>
double upper_preimage(const F& h, double y, double lo, double hi) {
  if (h(hi) <= y) return hi;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) <= y)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Largest increment between consecutive nodes (wrap included) beyond the 1/N
/// a continuous hull needs at this resolution, floored at zero.
inline double max_gap(const HullFunction& h) {
  const std::size_t N = h.size();
  double g = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double next = k + 1 < N ? h[k + 1] : h[0] + 1.0;
    g = std::max(g, next - h[k]);
  }
  return std::max(0.0, g - 1.0 / static_cast<double>(N));
}

inline bool is_continuous_at_resolution(const HullFunction& h, double kappa = default_gap_kappa) {
  return max_gap(h) <= kappa / static_cast<double>(h.size());
}

/// Random grid hull: node increments min_increment + (1 - N min_increment) * w_k
/// with w symmetric-Dirichlet(concentration) on the simplex, and h[0] uniform in
/// [0, 1). Small concentrations put the mass into a few large jumps.
template <class Rng>
HullFunction random_monotone_hull(std::size_t N, Rng& rng, double min_increment = 0.0,
                                  double concentration = 1.0) {
  const double dN = static_cast<double>(N);
  if (N == 0 || !(min_increment >= 0.0 && min_increment * dN < 1.0) || !(concentration > 0.0))
    throw error(errc::invalid_parameter,
                "random hull needs N >= 1, N * min_increment < 1 and a positive concentration");
  std::gamma_distribution<double> expo(concentration, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(N);
  double total = 0.0;
  for (double& x : w) total += (x = expo(rng));
  std::vector<double> v(N);
  v[0] = unit(rng);
  for (std::size_t k = 1; k < N; ++k) v[k] = v[k - 1] + min_increment + (1.0 - min_increment * dN) * w[k - 1] / total;
  // Rounding in the cumulative sum must not break the wrap constraint.
  for (std::size_t k = 1; k < N; ++k) v[k] = std::min(v[k], v[0] + 1.0);
  return HullFunction(std::move(v));
}

/// Shifts by an integer so that h[0] lies in [0, 1).
inline HullFunction normalize_gauge(const HullFunction& h) {
  const double m = std::floor(h[0]);
  if (m == 0.0) return h;
  return h.shifted(-m);
}

namespace detail {

// Linear isotonic regression (pool adjacent violators), in place.
inline void pool_adjacent_violators(std::vector<double>& y) {
  struct block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<block> blocks;
  blocks.reserve(y.size());
  for (double x : y) {
    blocks.push_back({x, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const block b = blocks.back();
      blocks.pop_back();
      blocks.back().sum += b.sum;
      blocks.back().count += b.count;
    }
  }
  std::size_t k = 0;
  for (const auto& b : blocks) {
    const double m = b.mean();
    for (std::size_t i = 0; i < b.count; ++i) y[k++] = m;
  }
}

inline bool is_feasible(std::span<const double> y) {
  for (std::size_t k = 0; k + 1 < y.size(); ++k)
    if (!(y[k] <= y[k + 1])) return false;
  return y.back() <= y.front() + 1.0;
}

}  // namespace detail

/// Euclidean projection onto {h[0] <= ... <= h[N-1] <= h[0] + 1}.
///
/// The cyclic increments sum to one, so at least one constraint is slack at
/// the optimum; cutting the cycle there leaves an ordinary isotonic problem
/// whose solution is the projection. Cuts are tried in order of decreasing
/// raw increment and the first solution satisfying the wrap is returned.
inline HullFunction project_monotone(std::span<const double> raw) {
  const std::size_t N = raw.size();
  if (N == 0) throw error(errc::invalid_hull, "cannot project an empty vector");
  for (double x : raw)
    if (!std::isfinite(x)) throw error(errc::invalid_hull, "cannot project non-finite values");
  if (detail::is_feasible(raw)) return HullFunction(std::vector<double>(raw.begin(), raw.end()));

  std::vector<std::size_t> cuts(N);
  std::vector<double> increment(N);
  for (std::size_t c = 0; c < N; ++c) {
    cuts[c] = c;
    increment[c] = c == 0 ? raw[0] + 1.0 - raw[N - 1] : raw[c] - raw[c - 1];
  }
  std::stable_sort(cuts.begin(), cuts.end(),
                   [&](std::size_t a, std::size_t b) { return increment[a] > increment[b]; });

  std::vector<double> z(N);
  for (std::size_t c : cuts) {
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t k = c + i;
      z[i] = k < N ? raw[k] : raw[k - N] + 1.0;
    }
    detail::pool_adjacent_violators(z);
    if (!(z[N - 1] <= z[0] + 1.0)) continue;

    std::vector<double> h(N);
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t k = c + i;
      if (k < N)
        h[k] = z[i];
      else
        h[k - N] = z[i] - 1.0;
    }
    // Subtracting the lift can move a value by an ulp; restore exact order.
    for (std::size_t k = 1; k < N; ++k) h[k] = std::max(h[k], h[k - 1]);
    for (std::size_t k = 1; k < N; ++k) h[k] = std::min(h[k], h[0] + 1.0);
    return HullFunction(std::move(h));
  }
  throw error(errc::invalid_hull, "monotone projection found no feasible cut");
}

inline HullFunction project_monotone(const std::vector<double>& raw) {
  return project_monotone(std::span<const double>(raw));
}

namespace detail {

struct segment {
  double x0, y0, x1, y1;
};

inline double point_segment_distance(double px, double py, const segment& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - s.x0) * dx + (py - s.y0) * dy) / len2, 0.0, 1.0);
  const double ex = s.x0 + t * dx - px;
  const double ey = s.y0 + t * dy - py;
  return std::hypot(ex, ey);
}

// Completed graph over theta in [0, 1]: plateaus on ((k-1)/N, k/N] and the
// vertical segment [h(k/N), h(k/N+)] at every node.
inline std::vector<segment> completed_graph(const HullFunction& h, double shift = 0.0) {
  const std::size_t N = h.size();
  const double dN = static_cast<double>(N);
  std::vector<segment> s;
  s.reserve(2 * N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const double th = static_cast<double>(k) / dN;
    const double lo = h.at(static_cast<long long>(k));
    const double hi = h.at(static_cast<long long>(k) + 1);
    if (k < N) s.push_back({th + shift, lo + shift, th + shift, hi + shift});
    if (k + 1 <= N) {
      const double th1 = static_cast<double>(k + 1) / dN;
      s.push_back({th + shift, hi + shift, th1 + shift, hi + shift});
    }
  }
  return s;
}

inline double directed_hausdorff(const HullFunction& a, const HullFunction& b, double spacing) {
  const auto ga = completed_graph(a);
  const double a_lo = a[0], a_hi = a[0] + 1.0;
  const double b_lo = b[0], b_hi = b[0] + 1.0;
  const auto m_lo = static_cast<long long>(std::floor(a_lo - b_hi)) - 1;
  const auto m_hi = static_cast<long long>(std::ceil(a_hi - b_lo)) + 1;
  std::vector<segment> gb;
  for (long long m = m_lo; m <= m_hi; ++m) {
    const auto copy = completed_graph(b, static_cast<double>(m));
    gb.insert(gb.end(), copy.begin(), copy.end());
  }

  double worst = 0.0;
  auto probe = [&](double px, double py) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : gb) {
      best = std::min(best, point_segment_distance(px, py, s));
      if (best <= worst) return;
    }
    worst = std::max(worst, best);
  };
  for (const auto& s : ga) {
    const double len = std::hypot(s.x1 - s.x0, s.y1 - s.y0);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
    for (std::size_t p = 0; p <= pieces; ++p) {
      const double t = static_cast<double>(p) / static_cast<double>(pieces);
      probe(s.x0 + t * (s.x1 - s.x0), s.y0 + t * (s.y1 - s.y0));
    }
  }
  return worst;
}

}  // namespace detail

/// Hausdorff distance between the completed graphs. Each segment of one graph
/// is probed at spacing 1/(4 max N), so the result is exact up to that spacing.
inline double graph_distance(const HullFunction& h1, const HullFunction& h2) {
  const double spacing = 0.25 / static_cast<double>(std::max(h1.size(), h2.size()));
  return std::max(detail::directed_hausdorff(h1, h2, spacing),
                  detail::directed_hausdorff(h2, h1, spacing));
}

/// sup over nodes outside [A, B] of |h(theta) - theta - c| with the best phase c.
/// B may exceed 1 when the excluded interval wraps.
inline double sup_deviation_from_identity(const HullFunction& h, double A, double B) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const double dN = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double th = static_cast<double>(k) / dN;
    if ((th >= A && th <= B) || (th + 1.0 >= A && th + 1.0 <= B)) continue;
    const double e = h[k] - th;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (!(hi >= lo)) return 0.0;
  return 0.5 * (hi - lo);
}

inline double sup_deviation_from_identity(const HullFunction& h) {
  return sup_deviation_from_identity(h, 1.0, 0.0);
}

inline void write_hull_csv(std::ostream& os, const HullFunction& h) {
  const auto old = os.precision(17);
  os << "k,theta,h\n";
  const double dN = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k)
    os << k << ',' << static_cast<double>(k) / dN << ',' << h[k] << '\n';
  os.precision(old);
}

/// Reads the format of write_hull_csv. Rows must be k = 0, 1, ... in order.
inline HullFunction read_hull_csv(std::istream& is) {
  std::string line;
  std::size_t row = 0;
  do {
    if (!std::getline(is, line)) throw error(errc::invalid_hull, "empty hull CSV");
    ++row;
  } while (!line.empty() && line[0] == '#');
  std::vector<double> values;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string k, theta, h;
    if (!std::getline(ss, k, ',') || !std::getline(ss, theta, ',') || !std::getline(ss, h))
      throw error(errc::invalid_hull, "row " + std::to_string(row) + ": expected k,theta,h");
    try {
      if (std::stoull(k) != values.size())
        throw error(errc::invalid_hull, "row " + std::to_string(row) + ": node index out of order");
      values.push_back(std::stod(h));
    } catch (const std::logic_error&) {
      throw error(errc::invalid_hull, "row " + std::to_string(row) + ": unparsable number");
    }
    if (values.size() > 1 && values[values.size() - 2] > values.back())
      throw error(errc::invalid_hull, "row " + std::to_string(row) +
                                          ": hull values decrease (monotonicity violated)");
  }
  return HullFunction(std::move(values));
}

}  // namespace fkhull
