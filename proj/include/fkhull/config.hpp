#pragma once

// Experiment configuration: a JSON document (comments allowed) with nested
// sections. Unknown keys and malformed values are rejected with the field path;
// syntax errors carry the parser's line and column.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fkhull/error.hpp"
#include "fkhull/model.hpp"
#include "fkhull/percival.hpp"

namespace fkhull {

struct SweepConfig {
  std::size_t d = 2;
  std::vector<double> omega = default_rotation(2).components;
  std::size_t grid_N = 4096;
  std::uint64_t seed = 0;
  std::string output_path = "fkhull_out";

  std::string profile_id = "mollifier";
  double x0 = 0.5;
  double constant_value = 0.0;

  std::vector<double> r_values{0.5};
  std::vector<long> n_values{16};
  std::vector<double> holder_alphas{0.4, 0.6};
  std::size_t holder_grid = 4096;

  MinimizeParams minimize_params{};

  long box_radius = 16;
  long class_a_trials = 1000;
  double class_a_amplitude = 0.0;

  std::size_t family_size = 6;
  double epsilon = 0.1;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;

  bool integrable() const { return profile_id != "mollifier"; }

  Potential potential(long n, double r) const {
    switch (parse_profile_id(profile_id)) {
      case profile_kind::mollifier: return make_bump_potential(n, r, x0);
      case profile_kind::constant: return make_constant_potential(constant_value);
      case profile_kind::zero: return make_zero_potential();
    }
    return make_zero_potential();
  }

  Model model(long n, double r) const { return Model::uniform(d, potential(n, r)); }
  RotationVector rotation() const { return RotationVector(omega); }

  /// (n, r) cases to run; flat profiles have a single case.
  std::vector<std::pair<long, double>> cases() const {
    std::vector<std::pair<long, double>> c;
    if (integrable()) return {{n_values.front(), r_values.front()}};
    for (double r : r_values)
      for (long n : n_values) c.emplace_back(n, r);
    return c;
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
      throw error(errc::invalid_config, "field '" + field + "': " + msg);
    };
    if (d == 0) fail("d", "must be positive");
    if (omega.size() != d) fail("omega", "needs exactly d = " + std::to_string(d) + " components");
    for (std::size_t j = 0; j < omega.size(); ++j)
      if (!(omega[j] > 0.0 && omega[j] < 1.0))
        fail("omega[" + std::to_string(j) + "]", "must lie in (0, 1)");
    if (grid_N < 2) fail("grid_N", "must be >= 2");
    try {
      (void)parse_profile_id(profile_id);
    } catch (const error&) {
      fail("potential.profile_id", "unknown profile '" + profile_id + "'");
    }
    if (!(x0 >= 0.0 && x0 < 1.0)) fail("potential.x0", "must lie in [0, 1)");
    if (!(constant_value >= 0.0)) fail("potential.value", "must be non-negative");
    if (r_values.empty()) fail("sweep.r_values", "must not be empty");
    if (n_values.empty()) fail("sweep.n_values", "must not be empty");
    if (holder_alphas.empty()) fail("sweep.holder_alphas", "must not be empty");
    for (std::size_t k = 0; k < r_values.size(); ++k)
      if (!(r_values[k] > 0.0)) fail("sweep.r_values[" + std::to_string(k) + "]", "must be positive");
    for (std::size_t k = 0; k < n_values.size(); ++k)
      if (n_values[k] < 1) fail("sweep.n_values[" + std::to_string(k) + "]", "must be >= 1");
    for (std::size_t k = 0; k < holder_alphas.size(); ++k)
      if (!(holder_alphas[k] > 0.0 && holder_alphas[k] < 1.0))
        fail("sweep.holder_alphas[" + std::to_string(k) + "]", "must lie in (0, 1)");
    if (holder_grid < 2) fail("sweep.holder_grid", "must be >= 2");
    if (profile_id == "mollifier")
      for (double r : r_values)
        for (long n : n_values)
          if (!(std::pow(static_cast<double>(n), -1.0 / r) < 0.5)) {
            std::ostringstream os;
            os << "pair (n=" << n << ", r=" << r << ") has support radius n^(-1/r) >= 1/2";
            fail("sweep", os.str());
          }
    try {
      minimize_params.validate();
    } catch (const error& e) {
      fail("minimize", e.what());
    }
    if (box_radius < 2) fail("lattice.box_radius", "must be >= 2");
    if (class_a_trials < 1) fail("lattice.trials", "must be >= 1");
    if (!(class_a_amplitude >= 0.0)) fail("lattice.amplitude", "must be non-negative (0 selects 2R)");
    if (family_size < 1) fail("survey.family_size", "must be >= 1");
    if (!(epsilon > 0.0)) fail("survey.epsilon", "must be positive");
  }
};

inline nlohmann::json to_json(const Potential& v) {
  return {{"n", v.n}, {"r", v.r}, {"x0", v.x0}, {"profile_id", std::string(profile_id(v.profile))}};
}

inline nlohmann::json to_json(const SweepConfig& c) {
  const auto& m = c.minimize_params;
  return {
      {"d", c.d},
      {"omega", c.omega},
      {"grid_N", c.grid_N},
      {"seed", c.seed},
      {"output_path", c.output_path},
      {"potential", {{"profile_id", c.profile_id}, {"x0", c.x0}, {"value", c.constant_value}}},
      {"sweep",
       {{"r_values", c.r_values},
        {"n_values", c.n_values},
        {"holder_alphas", c.holder_alphas},
        {"holder_grid", c.holder_grid}}},
      {"minimize",
       {{"max_iters", m.max_iters},
        {"step_size", m.step_size},
        {"tol_grad", m.tol_grad},
        {"tol_obj", m.tol_obj},
        {"seed", m.seed},
        {"restarts", m.restarts},
        {"restart_amplitude", m.restart_amplitude},
        {"stall_window", m.stall_window}}},
      {"lattice",
       {{"box_radius", c.box_radius}, {"trials", c.class_a_trials}, {"amplitude", c.class_a_amplitude}}},
      {"survey", {{"family_size", c.family_size}, {"epsilon", c.epsilon}}},
  };
}

namespace detail {

class config_reader {
 public:
  explicit config_reader(const nlohmann::json& root) : root_(root) {}

  template <class T>
  void read(const nlohmann::json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const auto& node = obj.at(key);
    const std::string field = path.empty() ? key : path + "." + key;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!node.is_string()) throw std::invalid_argument("expected a string");
        out = node.get<std::string>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!node.is_number()) throw std::invalid_argument("expected a number");
        out = node.get<double>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!node.is_number_integer()) throw std::invalid_argument("expected an integer");
        if (std::is_unsigned_v<T> && !node.is_number_unsigned())
          throw std::invalid_argument("expected a non-negative integer");
        out = node.get<T>();
      } else {
        using E = typename T::value_type;
        if (!node.is_array()) throw std::invalid_argument("expected an array");
        T v;
        for (std::size_t k = 0; k < node.size(); ++k) {
          const auto& x = node[k];
          if constexpr (std::is_same_v<E, double>) {
            if (!x.is_number())
              throw std::invalid_argument("element [" + std::to_string(k) + "] is not a number");
          } else {
            if (!x.is_number_integer())
              throw std::invalid_argument("element [" + std::to_string(k) + "] is not an integer");
          }
          v.push_back(x.get<E>());
        }
        out = std::move(v);
      }
    } catch (const std::exception& e) {
      throw error(errc::invalid_config, "field '" + field + "': " + e.what());
    }
  }

  static void reject_unknown(const nlohmann::json& obj, const std::string& path,
                             std::initializer_list<const char*> known) {
    if (!obj.is_object())
      throw error(errc::invalid_config, "field '" + (path.empty() ? std::string("<root>") : path) +
                                            "': expected an object");
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok)
        throw error(errc::invalid_config,
                    "unknown field '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }

  const nlohmann::json& section(const char* key) {
    static const nlohmann::json empty = nlohmann::json::object();
    return root_.contains(key) ? root_.at(key) : empty;
  }

 private:
  const nlohmann::json& root_;
};

}  // namespace detail

/// Parses a configuration document on top of the defaults and validates it.
inline SweepConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::invalid_config, std::string("syntax error: ") + e.what());
  }
  using R = detail::config_reader;
  R::reject_unknown(root, "", {"d", "omega", "grid_N", "seed", "output_path", "potential", "sweep",
                               "minimize", "lattice", "survey"});
  R in(root);
  SweepConfig c;
  in.read(root, "", "d", c.d);
  if (!root.contains("omega")) c.omega = default_rotation(std::max<std::size_t>(c.d, 1)).components;
  in.read(root, "", "omega", c.omega);
  in.read(root, "", "grid_N", c.grid_N);
  in.read(root, "", "seed", c.seed);
  in.read(root, "", "output_path", c.output_path);

  const auto& pot = in.section("potential");
  R::reject_unknown(pot, "potential", {"profile_id", "x0", "value"});
  in.read(pot, "potential", "profile_id", c.profile_id);
  in.read(pot, "potential", "x0", c.x0);
  in.read(pot, "potential", "value", c.constant_value);

  const auto& sw = in.section("sweep");
  R::reject_unknown(sw, "sweep", {"r_values", "n_values", "holder_alphas", "holder_grid"});
  in.read(sw, "sweep", "r_values", c.r_values);
  in.read(sw, "sweep", "n_values", c.n_values);
  in.read(sw, "sweep", "holder_alphas", c.holder_alphas);
  in.read(sw, "sweep", "holder_grid", c.holder_grid);

  const auto& mn = in.section("minimize");
  R::reject_unknown(mn, "minimize", {"max_iters", "step_size", "tol_grad", "tol_obj", "seed",
                                     "restarts", "restart_amplitude", "stall_window"});
  auto& m = c.minimize_params;
  in.read(mn, "minimize", "max_iters", m.max_iters);
  in.read(mn, "minimize", "step_size", m.step_size);
  in.read(mn, "minimize", "tol_grad", m.tol_grad);
  in.read(mn, "minimize", "tol_obj", m.tol_obj);
  in.read(mn, "minimize", "seed", m.seed);
  in.read(mn, "minimize", "restarts", m.restarts);
  in.read(mn, "minimize", "restart_amplitude", m.restart_amplitude);
  in.read(mn, "minimize", "stall_window", m.stall_window);

  const auto& lat = in.section("lattice");
  R::reject_unknown(lat, "lattice", {"box_radius", "trials", "amplitude"});
  in.read(lat, "lattice", "box_radius", c.box_radius);
  in.read(lat, "lattice", "trials", c.class_a_trials);
  in.read(lat, "lattice", "amplitude", c.class_a_amplitude);

  const auto& sv = in.section("survey");
  R::reject_unknown(sv, "survey", {"family_size", "epsilon"});
  in.read(sv, "survey", "family_size", c.family_size);
  in.read(sv, "survey", "epsilon", c.epsilon);

  c.validate();
  return c;
}

inline std::string serialize_config(const SweepConfig& c) { return to_json(c).dump(2) + "\n"; }

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// FNV-1a over the canonical serialisation without output_path; stamps every result file.
inline std::string config_hash(const SweepConfig& c) {
  auto j = to_json(c);
  j.erase("output_path");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace fkhull
