#pragma once

// Drivers behind the command-line subcommands. Each returns plain records; the
// writers emit CSV/JSON with a config-hash comment line so every result file
// is traceable to the configuration that produced it.

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fkhull/config.hpp"
#include "fkhull/criterion.hpp"
#include "fkhull/hull.hpp"
#include "fkhull/lattice.hpp"
#include "fkhull/model.hpp"
#include "fkhull/percival.hpp"

namespace fkhull {

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = std::min(x.size(), y.size());
  if (m < 2) throw error(errc::invalid_parameter, "slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dm = static_cast<double>(m);
  return (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
}

/// Runs `count` independent tasks on up to `jobs` threads; task i writes slot i.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------- minimize

struct MinimizeCase {
  long n = 0;
  double r = 0.0;
  Potential potential;
  MinimizeResult result;
  double gap = 0.0;
  bool resolved = true;  // grid_N * R >= 4, so a gap of size R is visible
};

inline MinimizeCase minimize_case(const SweepConfig& cfg, long n, double r) {
  MinimizeCase c;
  c.n = n;
  c.r = r;
  c.potential = cfg.potential(n, r);
  const Model model = Model::uniform(cfg.d, c.potential);
  MinimizeParams params = cfg.minimize_params;
  params.seed ^= cfg.seed;
  c.result = minimize_percival(cfg.rotation(), model, HullFunction::identity(cfg.grid_N), params);
  c.gap = max_gap(c.result.minimizer);
  c.resolved = !c.potential.is_bump() || static_cast<double>(cfg.grid_N) * c.potential.R >= 4.0;
  return c;
}

inline std::vector<MinimizeCase> run_minimize(const SweepConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  const auto cases = cfg.cases();
  std::vector<MinimizeCase> out(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    out[i] = minimize_case(cfg, cases[i].first, cases[i].second);
  });
  return out;
}

inline nlohmann::json to_json(const MinimizeCase& c) {
  return {{"potential", to_json(c.potential)},
          {"objective", c.result.objective},
          {"el_residual_sup", c.result.el_residual_sup},
          {"el_residual_excluded_nodes", c.result.residual_excluded},
          {"iterations", c.result.iterations},
          {"converged", c.result.converged},
          {"stalled", c.result.stalled},
          {"projected_gradient", c.result.projected_gradient},
          {"gap", c.gap},
          {"resolved", c.resolved}};
}

// ------------------------------------------------------------------- sweep

struct SweepRow {
  long n = 0;
  double r = 0.0;
  std::size_t j = 0;
  std::vector<double> holder_norm_per_alpha;
  double percival_min = std::numeric_limits<double>::quiet_NaN();
  double minimizer_gap = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  double margin_factor2 = std::numeric_limits<double>::quiet_NaN();
  bool destroys = false;
  double el_residual_sup = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
  std::string error;
};

/// One (n, r) case: Hoelder norms, Percival minimiser on the grid (skipped
/// with a recorded error when the grid cannot resolve the support), and the
/// destruction margins of the competitor built from the identity hull.
inline std::vector<SweepRow> sweep_case(const SweepConfig& cfg, long n, double r) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SweepRow> rows(cfg.d);
  std::string err;
  std::vector<double> holder;
  std::optional<MinimizeCase> mc;
  Potential v;
  try {
    v = cfg.potential(n, r);
    for (double a : cfg.holder_alphas) holder.push_back(holder_norm(v, a, cfg.holder_grid));
    if (v.is_bump() && static_cast<double>(cfg.grid_N) * v.R < 4.0)
      err = "minimisation skipped: grid_N * R < 4";
    else
      mc = minimize_case(cfg, n, r);
  } catch (const std::exception& e) {
    err = e.what();
  }
  const Model model = Model::uniform(cfg.d, v);
  for (std::size_t j = 0; j < cfg.d; ++j) {
    SweepRow& row = rows[j];
    row.n = n;
    row.r = r;
    row.j = j;
    row.holder_norm_per_alpha = holder;
    row.error = err;
    if (mc) {
      row.percival_min = mc->result.objective;
      row.minimizer_gap = mc->gap;
      row.el_residual_sup = mc->result.el_residual_sup;
    }
    try {
      const Potential& vj = model.potential(j);
      if (vj.is_bump()) {
        const auto id = SmoothHull::identity();
        const auto [h2, spec] = construct_competitor(id, vj);
        const auto rep = destruction_margin(id, h2, vj, j);
        row.margin = rep.margin;
        row.margin_factor2 = rep.margin_factor2;
        row.destroys = rep.destroys;
      }
    } catch (const std::exception& e) {
      row.error += (row.error.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& row : rows) row.wall_time = dt;
  return rows;
}

/// Rows ordered by (n, r, j) whatever the completion order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  auto cases = cfg.cases();
  std::sort(cases.begin(), cases.end());
  std::vector<std::vector<SweepRow>> parts(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    parts[i] = sweep_case(cfg, cases[i].first, cases[i].second);
  });
  std::vector<SweepRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Leading comment lines: the config hash, then the (non-deterministic) timestamp.
inline void write_provenance(std::ostream& os, const SweepConfig& cfg) {
  os << "# config_hash=" << config_hash(cfg) << "\n";
  os << "# generated=" << utc_timestamp() << "\n";
}

namespace detail {
inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}
}  // namespace detail

inline void write_sweep_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
  write_provenance(os, cfg);
  os << "n,r,j,holder_norm_per_alpha,percival_min,minimizer_gap,margin,margin_factor2,destroys,"
        "el_residual_sup,wall_time,error\n";
  const auto old = os.precision(17);
  for (const auto& row : rows) {
    os << row.n << ',' << row.r << ',' << row.j + 1 << ',';
    for (std::size_t a = 0; a < row.holder_norm_per_alpha.size(); ++a)
      os << (a ? ";" : "") << row.holder_norm_per_alpha[a];
    os << ',' << row.percival_min << ',' << row.minimizer_gap << ',' << row.margin << ','
       << row.margin_factor2 << ',' << (row.destroys ? "true" : "false") << ',' << row.el_residual_sup
       << ',' << row.wall_time << ',' << detail::csv_field(row.error) << '\n';
  }
  os.precision(old);
}

// --------------------------------------------------------------- criterion

struct CriterionSummary {
  double r = 0.0;
  double potential_slope = 0.0;  // fitted d log(lhs) / d log(n)
  double distance_slope = 0.0;   // fitted d log(rhs) / d log(n)
  ScalingExponents predicted;
  std::optional<long> threshold;  // smallest n from which every larger n destroys
  std::vector<CriterionReport> reports;
};

/// Competitor of the identity hull for every (n, r) and direction j, with
/// log-log slope fits per r.
inline std::vector<CriterionSummary> run_criterion(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.integrable()) throw error(errc::invalid_config, "field 'potential.profile_id': criterion needs the mollifier bump");
  std::vector<CriterionSummary> out;
  auto ns = cfg.n_values;
  std::sort(ns.begin(), ns.end());
  const auto id = SmoothHull::identity();
  for (double r : cfg.r_values) {
    CriterionSummary s;
    s.r = r;
    s.predicted = scaling_exponents(r);
    std::vector<double> xs, lhs, rhs;
    std::vector<bool> destroys;
    for (long n : ns) {
      const Potential v = cfg.potential(n, r);
      const auto [h2, spec] = construct_competitor(id, v);
      const auto rep = destruction_margin(id, h2, v);
      xs.push_back(static_cast<double>(n));
      lhs.push_back(rep.lhs);
      rhs.push_back(rep.rhs);
      destroys.push_back(rep.destroys);
      for (std::size_t j = 0; j < cfg.d; ++j) {
        CriterionReport rj = rep;
        rj.j = j;
        s.reports.push_back(rj);
      }
    }
    if (xs.size() >= 2) {
      s.potential_slope = loglog_slope(xs, lhs);
      s.distance_slope = loglog_slope(xs, rhs);
    }
    for (std::size_t k = ns.size(); k-- > 0;) {
      if (!destroys[k]) break;
      s.threshold = ns[k];
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_criterion_csv(std::ostream& os, const SweepConfig& cfg,
                                const std::vector<CriterionSummary>& summaries) {
  write_provenance(os, cfg);
  write_criterion_csv_header(os);
  for (const auto& s : summaries)
    for (const auto& rep : s.reports) write_criterion_csv_row(os, rep);
}

/// Survey of the seeded continuous family against the competitor construction.
struct SurveyRow {
  std::size_t member = 0;
  SurveyEntry entry;
};

inline std::vector<SurveyRow> run_survey(const SweepConfig& cfg, long n, double r) {
  const Model model = cfg.model(n, r);
  const auto family = smooth_hull_family(cfg.family_size, cfg.seed);
  std::vector<SurveyRow> rows;
  SurveyOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.deviation_grid = cfg.grid_N;
  for (std::size_t j = 0; j < cfg.d; ++j) {
    const auto entries = necessary_condition_survey(model, family, j, opt);
    for (std::size_t m = 0; m < entries.size(); ++m) rows.push_back({m, entries[m]});
  }
  return rows;
}

inline void write_survey_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SurveyRow>& rows) {
  write_provenance(os, cfg);
  os << "member,j,n,r,lhs,rhs,margin,margin_factor2,destroys,sup_deviation,outside_regime\n";
  const auto old = os.precision(17);
  for (const auto& row : rows) {
    const auto& rep = row.entry.report;
    os << row.member << ',' << rep.j + 1 << ',' << rep.n << ',' << rep.r << ',' << rep.lhs << ','
       << rep.rhs << ',' << rep.margin << ',' << rep.margin_factor2 << ','
       << (rep.destroys ? "true" : "false") << ',' << row.entry.sup_deviation << ','
       << (row.entry.outside_regime ? "true" : "false") << '\n';
  }
  os.precision(old);
}

// ----------------------------------------------------------- lattice check

struct LatticeCheckReport {
  long n = 0;
  double r = 0.0;
  MinimizeCase hull;
  Configuration configuration;
  double residual_sup = 0.0;     // lattice residual over interior sites
  double consistency_sup = 0.0;  // |lattice residual - hull residual at the site phase|
  ClassAReport class_a;
};

inline LatticeCheckReport lattice_check_case(const SweepConfig& cfg, long n, double r) {
  LatticeCheckReport rep;
  rep.n = n;
  rep.r = r;
  rep.hull = minimize_case(cfg, n, r);
  const Model model = Model::uniform(cfg.d, rep.hull.potential);
  const RotationVector omega = cfg.rotation();
  const Box box{cfg.d, cfg.box_radius};
  rep.configuration = configuration_from_hull(rep.hull.result.minimizer, omega, box);
  const SiteField res = lattice_el_residual(rep.configuration, model);
  rep.residual_sup = res.sup_abs();
  const Box inner{res.d, res.radius};
  for (std::size_t f = 0; f < res.values.size(); ++f) {
    const auto i = inner.site(f);
    double phase = 0.0;
    for (std::size_t k = 0; k < cfg.d; ++k) phase += omega[k] * static_cast<double>(i[k]);
    const double hull_res = el_residual(rep.hull.result.minimizer, omega, model, phase);
    rep.consistency_sup = std::max(rep.consistency_sup, std::abs(res.values[f] - hull_res));
  }
  ClassACheckOptions opt;
  opt.trials = cfg.class_a_trials;
  opt.seed = cfg.seed;
  opt.amplitude = cfg.class_a_amplitude;
  rep.class_a = sampled_class_a_check(rep.configuration, model, opt);
  return rep;
}

inline std::vector<LatticeCheckReport> run_lattice_check(const SweepConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  const auto cases = cfg.cases();
  std::vector<LatticeCheckReport> out(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    out[i] = lattice_check_case(cfg, cases[i].first, cases[i].second);
  });
  return out;
}

inline nlohmann::json to_json(const LatticeCheckReport& rep) {
  return {{"potential", to_json(rep.hull.potential)},
          {"box_radius", rep.configuration.box.radius},
          {"lattice_residual_sup", rep.residual_sup},
          {"hull_lattice_consistency_sup", rep.consistency_sup},
          {"class_a_trials", rep.class_a.trials},
          {"class_a_violations", rep.class_a.violations},
          {"class_a_min_delta", rep.class_a.min_delta},
          {"class_a_amplitude", rep.class_a.amplitude},
          {"hull", to_json(rep.hull)}};
}

inline std::string case_stem(const char* prefix, long n, double r, bool integrable) {
  if (integrable) return prefix;
  std::ostringstream os;
  os << prefix << "_n" << n << "_r" << r;
  return os.str();
}

}  // namespace fkhull
