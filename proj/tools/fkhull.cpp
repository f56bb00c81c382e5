// fkhull command-line driver. Exit codes: 0 success, 1 invalid configuration
// or arguments, 2 failure while running.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fkhull/fkhull.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fkhull;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid;
};

void add_common_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "Configuration file (JSON, comments allowed)");
  sub->add_option("--out", o.out, "Output directory (overrides output_path)");
  sub->add_option("--jobs", o.jobs, "Worker threads (default: available parallelism)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "Random seed (overrides seed)");
  sub->add_option("--grid", o.grid, "Grid size N (overrides grid_N)");
}

// Flags override file values, which override defaults.
SweepConfig resolve(const Overrides& o) {
  SweepConfig cfg = o.config_path.empty() ? SweepConfig{} : load_config(o.config_path);
  if (o.out) cfg.output_path = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.grid) cfg.grid_N = *o.grid;
  cfg.validate();
  return cfg;
}

fs::path prepare_output(const SweepConfig& cfg) {
  const fs::path dir(cfg.output_path);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

void write_json(const fs::path& path, const SweepConfig& cfg, nlohmann::json body) {
  body["config_hash"] = config_hash(cfg);
  auto os = open_output(path);
  os << body.dump(2) << "\n";
}

int cmd_minimize(const SweepConfig& cfg, unsigned jobs) {
  const auto dir = prepare_output(cfg);
  for (const auto& c : run_minimize(cfg, jobs)) {
    const auto stem = case_stem("minimize", c.n, c.r, cfg.integrable());
    {
      auto os = open_output(dir / (stem + "_hull.csv"));
      write_provenance(os, cfg);
      write_hull_csv(os, c.result.minimizer);
    }
    write_json(dir / (stem + "_result.json"), cfg, to_json(c));
    std::cout << stem << ": objective " << c.result.objective << ", gap " << c.gap << ", iterations "
              << c.result.iterations << (c.result.converged ? ", converged" : ", not converged") << "\n";
  }
  return 0;
}

int cmd_sweep(const SweepConfig& cfg, unsigned jobs) {
  const auto dir = prepare_output(cfg);
  const auto rows = run_sweep(cfg, jobs);
  auto os = open_output(dir / "sweep.csv");
  write_sweep_csv(os, cfg, rows);
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.error.empty() ? 0 : 1;
  std::cout << "sweep: " << rows.size() << " rows (" << failed << " with errors) -> "
            << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_criterion(const SweepConfig& cfg) {
  const auto dir = prepare_output(cfg);
  const auto summaries = run_criterion(cfg);
  {
    auto os = open_output(dir / "criterion.csv");
    write_criterion_csv(os, cfg, summaries);
  }
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& s : summaries) {
    fits.push_back({{"r", s.r},
                    {"potential_slope", s.potential_slope},
                    {"distance_slope", s.distance_slope},
                    {"predicted_potential_slope", -s.predicted.potential_exp},
                    {"predicted_distance_slope", -s.predicted.distance_exp},
                    {"destroys_asymptotically", s.predicted.destroys_asymptotically},
                    {"threshold_n", s.threshold ? nlohmann::json(*s.threshold) : nlohmann::json(nullptr)}});
    std::cout << "r = " << s.r << ": slopes " << s.potential_slope << ", " << s.distance_slope
              << "; threshold n = " << (s.threshold ? std::to_string(*s.threshold) : std::string("none"))
              << "\n";
  }
  write_json(dir / "criterion_fits.json", cfg, {{"fits", fits}});
  {
    const auto [n, r] = cfg.cases().front();
    auto os = open_output(dir / "survey.csv");
    write_survey_csv(os, cfg, run_survey(cfg, n, r));
  }
  return 0;
}

int cmd_lattice(const SweepConfig& cfg, unsigned jobs) {
  const auto dir = prepare_output(cfg);
  for (const auto& rep : run_lattice_check(cfg, jobs)) {
    const auto stem = case_stem("lattice", rep.n, rep.r, cfg.integrable());
    write_json(dir / (stem + "_report.json"), cfg, to_json(rep));
    auto os = open_output(dir / (stem + "_configuration.csv"));
    write_provenance(os, cfg);
    write_configuration_csv(os, rep.configuration);
    std::cout << stem << ": lattice residual " << rep.residual_sup << ", hull mismatch "
              << rep.consistency_sup << ", class-A violations " << rep.class_a.violations << "/"
              << rep.class_a.trials << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percival-Lagrangian hulls and torus destruction for generalized Frenkel-Kontorova models"};
  app.require_subcommand(1);
  Overrides o;
  auto* minimize = app.add_subcommand("minimize", "Minimise the Percival Lagrangian for each (n, r) case");
  auto* sweep = app.add_subcommand("sweep", "Hoelder norms, minimisers and margins over the (n, r) grid");
  auto* criterion = app.add_subcommand("criterion", "Destruction margins, exponent fits and family survey");
  auto* lattice = app.add_subcommand("lattice-check", "Lattice residual and sampled ground-state check");
  auto* accept = app.add_subcommand("accept", "Run the acceptance checks");
  for (auto* sub : {minimize, sweep, criterion, lattice}) add_common_flags(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (accept->parsed()) return acceptance::run_all(std::cout) == 0 ? 0 : 2;

  SweepConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }
  const unsigned jobs = o.jobs.value_or(default_jobs());

  try {
    if (minimize->parsed()) return cmd_minimize(cfg, jobs);
    if (sweep->parsed()) return cmd_sweep(cfg, jobs);
    if (criterion->parsed()) return cmd_criterion(cfg);
    if (lattice->parsed()) return cmd_lattice(cfg, jobs);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == errc::invalid_config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
