#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "sfem/sfem.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

int report(sfem_status status) {
  if (status == SFEM_OK) return 0;
  std::cerr << "sfem: " << sfem_status_name(status) << ": " << sfem_last_error() << '\n';
  return sfem_status_is_abort(status) ? kExitAbort : kExitUsage;
}

std::vector<int> level_range(int min_level, int max_level) {
  std::vector<int> levels;
  for (int l = min_level; l <= max_level; ++l) levels.push_back(l);
  return levels;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive heat equation solver on closed surfaces"};
  app.require_subcommand(1);

  std::string problem = "sphere-decay";
  std::string out;
  double t_end = 1.0;

  auto* conv = app.add_subcommand("convergence", "uniform mesh and time step sweep");
  int conv_levels = 5;
  int conv_min_level = 2;
  std::vector<double> taus;
  conv->add_option("--problem", problem, "problem name")->capture_default_str();
  conv->add_option("--levels", conv_levels, "finest mesh level")->required()->check(CLI::Range(0, 9));
  conv->add_option("--min-level", conv_min_level, "coarsest mesh level")
      ->capture_default_str()
      ->check(CLI::Range(0, 9));
  conv->add_option("--taus", taus, "comma-separated time steps")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  conv->add_option("--t-end", t_end, "final time")->capture_default_str();
  conv->add_option("--out", out, "CSV output")->required();

  auto* run = app.add_subcommand("run", "adaptive run");
  sfem_run_config config;
  sfem_run_config_default(&config);
  std::string criterion = "bulk";
  std::string strategy = "nvb";
  std::string coarsening = "matching";
  std::string snapshots;
  run->add_option("--problem", problem, "problem name")->capture_default_str();
  run->add_option("--tol", config.tol, "tolerance")->required();
  run->add_option("--tau0", config.tau0, "initial time step")->required();
  run->add_option("--theta", config.theta, "refinement parameter")->required();
  run->add_option("--theta-star", config.theta_star, "coarsening parameter")->required();
  run->add_option("--criterion", criterion, "marking criterion")
      ->check(CLI::IsMember({"bulk", "doerfler"}))
      ->capture_default_str();
  run->add_option("--strategy", strategy, "refinement strategy")
      ->check(CLI::IsMember({"nvb", "rgb"}))
      ->capture_default_str();
  run->add_option("--coarsening", coarsening, "coarsening mode")
      ->check(CLI::IsMember({"matching", "none", "reset"}))
      ->capture_default_str();
  run->add_option("--initial-level", config.initial_level,
                  "initial mesh level (default: coarsest admissible)");
  run->add_option("--t-end", config.t_end, "final time")->required();
  run->add_option("--out", out, "CSV output")->required();
  run->add_option("--snapshots", snapshots, "directory for VTK snapshots");

  auto* geom = app.add_subcommand("verify-geometry", "geometric error orders");
  std::string surface = "sphere";
  int geom_levels = 5;
  int geom_min_level = 1;
  geom->add_option("--surface", surface, "surface")
      ->check(CLI::IsMember({"sphere", "torus"}))
      ->capture_default_str();
  geom->add_option("--levels", geom_levels, "finest mesh level")->required()->check(CLI::Range(0, 8));
  geom->add_option("--min-level", geom_min_level, "coarsest mesh level")
      ->capture_default_str()
      ->check(CLI::Range(0, 8));
  geom->add_option("--out", out, "CSV output")->required();

  auto* timing = app.add_subcommand("timing", "refinement and coarsening strategy comparison");
  timing->add_option("--out", out, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*conv) {
    if (conv_min_level > conv_levels) {
      std::cerr << "sfem: --min-level exceeds --levels\n";
      return kExitUsage;
    }
    const std::vector<int> levels = level_range(conv_min_level, conv_levels);
    return report(sfem_convergence(problem.c_str(), levels.data(), levels.size(), taus.data(),
                                   taus.size(), t_end, out.c_str()));
  }
  if (*run) {
    config.criterion = criterion == "bulk" ? SFEM_BULK : SFEM_DOERFLER;
    config.strategy = strategy == "nvb" ? SFEM_NVB : SFEM_RGB;
    config.coarsening = coarsening == "matching" ? SFEM_COARSEN_MATCHING
                        : coarsening == "none"   ? SFEM_COARSEN_NONE
                                                 : SFEM_COARSEN_RESET;
    sfem_runlog* log = nullptr;
    const sfem_status status =
        sfem_run(problem.c_str(), &config, out.c_str(),
                 snapshots.empty() ? nullptr : snapshots.c_str(), &log);
    if (status == SFEM_OK) {
      std::printf("steps %zu, peak dofs %llu, final dofs %llu, dof-steps %llu\n",
                  sfem_runlog_num_steps(log),
                  static_cast<unsigned long long>(sfem_runlog_peak_dofs(log)),
                  static_cast<unsigned long long>(sfem_runlog_final_dofs(log)),
                  static_cast<unsigned long long>(sfem_runlog_dof_steps(log)));
    }
    sfem_runlog_free(log);
    return report(status);
  }
  if (*geom) {
    if (geom_min_level > geom_levels) {
      std::cerr << "sfem: --min-level exceeds --levels\n";
      return kExitUsage;
    }
    const std::vector<int> levels = level_range(geom_min_level, geom_levels);
    double orders[3] = {0.0, 0.0, 0.0};
    const sfem_status status =
        sfem_verify_geometry(surface.c_str(), levels.data(), levels.size(), out.c_str(), orders);
    if (status == SFEM_OK && levels.size() >= 2) {
      std::printf("fitted orders: d %.3f, 1-mu %.3f, P-Atilde %.3f\n", orders[0], orders[1],
                  orders[2]);
    }
    return report(status);
  }
  return report(sfem_timing(out.c_str()));
}
