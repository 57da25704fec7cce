#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sfem/estimator.hpp"
#include "sfem/fem.hpp"
#include "sfem/problems.hpp"
#include "sfem/refinement.hpp"

namespace sfem {

enum class CoarseningMode : std::uint8_t {
  kMatching,        // coarsening loop driven by eta_c
  kNone,            // meshes only grow
  kResetToInitial,  // every step restarts from the initial mesh
};

struct AdaptiveConfig {
  double tol = 0.1;
  double tau0 = 0.1;
  double t_end = 1.0;
  double theta = 0.5;
  double theta_star = 0.2;
  MarkCriterion criterion = MarkCriterion::kBulk;
  Strategy strategy = Strategy::kNvb;
  int max_spatial_iters = 30;
  int max_coarsen_iters = 10;
  std::optional<double> tau_min;  // unset: 1e-8 * t_end
  std::size_t dof_cap = 2'000'000;
  CoarseningMode coarsening = CoarseningMode::kMatching;
  /// Collapse passes per coarsening iteration; unset: 2 for NVB (one
  /// bisection pair), 1 for RGB.
  std::optional<int> coarsen_passes;
  CgOptions cg;

  double effective_tau_min() const { return tau_min.value_or(1e-8 * t_end); }
  /// Throws kInvalidArgument on violated invariants.
  void validate() const;
};

/// One accepted time step.
struct StepRecord {
  int step = 0;
  double t = 0.0;
  double tau = 0.0;
  std::size_t dofs = 0;  // DOFs of the grid the step was solved on
  double eta_h_sq = 0.0;
  double eta_tau_sq = 0.0;
  double eta_c_sq = 0.0;
  double eta_combined = 0.0;
  int spatial_iters = 0;  // solves in the accepted attempt
  int coarsen_iters = 0;
  std::size_t nodes_removed = 0;
  int cg_iters = 0;  // over every solve of the step, rejections included
  double wall_ms = 0.0;

  int rejections = 0;
  std::vector<double> accepted_coarsening_eta_c_sq;
  int coarsening_rollbacks = 0;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::size_t initial_dofs = 0;
  std::size_t peak_dofs = 0;
  /// Sum of the DOF count over every linear solve.
  std::uint64_t cumulative_dof_steps = 0;
  std::uint64_t solves = 0;
};

/// Called after every accepted step with the grid and solution the step was
/// accepted on (before coarsening).
using StepObserver =
    std::function<void(const StepRecord&, const SurfaceMesh&, const FeFunction&)>;

struct RunResult {
  RunLog log;
  SurfaceMesh mesh;  // final grid after coarsening
  FeFunction solution;
};

/// Space-time adaptive backward Euler.
///
/// Per step: solve on the current grid, estimate, and refine on eta_h until
/// eta_h^2 < tol; reject the step (halve tau, keep the refined grid) while
/// eta_tau^2 >= tol; on acceptance double tau, clamp at t_end and coarsen on
/// eta_c while eta_c^2 <= tol, undoing an iteration that breaks the bound.
/// Nodes created within the current step are never coarsened away.
///
/// Throws kInitialDataTooCoarse, kTauUnderflow, kDofCapExceeded,
/// kSpatialStagnation and solver errors.
RunResult run_adaptive(const Problem& problem, const SurfaceMesh& initial_mesh,
                       const AdaptiveConfig& config, const StepObserver& observer = {});

/// Coarsest level of the problem's mesh family whose interpolant of the
/// initial data meets ||(u_h^0)^l - u^0||_{L2(Gamma)} <= tol.
int initial_level_for(const Problem& problem, double tol, int max_level = 7);

}  // namespace sfem
