#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sfem/adaptive.hpp"
#include "sfem/geometry.hpp"
#include "sfem/mesh.hpp"
#include "sfem/problems.hpp"

namespace sfem {

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  std::size_t dofs = 0;
  double err_linf_l2 = 0.0;  // max_n ||u(t_n) - u_h^n||_{L2(Gamma)}
  double err_l2_h1 = 0.0;    // (sum_n tau ||u(t_n) - u_h^n||^2_{H1(Gamma)})^{1/2}
  double estimator = 0.0;    // (sum_n (eta^n)^2)^{1/2}
};

/// Uniform backward Euler with the lifted initial interpolant on one fixed
/// mesh. The last step is shortened to land on t_end.
ConvergenceRow uniform_run(const Problem& problem, const SurfaceMesh& mesh, double tau,
                           double t_end, const CgOptions& cg = {});

/// One row per (level, tau), levels outer. Requires an exact solution.
std::vector<ConvergenceRow> convergence_sweep(const Problem& problem,
                                              const std::vector<int>& levels,
                                              const std::vector<double>& taus, double t_end);

struct GeometryRow {
  int level = 0;
  double h = 0.0;
  double max_abs_d = 0.0;
  double max_abs_one_minus_mu = 0.0;
  double max_norm_P_minus_Atilde = 0.0;  // spectral norm
};

/// Folds the geometric errors of one flat triangle into `row`, sampled at
/// the degree-4 quadrature points, the edge midpoints and the centroid.
void accumulate_geometry_errors(const LevelSetSurface& surface, const Vec3& x0, const Vec3& x1,
                                const Vec3& x2, GeometryRow& row);

/// Geometric errors of the flat triangulation.
GeometryRow geometry_errors(const LevelSetSurface& surface, const SurfaceMesh& mesh, int level);

std::vector<GeometryRow> verify_geometry(const LevelSetSurface& surface,
                                         const std::function<SurfaceMesh(int)>& family,
                                         const std::vector<int>& levels);

/// Least-squares slope of log(y) over log(x). Throws kInvalidArgument for
/// fewer than two points or non-positive data.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

struct TimingRow {
  Strategy strategy = Strategy::kNvb;
  CoarseningMode coarsening = CoarseningMode::kMatching;
  double wall_ms = 0.0;
  std::uint64_t dof_steps = 0;
  std::size_t steps = 0;
  std::size_t peak_dofs = 0;
  std::size_t final_dofs = 0;
  RunLog log;
};

/// Adaptive configuration of the strategy comparison on moving-peak-timing:
/// TOL 0.4, theta 0.8, theta* 0.2, bulk marking, one revolution.
AdaptiveConfig timing_config(Strategy strategy, CoarseningMode coarsening);

/// {RGB, NVB} x {none, reset-to-initial, matching} on moving-peak-timing.
std::vector<TimingRow> timing_comparison();

std::string to_string(Strategy strategy);
std::string to_string(CoarseningMode mode);

}  // namespace sfem
