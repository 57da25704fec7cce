#include "sfem/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sfem/error.hpp"

namespace sfem {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

SpaceTimeField stationary(const std::function<double(const Vec3&)>& g) {
  return [g](const Vec3& x, double) { return g(x); };
}

std::string format_double(double v) { return std::to_string(v); }

}  // namespace

void AdaptiveConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(tol > 0.0)) fail("tol must be positive");
  if (!(t_end > 0.0)) fail("t_end must be positive");
  if (!(tau0 > 0.0) || tau0 > t_end) fail("tau0 must lie in (0, t_end]");
  if (!(effective_tau_min() < tau0)) fail("tau_min must be below tau0");
  if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0, 1)");
  if (!(theta_star > 0.0 && theta_star < 1.0)) fail("theta_star must lie in (0, 1)");
  if (max_spatial_iters < 1) fail("max_spatial_iters must be positive");
  if (max_coarsen_iters < 0) fail("max_coarsen_iters must be non-negative");
  if (dof_cap == 0) fail("dof_cap must be positive");
  if (coarsen_passes && *coarsen_passes < 1) fail("coarsen_passes must be positive");
}

int initial_level_for(const Problem& problem, double tol, int max_level) {
  for (int level = 0; level <= max_level; ++level) {
    const SurfaceMesh mesh = problem.mesh_family(level);
    const FeFunction u0 = interpolate(mesh, stationary(problem.initial), 0.0);
    if (l2_distance_lifted(mesh, u0, problem.initial, problem.surface) <= tol) return level;
  }
  throw Error(ErrorCode::kInitialDataTooCoarse,
              "no mesh up to level " + std::to_string(max_level) +
                  " resolves the initial data to tol " + format_double(tol));
}

RunResult run_adaptive(const Problem& problem, const SurfaceMesh& initial_mesh,
                       const AdaptiveConfig& config, const StepObserver& observer) {
  config.validate();
  const double tol = config.tol;
  const double t_end = config.t_end;
  const double tau_min = config.effective_tau_min();
  const int coarsen_passes =
      config.coarsen_passes.value_or(config.strategy == Strategy::kNvb ? 2 : 1);

  SurfaceMesh base = initial_mesh;
  if (!base.has_refinement_metadata()) base.initialize_refinement_metadata();
  const std::size_t initial_nodes = base.num_nodes();

  SurfaceMesh mesh = base;
  FeFunction u_prev = interpolate(mesh, stationary(problem.initial), 0.0);
  const double initial_error =
      l2_distance_lifted(mesh, u_prev, problem.initial, problem.surface);
  if (initial_error > tol) {
    throw Error(ErrorCode::kInitialDataTooCoarse,
                "initial interpolation error " + format_double(initial_error) +
                    " exceeds tol " + format_double(tol));
  }

  RunLog log;
  log.initial_dofs = initial_nodes;
  log.peak_dofs = initial_nodes;

  double t_prev = 0.0;
  double tau = config.tau0;
  int step = 0;

  while (t_prev < t_end) {
    ++step;
    const auto step_start = Clock::now();
    StepRecord rec;
    rec.step = step;
    mesh.set_epoch(static_cast<std::uint32_t>(step));

    FeFunction u_prev_transferred = u_prev;
    FeFunction u_n;
    FeFunction f_h;
    Indicators ind;
    double t_n = 0.0;

    // Attempts at this step; a temporal rejection halves tau and retries on
    // the grid refined so far.
    for (;;) {
      if (t_prev + tau >= t_end) {
        tau = t_end - t_prev;
        t_n = t_end;
      } else {
        t_n = t_prev + tau;
      }
      if (tau < tau_min) {
        throw Error(ErrorCode::kTauUnderflow,
                    "time step " + format_double(tau) + " fell below tau_min at t = " +
                        format_double(t_prev));
      }

      int iters = 0;
      for (;;) {
        const Operators ops = assemble(mesh);
        f_h = interpolate(mesh, problem.rhs, t_n);
        StepResult solved = backward_euler_step(ops, u_prev_transferred, f_h, tau, config.cg);
        u_n = std::move(solved.solution);
        ++iters;
        rec.cg_iters += solved.cg_iterations;
        log.cumulative_dof_steps += mesh.num_nodes();
        ++log.solves;
        log.peak_dofs = std::max(log.peak_dofs, mesh.num_nodes());

        ind = compute_indicators(mesh, u_n, u_prev_transferred, f_h, tau);
        if (ind.eta_h_sq() < tol) break;
        if (iters >= config.max_spatial_iters) {
          throw Error(ErrorCode::kSpatialStagnation,
                      "eta_h^2 = " + format_double(ind.eta_h_sq()) + " after " +
                          std::to_string(iters) + " spatial iterations at t = " +
                          format_double(t_n));
        }
        const MarkSet marks =
            mark_refine(ind.spatial.magnitudes(), config.theta, config.criterion);
        if (marks.empty()) {
          throw Error(ErrorCode::kSpatialStagnation, "no element marked for refinement");
        }
        RefineResult refined = refine(mesh, marks, config.strategy);
        u_prev_transferred = transfer(u_prev_transferred, refined.map);
        mesh = lift_new_nodes(refined, problem.surface);
        mesh.set_epoch(static_cast<std::uint32_t>(step));
        // The transferred function keeps the generation of the pre-lift grid,
        // which the lift preserves.
        if (mesh.num_nodes() > config.dof_cap) {
          throw Error(ErrorCode::kDofCapExceeded,
                      std::to_string(mesh.num_nodes()) + " nodes exceed the cap of " +
                          std::to_string(config.dof_cap));
        }
      }
      rec.spatial_iters = iters;

      if (ind.eta_tau_sq() < tol) break;
      ++rec.rejections;
      tau *= 0.5;
    }

    rec.t = t_n;
    rec.tau = tau;
    rec.dofs = mesh.num_nodes();
    rec.eta_h_sq = ind.eta_h_sq();
    rec.eta_tau_sq = ind.eta_tau_sq();
    rec.eta_c_sq = ind.eta_c_sq();
    rec.eta_combined = ind.eta_combined;

    const SurfaceMesh solve_mesh = mesh;
    const FeFunction solve_solution = u_n;

    // Next step size, landing exactly on t_end.
    t_prev = t_n;
    tau *= 2.0;
    if (t_prev < t_end && t_prev + tau >= t_end * (1.0 - 1e-12)) tau = t_end - t_prev;

    switch (config.coarsening) {
      case CoarseningMode::kMatching: {
        IndicatorField eta_c = ind.coarsening;
        CoarsenOptions options;
        options.max_passes = coarsen_passes;
        options.protected_epoch = static_cast<std::uint32_t>(step);
        while (eta_c.total <= tol && rec.coarsen_iters < config.max_coarsen_iters) {
          const MarkSet marks =
              mark_coarsen(eta_c.magnitudes(), config.theta_star, config.criterion);
          if (marks.empty()) break;
          const std::vector<FeFunction> carried{u_n, u_prev_transferred, f_h};
          CoarsenResult coarse = coarsen(mesh, marks, carried, config.strategy, options);
          if (coarse.removed_count == 0) break;
          IndicatorField next =
              coarsening_indicator(coarse.mesh, coarse.functions[0], coarse.functions[1]);
          if (next.total > tol) {
            ++rec.coarsening_rollbacks;
            break;
          }
          mesh = std::move(coarse.mesh);
          u_n = std::move(coarse.functions[0]);
          u_prev_transferred = std::move(coarse.functions[1]);
          f_h = std::move(coarse.functions[2]);
          eta_c = std::move(next);
          ++rec.coarsen_iters;
          rec.nodes_removed += coarse.removed_count;
          rec.accepted_coarsening_eta_c_sq.push_back(eta_c.total);
        }
        break;
      }
      case CoarseningMode::kResetToInitial: {
        // Refinement appends nodes and coarsening compacts in order, so the
        // initial nodes always occupy the first ids.
        rec.nodes_removed = mesh.num_nodes() - initial_nodes;
        std::vector<double> values(u_n.coefficients.begin(),
                                   u_n.coefficients.begin() +
                                       static_cast<std::ptrdiff_t>(initial_nodes));
        mesh = base;
        u_n = FeFunction::from_values(mesh, std::move(values));
        break;
      }
      case CoarseningMode::kNone:
        break;
    }
    u_prev = std::move(u_n);

    rec.wall_ms = elapsed_ms(step_start);
    log.steps.push_back(rec);
    if (observer) observer(log.steps.back(), solve_mesh, solve_solution);
  }

  return RunResult{std::move(log), std::move(mesh), std::move(u_prev)};
}

}  // namespace sfem
