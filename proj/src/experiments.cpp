#include "sfem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sfem/error.hpp"
#include "sfem/estimator.hpp"
#include "sfem/fem.hpp"

namespace sfem {

ConvergenceRow uniform_run(const Problem& problem, const SurfaceMesh& mesh, double tau,
                           double t_end, const CgOptions& cg) {
  if (!problem.exact) {
    throw Error(ErrorCode::kInvalidArgument, "problem '" + problem.name + "' has no exact solution");
  }
  if (!(tau > 0.0) || !(t_end > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau and t_end must be positive");
  }
  const ExactSolution& exact = *problem.exact;
  const Operators ops = assemble(mesh);

  ConvergenceRow row;
  row.h = mesh.mesh_size();
  row.tau = tau;
  row.dofs = mesh.num_nodes();

  FeFunction u = interpolate(mesh, exact.value, 0.0);
  row.err_linf_l2 = errors_vs_exact(mesh, u, exact, 0.0, problem.surface).l2;
  double h1_sum = 0.0;
  double estimator_sum = 0.0;
  double t = 0.0;
  while (t < t_end) {
    double step = tau;
    double t_next = t + tau;
    if (t_next >= t_end * (1.0 - 1e-12)) {
      step = t_end - t;
      t_next = t_end;
    }
    const FeFunction f = interpolate(mesh, problem.rhs, t_next);
    StepResult solved = backward_euler_step(ops, u, f, step, cg);
    const Indicators ind = compute_indicators(mesh, solved.solution, u, f, step);
    estimator_sum += ind.eta_combined * ind.eta_combined;
    const ErrorNorms err = errors_vs_exact(mesh, solved.solution, exact, t_next, problem.surface);
    row.err_linf_l2 = std::max(row.err_linf_l2, err.l2);
    h1_sum += step * (err.l2 * err.l2 + err.h1_semi * err.h1_semi);
    u = std::move(solved.solution);
    t = t_next;
  }
  row.err_l2_h1 = std::sqrt(h1_sum);
  row.estimator = std::sqrt(estimator_sum);
  return row;
}

std::vector<ConvergenceRow> convergence_sweep(const Problem& problem,
                                              const std::vector<int>& levels,
                                              const std::vector<double>& taus, double t_end) {
  std::vector<ConvergenceRow> rows;
  for (int level : levels) {
    const SurfaceMesh mesh = problem.mesh_family(level);
    for (double tau : taus) {
      ConvergenceRow row = uniform_run(problem, mesh, tau, t_end);
      row.level = level;
      rows.push_back(row);
    }
  }
  return rows;
}

void accumulate_geometry_errors(const LevelSetSurface& surface, const Vec3& x0, const Vec3& x1,
                                const Vec3& x2, GeometryRow& row) {
  static const std::vector<std::array<double, 3>> samples = [] {
    std::vector<std::array<double, 3>> s = QuadratureRule::degree4().barycentric;
    s.push_back({0.5, 0.5, 0.0});
    s.push_back({0.0, 0.5, 0.5});
    s.push_back({0.5, 0.0, 0.5});
    s.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    return s;
  }();
  const Vec3 nu_h = triangle_geometry(x0, x1, x2).normal;
  for (const auto& b : samples) {
    const Vec3 x = b[0] * x0 + b[1] * x1 + b[2] * x2;
    row.max_abs_d = std::max(row.max_abs_d, std::abs(surface.distance(x)));
    const GeometricOperators g = geometric_operators(surface, x, nu_h);
    row.max_abs_one_minus_mu = std::max(row.max_abs_one_minus_mu, std::abs(1.0 - g.mu_h));
    const Eigen::JacobiSVD<Mat3> svd(g.P_h - g.A_tilde);
    row.max_norm_P_minus_Atilde = std::max(row.max_norm_P_minus_Atilde, svd.singularValues()[0]);
  }
}

GeometryRow geometry_errors(const LevelSetSurface& surface, const SurfaceMesh& mesh, int level) {
  GeometryRow row;
  row.level = level;
  row.h = mesh.mesh_size();
  for (const Triangle& t : mesh.triangles()) {
    accumulate_geometry_errors(surface, mesh.nodes()[t[0]], mesh.nodes()[t[1]],
                               mesh.nodes()[t[2]], row);
  }
  return row;
}

std::vector<GeometryRow> verify_geometry(const LevelSetSurface& surface,
                                         const std::function<SurfaceMesh(int)>& family,
                                         const std::vector<int>& levels) {
  std::vector<GeometryRow> rows;
  for (int level : levels) rows.push_back(geometry_errors(surface, family(level), level));
  return rows;
}

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "order fit needs two or more matching points");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "order fit needs positive data");
    }
    A(i, 0) = std::log(x[i]);
    A(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

AdaptiveConfig timing_config(Strategy strategy, CoarseningMode coarsening) {
  AdaptiveConfig config;
  config.tol = 0.4;
  config.tau0 = 0.01;
  config.t_end = 1.0;
  config.theta = 0.8;
  config.theta_star = 0.2;
  config.criterion = MarkCriterion::kBulk;
  config.strategy = strategy;
  config.coarsening = coarsening;
  return config;
}

std::vector<TimingRow> timing_comparison() {
  const Problem problem = moving_peak_timing();
  const double tol = timing_config(Strategy::kNvb, CoarseningMode::kNone).tol;
  const SurfaceMesh initial = problem.mesh_family(initial_level_for(problem, tol));
  std::vector<TimingRow> rows;
  for (Strategy strategy : {Strategy::kRgb, Strategy::kNvb}) {
    for (CoarseningMode mode :
         {CoarseningMode::kNone, CoarseningMode::kResetToInitial, CoarseningMode::kMatching}) {
      const auto start = std::chrono::steady_clock::now();
      RunResult result = run_adaptive(problem, initial, timing_config(strategy, mode));
      TimingRow row;
      row.strategy = strategy;
      row.coarsening = mode;
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      row.dof_steps = result.log.cumulative_dof_steps;
      row.steps = result.log.steps.size();
      row.peak_dofs = result.log.peak_dofs;
      row.final_dofs = result.mesh.num_nodes();
      row.log = std::move(result.log);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string to_string(Strategy strategy) { return strategy == Strategy::kNvb ? "nvb" : "rgb"; }

std::string to_string(CoarseningMode mode) {
  switch (mode) {
    case CoarseningMode::kMatching: return "matching";
    case CoarseningMode::kNone: return "none";
    case CoarseningMode::kResetToInitial: return "reset-to-initial";
  }
  return "unknown";
}

}  // namespace sfem
