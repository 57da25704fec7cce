// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sfem/adaptive.hpp"
#include "sfem/experiments.hpp"
#include "sfem/fem.hpp"
#include "sfem/problems.hpp"
#include "sfem/refinement.hpp"
#include "support.hpp"

using namespace sfem;

namespace {

// Tolerances.
constexpr double kLinfOrderLo = 1.6, kLinfOrderHi = 2.4;
constexpr double kH1OrderLo = 0.8, kH1OrderHi = 1.2;
constexpr double kAnchorH = 0.0347;
constexpr double kAnchorError = 2.43e-4;
constexpr double kAnchorEstimator = 3.23e-2;
constexpr double kAnchorFactor = 2.5;
constexpr double kRatioSpread = 4.0;
constexpr double kSaturation = 0.05;
constexpr double kGeometryOrder = 2.0, kGeometrySlack = 0.3;
constexpr double kNormRatioLo = 0.9, kNormRatioHi = 1.1;
constexpr double kDecayFraction = 0.10;
constexpr double kTimeSum = 1e-12;
constexpr double kTransferExact = 1e-12;
constexpr int kFuzzSteps = 500;

constexpr double kConvergenceTau = 0.01;
constexpr double kSaturationTau = 1.0;

std::map<int, std::string> results;
int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  char head[64];
  std::snprintf(head, sizeof head, "Criterion %d: %s  ", id, pass ? "PASS" : "FAIL");
  results[id] = head + detail;
  std::printf("  [done] %s\n", results[id].c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

double eoc(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

bool within_factor(double value, double anchor, double factor) {
  return value > 0.0 && std::max(value / anchor, anchor / value) <= factor;
}

struct NamedLog {
  std::string name;
  double tol;
  double t_end;
  RunLog log;
};

// Returns an empty string when every gate holds.
std::string gate_violation(const NamedLog& run) {
  double sum = 0.0;
  for (const StepRecord& s : run.log.steps) {
    if (!(s.eta_h_sq <= run.tol)) return fmt("step %d eta_h^2 %.3g", s.step, s.eta_h_sq);
    if (!(s.eta_tau_sq <= run.tol)) return fmt("step %d eta_tau^2 %.3g", s.step, s.eta_tau_sq);
    for (double c : s.accepted_coarsening_eta_c_sq) {
      if (!(c <= run.tol)) return fmt("step %d coarsening eta_c^2 %.3g", s.step, c);
    }
    sum += s.tau;
  }
  if (run.log.steps.empty()) return "no steps";
  if (!(std::abs(sum - run.t_end) <= kTimeSum)) return fmt("sum of tau %.17g", sum);
  if (run.log.steps.back().t != run.t_end) return "final time differs from T";
  return {};
}

void convergence_criteria() {
  const std::vector<int> levels = {2, 3, 4, 5, 6};
  const auto rows = convergence_sweep(sphere_decay(), levels, {kConvergenceTau, kSaturationTau}, 1.0);
  std::vector<ConvergenceRow> fine, coarse_tau;
  for (const ConvergenceRow& r : rows) (r.tau == kConvergenceTau ? fine : coarse_tau).push_back(r);
  for (const ConvergenceRow& r : fine) {
    std::printf("  level %d h %.4f tau %.2g: Linf(L2) %.4e  L2(H1) %.4e  estimator %.4e\n",
                r.level, r.h, r.tau, r.err_linf_l2, r.err_l2_h1, r.estimator);
  }
  const std::size_t n = fine.size();

  // 1: orders over the two finest pairs.
  bool pass1 = true;
  std::string detail1;
  for (std::size_t k = n - 2; k < n; ++k) {
    const ConvergenceRow& a = fine[k - 1];
    const ConvergenceRow& b = fine[k];
    const double p_l2 = eoc(a.err_linf_l2, b.err_linf_l2, a.h, b.h);
    const double p_h1 = eoc(a.err_l2_h1, b.err_l2_h1, a.h, b.h);
    pass1 = pass1 && p_l2 >= kLinfOrderLo && p_l2 <= kLinfOrderHi && p_h1 >= kH1OrderLo &&
            p_h1 <= kH1OrderHi;
    detail1 += fmt("levels %d-%d: Linf(L2) EOC %.3f, L2(H1) EOC %.3f; ", a.level, b.level, p_l2,
                   p_h1);
  }
  report(1, pass1,
         detail1 + fmt("required [%.1f, %.1f] and [%.1f, %.1f]", kLinfOrderLo, kLinfOrderHi,
                       kH1OrderLo, kH1OrderHi));

  // 2: anchor at h closest to 0.0347. The anchor estimator value is the sum
  // of squared step estimators, so it is compared with estimator^2.
  const ConvergenceRow& anchor = *std::min_element(
      fine.begin(), fine.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
        return std::abs(a.h - kAnchorH) < std::abs(b.h - kAnchorH);
      });
  const double est_sq = anchor.estimator * anchor.estimator;
  const bool pass2 = within_factor(anchor.err_linf_l2, kAnchorError, kAnchorFactor) &&
                     within_factor(est_sq, kAnchorEstimator, kAnchorFactor);
  report(2, pass2,
         fmt("level %d h %.4f: error %.3e vs %.3e (x%.2f); sum of squared estimators %.3e vs "
             "%.3e (x%.2f); root %.3e",
             anchor.level, anchor.h, anchor.err_linf_l2, kAnchorError,
             std::max(anchor.err_linf_l2 / kAnchorError, kAnchorError / anchor.err_linf_l2),
             est_sq, kAnchorEstimator,
             std::max(est_sq / kAnchorEstimator, kAnchorEstimator / est_sq), anchor.estimator));

  // 3: estimator to error ratio over the three finest levels.
  double lo = INFINITY, hi = 0.0;
  std::string ratios;
  for (std::size_t k = n - 3; k < n; ++k) {
    const double ratio = fine[k].estimator / (fine[k].err_linf_l2 + fine[k].err_l2_h1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ratios += fmt("%.3f ", ratio);
  }
  report(3, hi / lo <= kRatioSpread,
         fmt("ratios %sspread %.3f (max %.1f)", ratios.c_str(), hi / lo, kRatioSpread));

  // 4: temporal saturation at tau = 1.
  const ConvergenceRow& a = coarse_tau[coarse_tau.size() - 2];
  const ConvergenceRow& b = coarse_tau.back();
  const double rel = std::abs(a.err_linf_l2 - b.err_linf_l2) / std::max(a.err_linf_l2, b.err_linf_l2);
  report(4, rel < kSaturation,
         fmt("levels %d, %d: Linf(L2) %.4e, %.4e, relative difference %.4f (max %.2f)", a.level,
             b.level, a.err_linf_l2, b.err_linf_l2, rel, kSaturation));
}

void geometry_criterion() {
  const auto rows = verify_geometry(LevelSetSurface::unit_sphere(),
                                    [](int l) { return icosphere(l); }, {2, 3, 4, 5, 6});
  std::vector<double> h, d, mu, op;
  for (const GeometryRow& r : rows) {
    h.push_back(r.h);
    d.push_back(r.max_abs_d);
    mu.push_back(r.max_abs_one_minus_mu);
    op.push_back(r.max_norm_P_minus_Atilde);
  }
  bool pass = true;
  std::string detail;
  const char* names[] = {"max|d|", "max|1-mu|", "max|P-Atilde|"};
  int i = 0;
  for (const auto* column : {&d, &mu, &op}) {
    const double p = testing::fitted_order(h, *column);
    pass = pass && std::abs(p - kGeometryOrder) <= kGeometrySlack;
    detail += fmt("%s %.3f; ", names[i++], p);
  }
  report(5, pass, detail + fmt("required %.1f +- %.1f", kGeometryOrder, kGeometrySlack));
}

void norm_equivalence_criterion() {
  const auto sphere = LevelSetSurface::unit_sphere();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  bool pass = true;
  double previous = INFINITY;
  std::string detail;
  for (int level = 1; level <= 5; ++level) {
    const SurfaceMesh mesh = icosphere(level);
    double lo = INFINITY, hi = 0.0, deviation = 0.0;
    for (int k = 0; k < 20; ++k) {
      std::vector<double> values(mesh.num_nodes());
      for (double& v : values) v = unit(rng);
      const FeFunction f = FeFunction::from_values(mesh, values);
      const double ratio = l2_norm_lifted(mesh, f, sphere) / l2_norm_discrete(mesh, f);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      deviation = std::max(deviation, std::abs(ratio - 1.0));
    }
    pass = pass && lo >= kNormRatioLo && hi <= kNormRatioHi && deviation < previous;
    previous = deviation;
    detail += fmt("L%d [%.5f, %.5f]; ", level, lo, hi);
  }
  report(6, pass, detail + "deviation from 1 decreasing with h");
}

NamedLog decay_criterion() {
  const Problem problem = sphere_decay();
  AdaptiveConfig config;
  config.tol = 0.01;
  config.t_end = 3.0;
  config.tau0 = 0.02;
  config.theta = 0.5;
  config.theta_star = 0.65;
  config.criterion = MarkCriterion::kBulk;
  config.strategy = Strategy::kNvb;
  const int level = initial_level_for(problem, config.tol);
  RunResult result = run_adaptive(problem, problem.mesh_family(level), config);
  const double final_dofs = static_cast<double>(result.mesh.num_nodes());
  const double peak = static_cast<double>(result.log.peak_dofs);
  report(7, final_dofs < kDecayFraction * peak,
         fmt("initial level %d, %zu steps, peak %.0f, final %.0f (%.2f%%, max %.0f%%)", level,
             result.log.steps.size(), peak, final_dofs, 100.0 * final_dofs / peak,
             100.0 * kDecayFraction));
  return {"sphere-decay TOL 0.01", config.tol, config.t_end, std::move(result.log)};
}

NamedLog extra_run(const std::string& name, const Problem& problem, AdaptiveConfig config,
                   int level) {
  RunResult result = run_adaptive(problem, problem.mesh_family(level), config);
  return {name, config.tol, config.t_end, std::move(result.log)};
}

void gate_criterion(const std::vector<NamedLog>& runs) {
  bool pass = true;
  std::size_t steps = 0;
  std::string detail;
  for (const NamedLog& run : runs) {
    steps += run.log.steps.size();
    const std::string violation = gate_violation(run);
    if (!violation.empty()) {
      pass = false;
      detail += run.name + ": " + violation + "; ";
    }
  }
  report(8, pass, fmt("%zu runs, %zu accepted steps; ", runs.size(), steps) + detail);
}

void mesh_machinery_criterion() {
  const auto sphere = LevelSetSurface::unit_sphere();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Pointwise exactness of the refinement interpolation before lifting.
  double worst = 0.0;
  for (Strategy s : {Strategy::kNvb, Strategy::kRgb}) {
    for (int trial = 0; trial < 5; ++trial) {
      const SurfaceMesh mesh = icosphere(2);
      std::vector<double> values(mesh.num_nodes());
      for (double& v : values) v = 2.0 * unit(rng) - 1.0;
      const FeFunction u = FeFunction::from_values(mesh, values);
      const RefineResult r = refine(mesh, testing::mark_random(mesh, rng, 0.3), s);
      const FeFunction v = transfer(u, r.map);
      for (TriId child = 0; child < r.mesh.num_triangles(); ++child) {
        const Triangle& ct = r.mesh.triangles()[child];
        const Triangle& pt = mesh.triangles()[r.mesh.metadata()[child].lineage.root()];
        for (int sample = 0; sample < 4; ++sample) {
          double l1 = unit(rng), l2 = unit(rng);
          if (l1 + l2 > 1.0) {
            l1 = 1.0 - l1;
            l2 = 1.0 - l2;
          }
          const double l0 = 1.0 - l1 - l2;
          const Vec3 p = l0 * r.mesh.nodes()[ct[0]] + l1 * r.mesh.nodes()[ct[1]] +
                         l2 * r.mesh.nodes()[ct[2]];
          const double on_child = l0 * v[ct[0]] + l1 * v[ct[1]] + l2 * v[ct[2]];
          const auto b = testing::barycentric(p, mesh.nodes()[pt[0]], mesh.nodes()[pt[1]],
                                              mesh.nodes()[pt[2]]);
          const double on_parent = b[0] * u[pt[0]] + b[1] * u[pt[1]] + b[2] * u[pt[2]];
          worst = std::max(worst, std::abs(on_child - on_parent));
        }
      }
    }
  }

  // Refine all, coarsen all.
  bool round_trip = true;
  for (Strategy s : {Strategy::kNvb, Strategy::kRgb}) {
    const SurfaceMesh parent = icosphere(2);
    const SurfaceMesh fine =
        lift_new_nodes(refine(parent, testing::mark_all(parent), s), sphere);
    const CoarsenResult c = coarsen(fine, testing::mark_all(fine), {}, s);
    round_trip = round_trip &&
                 testing::sorted_coordinates(c.mesh) == testing::sorted_coordinates(parent) &&
                 c.mesh.num_triangles() == parent.num_triangles();
  }

  // Randomized refine/coarsen with a conformity audit after every mutation.
  std::string fuzz_violation;
  std::size_t mutations = 0;
  for (Strategy s : {Strategy::kNvb, Strategy::kRgb}) {
    SurfaceMesh mesh = icosphere(1);
    for (int step = 0; step < kFuzzSteps && fuzz_violation.empty(); ++step) {
      if (unit(rng) < 0.6 && mesh.num_triangles() < 8000) {
        mesh = lift_new_nodes(refine(mesh, testing::mark_random(mesh, rng, 0.1), s), sphere);
      } else {
        mesh = coarsen(mesh, testing::mark_random(mesh, rng, 0.7), {}, s).mesh;
      }
      ++mutations;
      fuzz_violation = testing::conformity_violation(mesh);
      if (fuzz_violation.empty() && mesh.euler_characteristic() != 2) {
        fuzz_violation = "Euler characteristic changed";
      }
      if (!fuzz_violation.empty()) {
        fuzz_violation = fmt("step %d (%s): ", step, to_string(s).c_str()) + fuzz_violation;
      }
    }
  }

  report(9, worst <= kTransferExact && round_trip && fuzz_violation.empty(),
         fmt("transfer deviation %.2e (max %.0e); round trip %s; fuzz %zu mutations %s",
             worst, kTransferExact, round_trip ? "exact" : "failed", mutations,
             fuzz_violation.empty() ? "conforming" : fuzz_violation.c_str()));
}

std::vector<NamedLog> timing_criterion() {
  std::vector<TimingRow> rows = timing_comparison();
  bool pass = true;
  std::string detail;
  for (Strategy s : {Strategy::kNvb, Strategy::kRgb}) {
    std::uint64_t none = 0, reset = 0, matching = 0;
    for (const TimingRow& r : rows) {
      if (r.strategy != s) continue;
      if (r.coarsening == CoarseningMode::kNone) none = r.dof_steps;
      if (r.coarsening == CoarseningMode::kResetToInitial) reset = r.dof_steps;
      if (r.coarsening == CoarseningMode::kMatching) matching = r.dof_steps;
    }
    pass = pass && matching < reset && reset < none;
    detail += fmt("%s matching %llu < reset %llu < none %llu; ", to_string(s).c_str(),
                  static_cast<unsigned long long>(matching),
                  static_cast<unsigned long long>(reset), static_cast<unsigned long long>(none));
  }
  report(10, pass, detail + "(DOF-steps)");
  std::vector<NamedLog> logs;
  const AdaptiveConfig c = timing_config(Strategy::kNvb, CoarseningMode::kNone);
  for (TimingRow& r : rows) {
    logs.push_back({"timing " + to_string(r.strategy) + "/" + to_string(r.coarsening), c.tol,
                    c.t_end, std::move(r.log)});
  }
  return logs;
}

}  // namespace

int main() {
  try {
    convergence_criteria();
    geometry_criterion();
    norm_equivalence_criterion();

    std::vector<NamedLog> runs;
    runs.push_back(decay_criterion());
    {
      AdaptiveConfig c;
      c.tol = 0.05;
      c.tau0 = 0.1;
      c.t_end = 0.7;
      c.theta = 0.5;
      c.theta_star = 0.3;
      c.criterion = MarkCriterion::kDoerfler;
      c.strategy = Strategy::kRgb;
      runs.push_back(extra_run("sphere-decay doerfler/rgb", sphere_decay(), c, 3));
      AdaptiveConfig m;
      m.tol = 0.8;
      m.tau0 = 0.01;
      m.t_end = 0.6;
      m.theta = 0.5;
      m.theta_star = 0.2;
      runs.push_back(extra_run("moving-peak bulk/nvb", moving_peak(), m, 2));
    }
    mesh_machinery_criterion();
    for (NamedLog& log : timing_criterion()) runs.push_back(std::move(log));
    gate_criterion(runs);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("\n");
  for (const auto& [id, line] : results) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failures, results.size());
  return failures == 0 ? 0 : 1;
}
