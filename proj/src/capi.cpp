#include "sfem/sfem.h"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "sfem/adaptive.hpp"
#include "sfem/error.hpp"
#include "sfem/experiments.hpp"
#include "sfem/io.hpp"
#include "sfem/problems.hpp"

struct sfem_mesh {
  sfem::SurfaceMesh mesh;
};

struct sfem_runlog {
  sfem::RunLog log;
  std::size_t final_dofs = 0;
};

namespace {

thread_local std::string g_last_error;

sfem_status to_status(sfem::ErrorCode code) {
  using sfem::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return SFEM_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return SFEM_ERR_IO;
    case ErrorCode::kNonConvergence: return SFEM_ERR_NON_CONVERGENCE;
    case ErrorCode::kOutsideTube: return SFEM_ERR_OUTSIDE_TUBE;
    case ErrorCode::kDegenerateTriangle: return SFEM_ERR_DEGENERATE_TRIANGLE;
    case ErrorCode::kSingularShapeOperator: return SFEM_ERR_SINGULAR_SHAPE_OPERATOR;
    case ErrorCode::kNonManifold: return SFEM_ERR_NON_MANIFOLD;
    case ErrorCode::kInconsistentOrientation: return SFEM_ERR_INCONSISTENT_ORIENTATION;
    case ErrorCode::kGenerationMismatch: return SFEM_ERR_GENERATION_MISMATCH;
    case ErrorCode::kMetadataMissing: return SFEM_ERR_METADATA_MISSING;
    case ErrorCode::kStrategyMismatch: return SFEM_ERR_STRATEGY_MISMATCH;
    case ErrorCode::kDepthLimit: return SFEM_ERR_DEPTH_LIMIT;
    case ErrorCode::kSolverDivergence: return SFEM_ERR_SOLVER_DIVERGENCE;
    case ErrorCode::kTauUnderflow: return SFEM_ERR_TAU_UNDERFLOW;
    case ErrorCode::kDofCapExceeded: return SFEM_ERR_DOF_CAP_EXCEEDED;
    case ErrorCode::kSpatialStagnation: return SFEM_ERR_SPATIAL_STAGNATION;
    case ErrorCode::kInitialDataTooCoarse: return SFEM_ERR_INITIAL_DATA_TOO_COARSE;
  }
  return SFEM_ERR_INTERNAL;
}

sfem_status fail(sfem_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
sfem_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SFEM_OK;
  } catch (const sfem::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SFEM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SFEM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SFEM_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw sfem::Error(sfem::ErrorCode::kInvalidArgument, message);
}

std::ofstream open_csv(const char* path) {
  std::ofstream out(path);
  if (!out) throw sfem::Error(sfem::ErrorCode::kIo, std::string("cannot open '") + path + "'");
  return out;
}

sfem::AdaptiveConfig to_config(const sfem_run_config& c) {
  sfem::AdaptiveConfig config;
  config.tol = c.tol;
  config.tau0 = c.tau0;
  config.t_end = c.t_end;
  config.theta = c.theta;
  config.theta_star = c.theta_star;
  require(c.criterion == SFEM_BULK || c.criterion == SFEM_DOERFLER, "unknown criterion");
  config.criterion =
      c.criterion == SFEM_BULK ? sfem::MarkCriterion::kBulk : sfem::MarkCriterion::kDoerfler;
  require(c.strategy == SFEM_NVB || c.strategy == SFEM_RGB, "unknown strategy");
  config.strategy = c.strategy == SFEM_NVB ? sfem::Strategy::kNvb : sfem::Strategy::kRgb;
  switch (c.coarsening) {
    case SFEM_COARSEN_MATCHING: config.coarsening = sfem::CoarseningMode::kMatching; break;
    case SFEM_COARSEN_NONE: config.coarsening = sfem::CoarseningMode::kNone; break;
    case SFEM_COARSEN_RESET: config.coarsening = sfem::CoarseningMode::kResetToInitial; break;
    default: require(false, "unknown coarsening mode");
  }
  config.max_spatial_iters = c.max_spatial_iters;
  config.max_coarsen_iters = c.max_coarsen_iters;
  if (c.tau_min > 0.0) config.tau_min = c.tau_min;
  config.dof_cap = static_cast<std::size_t>(c.dof_cap);
  config.validate();
  return config;
}

void write_runlog_row(sfem::CsvWriter& csv, const sfem::StepRecord& s) {
  using I = std::int64_t;
  csv.row({I{s.step}, s.t, s.tau, static_cast<I>(s.dofs), s.eta_h_sq, s.eta_tau_sq, s.eta_c_sq,
           s.eta_combined, I{s.spatial_iters}, I{s.coarsen_iters},
           static_cast<I>(s.nodes_removed), I{s.cg_iters}, s.wall_ms});
}

}  // namespace

extern "C" {

const char* sfem_last_error(void) { return g_last_error.c_str(); }

const char* sfem_status_name(sfem_status status) {
  switch (status) {
    case SFEM_OK: return "Ok";
    case SFEM_ERR_INTERNAL: return "Internal";
    default: break;
  }
  if (status > SFEM_OK && status < SFEM_ERR_INTERNAL) {
    return sfem::to_string(static_cast<sfem::ErrorCode>(status - 1)).data();
  }
  return "Unknown";
}

int sfem_status_is_abort(sfem_status status) {
  switch (status) {
    case SFEM_OK:
    case SFEM_ERR_INVALID_ARGUMENT:
    case SFEM_ERR_IO:
    case SFEM_ERR_NON_MANIFOLD:
    case SFEM_ERR_INCONSISTENT_ORIENTATION:
      return 0;
    default:
      return 1;
  }
}

sfem_status sfem_mesh_icosphere(int level, sfem_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(level >= 0 && level <= 9, "icosphere level must lie in [0, 9]");
    *out = new sfem_mesh{sfem::icosphere(level)};
  });
}

sfem_status sfem_mesh_torus(int level, sfem_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(level >= 0 && level <= 7, "torus level must lie in [0, 7]");
    *out = new sfem_mesh{sfem::torus_mesh(level)};
  });
}

sfem_status sfem_mesh_read_off(const char* path, sfem_mesh** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new sfem_mesh{sfem::read_off(path)};
  });
}

sfem_status sfem_mesh_write_off(const sfem_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh != nullptr && path != nullptr, "null argument");
    sfem::write_off(path, mesh->mesh);
  });
}

void sfem_mesh_free(sfem_mesh* mesh) { delete mesh; }

size_t sfem_mesh_num_nodes(const sfem_mesh* mesh) { return mesh ? mesh->mesh.num_nodes() : 0; }

size_t sfem_mesh_num_triangles(const sfem_mesh* mesh) {
  return mesh ? mesh->mesh.num_triangles() : 0;
}

double sfem_mesh_size(const sfem_mesh* mesh) { return mesh ? mesh->mesh.mesh_size() : 0.0; }

sfem_status sfem_convergence(const char* problem, const int* levels, size_t num_levels,
                             const double* taus, size_t num_taus, double t_end,
                             const char* csv_path) {
  return guarded([&] {
    require(problem != nullptr && csv_path != nullptr, "null argument");
    require(levels != nullptr && num_levels > 0, "no mesh levels");
    require(taus != nullptr && num_taus > 0, "no time steps");
    const sfem::Problem p = sfem::find_problem(problem);
    std::ofstream out = open_csv(csv_path);
    sfem::CsvWriter csv(out, sfem::kConvergenceHeader);
    for (size_t i = 0; i < num_levels; ++i) {
      require(levels[i] >= 0 && levels[i] <= 9, "mesh level must lie in [0, 9]");
      const sfem::SurfaceMesh mesh = p.mesh_family(levels[i]);
      for (size_t j = 0; j < num_taus; ++j) {
        const sfem::ConvergenceRow r = sfem::uniform_run(p, mesh, taus[j], t_end);
        csv.row({r.h, r.tau, static_cast<std::int64_t>(r.dofs), r.err_linf_l2, r.err_l2_h1,
                 r.estimator});
      }
    }
  });
}

sfem_status sfem_run_config_default(sfem_run_config* config) {
  return guarded([&] {
    require(config != nullptr, "null argument");
    const sfem::AdaptiveConfig d;
    *config = sfem_run_config{d.tol,
                              d.tau0,
                              d.t_end,
                              d.theta,
                              d.theta_star,
                              SFEM_BULK,
                              SFEM_NVB,
                              SFEM_COARSEN_MATCHING,
                              d.max_spatial_iters,
                              d.max_coarsen_iters,
                              0.0,
                              static_cast<uint64_t>(d.dof_cap),
                              -1};
  });
}

sfem_status sfem_run(const char* problem, const sfem_run_config* config, const char* csv_path,
                     const char* snapshot_dir, sfem_runlog** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(problem != nullptr && config != nullptr, "null argument");
    const sfem::Problem p = sfem::find_problem(problem);
    const sfem::AdaptiveConfig c = to_config(*config);
    const int level = config->initial_level >= 0 ? config->initial_level
                                                 : sfem::initial_level_for(p, c.tol);
    require(level <= 9, "initial level must not exceed 9");

    std::ofstream csv_file;
    std::optional<sfem::CsvWriter> csv;
    if (csv_path) {
      csv_file = open_csv(csv_path);
      csv.emplace(csv_file, sfem::kRunLogHeader);
    }
    std::filesystem::path snapshots;
    if (snapshot_dir) {
      snapshots = snapshot_dir;
      std::error_code ec;
      std::filesystem::create_directories(snapshots, ec);
      if (ec) {
        throw sfem::Error(sfem::ErrorCode::kIo,
                          "cannot create '" + snapshots.string() + "': " + ec.message());
      }
    }
    auto observer = [&](const sfem::StepRecord& s, const sfem::SurfaceMesh& mesh,
                        const sfem::FeFunction& u) {
      if (csv) write_runlog_row(*csv, s);
      if (snapshot_dir) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%05d.vtk", s.step);
        sfem::write_vtk(snapshots / name, mesh, u);
      }
    };
    sfem::RunResult result = sfem::run_adaptive(p, p.mesh_family(level), c, observer);
    if (out) *out = new sfem_runlog{std::move(result.log), result.mesh.num_nodes()};
  });
}

void sfem_runlog_free(sfem_runlog* log) { delete log; }

size_t sfem_runlog_num_steps(const sfem_runlog* log) { return log ? log->log.steps.size() : 0; }

sfem_status sfem_runlog_step(const sfem_runlog* log, size_t index, sfem_step_record* out) {
  return guarded([&] {
    require(log != nullptr && out != nullptr, "null argument");
    require(index < log->log.steps.size(), "step index out of range");
    const sfem::StepRecord& s = log->log.steps[index];
    *out = sfem_step_record{s.step,
                            s.t,
                            s.tau,
                            static_cast<uint64_t>(s.dofs),
                            s.eta_h_sq,
                            s.eta_tau_sq,
                            s.eta_c_sq,
                            s.eta_combined,
                            s.spatial_iters,
                            s.coarsen_iters,
                            static_cast<uint64_t>(s.nodes_removed),
                            s.cg_iters,
                            s.wall_ms,
                            s.rejections};
  });
}

uint64_t sfem_runlog_peak_dofs(const sfem_runlog* log) { return log ? log->log.peak_dofs : 0; }

uint64_t sfem_runlog_final_dofs(const sfem_runlog* log) { return log ? log->final_dofs : 0; }

uint64_t sfem_runlog_dof_steps(const sfem_runlog* log) {
  return log ? log->log.cumulative_dof_steps : 0;
}

sfem_status sfem_verify_geometry(const char* surface, const int* levels, size_t num_levels,
                                 const char* csv_path, double orders[3]) {
  return guarded([&] {
    require(surface != nullptr && csv_path != nullptr, "null argument");
    require(levels != nullptr && num_levels > 0, "no mesh levels");
    const std::string name = surface;
    std::vector<int> level_list(levels, levels + num_levels);
    std::vector<sfem::GeometryRow> rows;
    if (name == "sphere") {
      for (int l : level_list) require(l >= 0 && l <= 8, "sphere level must lie in [0, 8]");
      rows = sfem::verify_geometry(sfem::LevelSetSurface::unit_sphere(),
                                   [](int l) { return sfem::icosphere(l); }, level_list);
    } else if (name == "torus") {
      for (int l : level_list) require(l >= 0 && l <= 6, "torus level must lie in [0, 6]");
      rows = sfem::verify_geometry(sfem::LevelSetSurface::torus(),
                                   [](int l) { return sfem::torus_mesh(l); }, level_list);
    } else {
      require(false, "surface must be 'sphere' or 'torus'");
    }
    std::ofstream out = open_csv(csv_path);
    sfem::CsvWriter csv(out, sfem::kGeometryHeader);
    std::vector<double> h, d, mu, op;
    for (const sfem::GeometryRow& r : rows) {
      csv.row({std::int64_t{r.level}, r.h, r.max_abs_d, r.max_abs_one_minus_mu,
               r.max_norm_P_minus_Atilde});
      h.push_back(r.h);
      d.push_back(r.max_abs_d);
      mu.push_back(r.max_abs_one_minus_mu);
      op.push_back(r.max_norm_P_minus_Atilde);
    }
    if (orders) {
      orders[0] = orders[1] = orders[2] = 0.0;
      if (rows.size() >= 2) {
        orders[0] = sfem::fitted_order(h, d);
        orders[1] = sfem::fitted_order(h, mu);
        orders[2] = sfem::fitted_order(h, op);
      }
    }
  });
}

sfem_status sfem_timing(const char* csv_path) {
  return guarded([&] {
    require(csv_path != nullptr, "null argument");
    std::ofstream out = open_csv(csv_path);
    sfem::CsvWriter csv(out, sfem::kTimingHeader);
    for (const sfem::TimingRow& r : sfem::timing_comparison()) {
      csv.row({sfem::to_string(r.strategy), sfem::to_string(r.coarsening), r.wall_ms,
               static_cast<std::int64_t>(r.dof_steps), static_cast<std::int64_t>(r.steps),
               static_cast<std::int64_t>(r.peak_dofs), static_cast<std::int64_t>(r.final_dofs)});
    }
  });
}

}  // extern "C"
