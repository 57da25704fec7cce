/* C interface of the surface heat-equation solver. Every function returns a
 * status code; on failure sfem_last_error() describes the most recent error
 * of the calling thread. Handles are opaque and owned by the caller. */
#ifndef SFEM_SFEM_H
#define SFEM_SFEM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SFEM_API __declspec(dllexport)
#else
#define SFEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sfem_status {
  SFEM_OK = 0,
  SFEM_ERR_INVALID_ARGUMENT,
  SFEM_ERR_IO,
  SFEM_ERR_NON_CONVERGENCE,
  SFEM_ERR_OUTSIDE_TUBE,
  SFEM_ERR_DEGENERATE_TRIANGLE,
  SFEM_ERR_SINGULAR_SHAPE_OPERATOR,
  SFEM_ERR_NON_MANIFOLD,
  SFEM_ERR_INCONSISTENT_ORIENTATION,
  SFEM_ERR_GENERATION_MISMATCH,
  SFEM_ERR_METADATA_MISSING,
  SFEM_ERR_STRATEGY_MISMATCH,
  SFEM_ERR_DEPTH_LIMIT,
  SFEM_ERR_SOLVER_DIVERGENCE,
  SFEM_ERR_TAU_UNDERFLOW,
  SFEM_ERR_DOF_CAP_EXCEEDED,
  SFEM_ERR_SPATIAL_STAGNATION,
  SFEM_ERR_INITIAL_DATA_TOO_COARSE,
  SFEM_ERR_INTERNAL
} sfem_status;

typedef enum sfem_criterion { SFEM_BULK = 0, SFEM_DOERFLER = 1 } sfem_criterion;
typedef enum sfem_strategy { SFEM_NVB = 0, SFEM_RGB = 1 } sfem_strategy;
typedef enum sfem_coarsening {
  SFEM_COARSEN_MATCHING = 0,
  SFEM_COARSEN_NONE = 1,
  SFEM_COARSEN_RESET = 2
} sfem_coarsening;

typedef struct sfem_mesh sfem_mesh;
typedef struct sfem_runlog sfem_runlog;

/* Adaptive run parameters. initial_level < 0 selects the coarsest mesh level
 * whose interpolant meets the initial-data tolerance; tau_min <= 0 selects
 * 1e-8 * t_end. */
typedef struct sfem_run_config {
  double tol;
  double tau0;
  double t_end;
  double theta;
  double theta_star;
  sfem_criterion criterion;
  sfem_strategy strategy;
  sfem_coarsening coarsening;
  int max_spatial_iters;
  int max_coarsen_iters;
  double tau_min;
  uint64_t dof_cap;
  int initial_level;
} sfem_run_config;

typedef struct sfem_step_record {
  int step;
  double t;
  double tau;
  uint64_t dofs;
  double eta_h_sq;
  double eta_tau_sq;
  double eta_c_sq;
  double eta_combined;
  int spatial_iters;
  int coarsen_iters;
  uint64_t nodes_removed;
  int cg_iters;
  double wall_ms;
  int rejections;
} sfem_step_record;

SFEM_API const char* sfem_last_error(void);
SFEM_API const char* sfem_status_name(sfem_status status);
/* Nonzero for aborts of the numerical pipeline (solver breakdown, adaptive
 * guards), zero for usage, I/O and input-validation failures. */
SFEM_API int sfem_status_is_abort(sfem_status status);

SFEM_API sfem_status sfem_mesh_icosphere(int level, sfem_mesh** out);
SFEM_API sfem_status sfem_mesh_torus(int level, sfem_mesh** out);
SFEM_API sfem_status sfem_mesh_read_off(const char* path, sfem_mesh** out);
SFEM_API sfem_status sfem_mesh_write_off(const sfem_mesh* mesh, const char* path);
SFEM_API void sfem_mesh_free(sfem_mesh* mesh);
SFEM_API size_t sfem_mesh_num_nodes(const sfem_mesh* mesh);
SFEM_API size_t sfem_mesh_num_triangles(const sfem_mesh* mesh);
SFEM_API double sfem_mesh_size(const sfem_mesh* mesh);

/* Writes the convergence CSV for uniform runs over all (level, tau) pairs. */
SFEM_API sfem_status sfem_convergence(const char* problem, const int* levels, size_t num_levels,
                                      const double* taus, size_t num_taus, double t_end,
                                      const char* csv_path);

SFEM_API sfem_status sfem_run_config_default(sfem_run_config* config);
/* Adaptive run. Rows are streamed to csv_path (may be NULL); a VTK snapshot
 * per accepted step is written to snapshot_dir (may be NULL). */
SFEM_API sfem_status sfem_run(const char* problem, const sfem_run_config* config,
                              const char* csv_path, const char* snapshot_dir,
                              sfem_runlog** out);
SFEM_API void sfem_runlog_free(sfem_runlog* log);
SFEM_API size_t sfem_runlog_num_steps(const sfem_runlog* log);
SFEM_API sfem_status sfem_runlog_step(const sfem_runlog* log, size_t index,
                                      sfem_step_record* out);
SFEM_API uint64_t sfem_runlog_peak_dofs(const sfem_runlog* log);
SFEM_API uint64_t sfem_runlog_final_dofs(const sfem_runlog* log);
SFEM_API uint64_t sfem_runlog_dof_steps(const sfem_runlog* log);

/* Geometry CSV for surface "sphere" or "torus"; orders (may be NULL)
 * receives the three fitted log-log slopes in column order. */
SFEM_API sfem_status sfem_verify_geometry(const char* surface, const int* levels,
                                          size_t num_levels, const char* csv_path,
                                          double orders[3]);

/* Strategy comparison on moving-peak-timing. */
SFEM_API sfem_status sfem_timing(const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* SFEM_SFEM_H */
