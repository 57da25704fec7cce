#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sfem/fe_function.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

inline constexpr std::string_view kConvergenceHeader =
    "h,tau,dofs,err_linf_l2,err_l2_h1,estimator";
inline constexpr std::string_view kRunLogHeader =
    "step,t,tau,dofs,eta_h_sq,eta_tau_sq,eta_c_sq,eta_combined,spatial_iters,coarsen_iters,"
    "nodes_removed,cg_iters,wall_ms";
inline constexpr std::string_view kGeometryHeader =
    "level,h,max_abs_d,max_abs_one_minus_mu,max_norm_P_minus_Atilde";
inline constexpr std::string_view kTimingHeader =
    "refinement,coarsening,wall_ms,dof_steps,steps,peak_dofs,final_dofs";

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double value);

/// Comma-separated rows with locale-independent number formatting.
class CsvWriter {
 public:
  using Field = std::variant<double, std::int64_t, std::string>;

  CsvWriter(std::ostream& out, std::string_view header);

  void row(const std::vector<Field>& fields);

 private:
  std::ostream* out_;
};

/// Reads an OFF triangle mesh. Throws kIo on malformed input and the mesh
/// validation errors otherwise.
SurfaceMesh read_off(const std::filesystem::path& path);
void write_off(const std::filesystem::path& path, const SurfaceMesh& mesh);

/// Legacy-VTK ASCII POLYDATA with point scalar `u`.
void write_vtk(const std::filesystem::path& path, const SurfaceMesh& mesh, const FeFunction& u);

}  // namespace sfem
