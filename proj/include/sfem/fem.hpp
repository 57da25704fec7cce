#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "sfem/fe_function.hpp"
#include "sfem/geometry.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

/// Symmetric quadrature on the reference triangle. Weights sum to 1, so
/// integrals are area * sum_k w_k f(x_k).
struct QuadratureRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
  int degree = 0;

  static const QuadratureRule& edge_midpoints();  // degree 2
  static const QuadratureRule& degree4();         // 6 points (Strang-Fix)
};

/// Constant tangential gradient of the affine interpolant of `values` on the
/// flat triangle (x0, x1, x2). Throws kDegenerateTriangle.
Vec3 element_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                      const std::array<double, 3>& values);
Vec3 element_gradient(const SurfaceMesh& mesh, TriId t, const FeFunction& u);

/// Local P1 matrices of one flat triangle.
std::array<std::array<double, 3>, 3> local_mass(double area);
std::array<std::array<double, 3>, 3> local_stiffness(const Vec3& x0, const Vec3& x1,
                                                     const Vec3& x2);

/// Symmetric sparse matrix in compressed row storage.
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseOperator() = default;
  SparseOperator(std::uint64_t generation, Matrix matrix)
      : generation_(generation), matrix_(std::move(matrix)) {}

  std::uint64_t generation() const { return generation_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }

  std::vector<double> apply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  double bilinear_form(std::span<const double> x, std::span<const double> y) const;
  double max_asymmetry() const;

 private:
  std::uint64_t generation_ = 0;
  Matrix matrix_;
};

struct Operators {
  SparseOperator mass;
  SparseOperator stiffness;
};

/// Exact P1 mass and stiffness matrices of the discrete surface.
Operators assemble(const SurfaceMesh& mesh);

using SpaceTimeField = std::function<double(const Vec3&, double)>;
using SpaceTimeVector = std::function<Vec3(const Vec3&, double)>;

/// Nodal interpolant of a field at time t.
FeFunction interpolate(const SurfaceMesh& mesh, const SpaceTimeField& field, double time);

struct CgOptions {
  double relative_tolerance = 1e-10;
  /// Iteration cap as a multiple of the dimension.
  double max_iterations_per_dof = 10.0;
};

struct CgResult {
  std::vector<double> solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for an SPD system. `initial`
/// may be empty. Throws kSolverDivergence past the iteration cap or on a
/// non-positive curvature p^T A p.
CgResult conjugate_gradient(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                            std::span<const double> rhs, std::span<const double> initial = {},
                            const CgOptions& options = {});

struct StepResult {
  FeFunction solution;
  int cg_iterations = 0;
  double relative_residual = 0.0;
};

/// One backward Euler step on a fixed mesh: (M + tau A) u = M (u_prev + tau f).
StepResult backward_euler_step(const Operators& ops, const FeFunction& u_prev_transferred,
                               const FeFunction& f, double tau, const CgOptions& options = {});

/// Exact solution data for error measurement on the continuous surface.
struct ExactSolution {
  SpaceTimeField value;
  SpaceTimeVector surface_gradient;
};

struct ErrorNorms {
  double l2 = 0.0;       // ||u - u_h^l||_{L2(Gamma)}
  double h1_semi = 0.0;  // ||grad_Gamma u - grad_Gamma u_h^l||_{L2(Gamma)}
};

/// Errors of u_h against an exact solution, integrated over the lifted mesh
/// with the degree-4 rule and the measure quotient mu_h.
ErrorNorms errors_vs_exact(const SurfaceMesh& mesh, const FeFunction& u_h,
                           const ExactSolution& exact, double time,
                           const LevelSetSurface& surface);

/// ||u_h||_{L2(Gamma_h)} via the mass matrix.
double l2_norm_discrete(const SurfaceMesh& mesh, const FeFunction& u_h);

/// ||u_h^l||_{L2(Gamma)} by mu_h-weighted degree-4 quadrature.
double l2_norm_lifted(const SurfaceMesh& mesh, const FeFunction& u_h,
                      const LevelSetSurface& surface);

/// ||u_h^l - g||_{L2(Gamma)} for a field g on the surface.
double l2_distance_lifted(const SurfaceMesh& mesh, const FeFunction& u_h,
                          const std::function<double(const Vec3&)>& g,
                          const LevelSetSurface& surface);

}  // namespace sfem
