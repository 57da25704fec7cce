#include "sfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfem/error.hpp"

namespace sfem {

// ------------------------------------------------------------- FeFunction

FeFunction FeFunction::constant(const SurfaceMesh& mesh, double value) {
  return FeFunction(mesh.generation(), std::vector<double>(mesh.num_nodes(), value));
}

FeFunction FeFunction::from_values(const SurfaceMesh& mesh, std::vector<double> values) {
  if (values.size() != mesh.num_nodes()) {
    throw Error(ErrorCode::kInvalidArgument, "value count does not match node count");
  }
  return FeFunction(mesh.generation(), std::move(values));
}

void require_same_generation(const SurfaceMesh& mesh, const FeFunction& f) {
  if (f.mesh_generation != mesh.generation() || f.size() != mesh.num_nodes()) {
    std::ostringstream msg;
    msg << "function of mesh generation " << f.mesh_generation << " used on generation "
        << mesh.generation();
    throw Error(ErrorCode::kGenerationMismatch, msg.str());
  }
}

// -------------------------------------------------------------- quadrature

const QuadratureRule& QuadratureRule::edge_midpoints() {
  static const QuadratureRule rule{
      {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 2};
  return rule;
}

const QuadratureRule& QuadratureRule::degree4() {
  static const QuadratureRule rule = [] {
    constexpr double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1;
    constexpr double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2;
    constexpr double w1 = 0.223381589678011, w2 = 0.109951743655322;
    return QuadratureRule{{{a1, a1, b1},
                           {a1, b1, a1},
                           {b1, a1, a1},
                           {a2, a2, b2},
                           {a2, b2, a2},
                           {b2, a2, a2}},
                          {w1, w1, w1, w2, w2, w2},
                          4};
  }();
  return rule;
}

// ----------------------------------------------------------- local matrices

namespace {

std::array<Vec3, 3> basis_gradients(const Vec3& x0, const Vec3& x1, const Vec3& x2) {
  const Vec3 cross = (x1 - x0).cross(x2 - x0);
  const double twice_area = cross.norm();
  if (!(twice_area > 0.0)) throw Error(ErrorCode::kDegenerateTriangle, "degenerate triangle");
  const Vec3 n = cross / twice_area;
  const std::array<const Vec3*, 3> x{&x0, &x1, &x2};
  std::array<Vec3, 3> g;
  for (int i = 0; i < 3; ++i) {
    g[i] = n.cross(*x[(i + 2) % 3] - *x[(i + 1) % 3]) / twice_area;
  }
  return g;
}

const Vec3& node(const SurfaceMesh& mesh, TriId t, int i) {
  return mesh.nodes()[mesh.triangles()[t][i]];
}

}  // namespace

Vec3 element_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                      const std::array<double, 3>& values) {
  const auto g = basis_gradients(x0, x1, x2);
  return values[0] * g[0] + values[1] * g[1] + values[2] * g[2];
}

Vec3 element_gradient(const SurfaceMesh& mesh, TriId t, const FeFunction& u) {
  const Triangle& tri = mesh.triangles()[t];
  return element_gradient(node(mesh, t, 0), node(mesh, t, 1), node(mesh, t, 2),
                          {u[tri[0]], u[tri[1]], u[tri[2]]});
}

std::array<std::array<double, 3>, 3> local_mass(double area) {
  const double off = area / 12.0;
  return {{{2 * off, off, off}, {off, 2 * off, off}, {off, off, 2 * off}}};
}

std::array<std::array<double, 3>, 3> local_stiffness(const Vec3& x0, const Vec3& x1,
                                                     const Vec3& x2) {
  const auto g = basis_gradients(x0, x1, x2);
  const double area = 0.5 * (x1 - x0).cross(x2 - x0).norm();
  std::array<std::array<double, 3>, 3> K{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) K[i][j] = area * g[i].dot(g[j]);
  }
  return K;
}

// --------------------------------------------------------- SparseOperator

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
  Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd out = matrix_ * in;
  return {out.data(), out.data() + out.size()};
}

double SparseOperator::bilinear_form(std::span<const double> x, std::span<const double> y) const {
  Eigen::Map<const Eigen::VectorXd> a(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<const Eigen::VectorXd> b(y.data(), static_cast<Eigen::Index>(y.size()));
  return a.dot(matrix_ * b);
}

double SparseOperator::quadratic_form(std::span<const double> x) const {
  return bilinear_form(x, x);
}

double SparseOperator::max_asymmetry() const {
  Matrix transposed = matrix_.transpose();
  Matrix diff = matrix_ - transposed;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) {
    worst = std::max(worst, std::abs(diff.valuePtr()[k]));
  }
  return worst;
}

Operators assemble(const SurfaceMesh& mesh) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> mass, stiff;
  mass.reserve(9 * mesh.num_triangles());
  stiff.reserve(9 * mesh.num_triangles());
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    const auto M = local_mass(mesh.element(t).area);
    const auto K = local_stiffness(node(mesh, t, 0), node(mesh, t, 1), node(mesh, t, 2));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        mass.emplace_back(tri[i], tri[j], M[i][j]);
        stiff.emplace_back(tri[i], tri[j], K[i][j]);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  SparseOperator::Matrix Mm(n, n), Km(n, n);
  Mm.setFromTriplets(mass.begin(), mass.end());
  Km.setFromTriplets(stiff.begin(), stiff.end());
  return {SparseOperator(mesh.generation(), std::move(Mm)),
          SparseOperator(mesh.generation(), std::move(Km))};
}

FeFunction interpolate(const SurfaceMesh& mesh, const SpaceTimeField& field, double time) {
  std::vector<double> values(mesh.num_nodes());
  for (NodeId i = 0; i < mesh.num_nodes(); ++i) values[i] = field(mesh.nodes()[i], time);
  return FeFunction(mesh.generation(), std::move(values));
}

// ------------------------------------------------------------------ solver

CgResult conjugate_gradient(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                            std::span<const double> rhs, std::span<const double> initial,
                            const CgOptions& options) {
  const Eigen::Index n = A.rows();
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
  Eigen::VectorXd x = initial.empty() ? Eigen::VectorXd::Zero(n)
                                      : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                                            initial.data(), n));
  const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();

  CgResult result;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    result.solution.assign(static_cast<std::size_t>(n), 0.0);
    return result;
  }
  Eigen::VectorXd r = b - A * x;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd q(n);
  double rho = r.dot(z);
  const double tol = options.relative_tolerance * b_norm;
  const long cap = static_cast<long>(
      std::ceil(options.max_iterations_per_dof * static_cast<double>(std::max<Eigen::Index>(n, 1))));

  int it = 0;
  double r_norm = r.norm();
  while (r_norm > tol) {
    if (it >= cap) {
      std::ostringstream msg;
      msg << "conjugate gradients did not reach " << options.relative_tolerance << " in " << cap
          << " iterations (residual " << r_norm / b_norm << ")";
      throw Error(ErrorCode::kSolverDivergence, msg.str());
    }
    q.noalias() = A * p;
    const double curvature = p.dot(q);
    if (!(curvature > 0.0) || !std::isfinite(curvature)) {
      throw Error(ErrorCode::kSolverDivergence, "conjugate gradients broke down: matrix is not SPD");
    }
    const double alpha = rho / curvature;
    x += alpha * p;
    r -= alpha * q;
    z = inv_diag.cwiseProduct(r);
    const double rho_next = r.dot(z);
    p = z + (rho_next / rho) * p;
    rho = rho_next;
    r_norm = r.norm();
    ++it;
  }
  result.solution.assign(x.data(), x.data() + n);
  result.iterations = it;
  result.relative_residual = r_norm / b_norm;
  return result;
}

StepResult backward_euler_step(const Operators& ops, const FeFunction& u_prev,
                               const FeFunction& f, double tau, const CgOptions& options) {
  const std::uint64_t gen = ops.mass.generation();
  if (u_prev.mesh_generation != gen || f.mesh_generation != gen ||
      ops.stiffness.generation() != gen || u_prev.size() != ops.mass.dimension() ||
      f.size() != ops.mass.dimension()) {
    throw Error(ErrorCode::kGenerationMismatch, "step operands live on different meshes");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "time step must be positive");

  const auto n = static_cast<Eigen::Index>(u_prev.size());
  Eigen::Map<const Eigen::VectorXd> up(u_prev.coefficients.data(), n);
  Eigen::Map<const Eigen::VectorXd> fv(f.coefficients.data(), n);
  const Eigen::VectorXd rhs = ops.mass.matrix() * (up + tau * fv);
  const SparseOperator::Matrix system = ops.mass.matrix() + tau * ops.stiffness.matrix();

  CgResult cg = conjugate_gradient(system, {rhs.data(), static_cast<std::size_t>(n)},
                                   u_prev.coefficients, options);
  return {FeFunction(gen, std::move(cg.solution)), cg.iterations, cg.relative_residual};
}

// ------------------------------------------------------------------ errors

namespace {

// Calls visit(x_on_mesh, lifted, weight_on_gamma, u_h(x), lambda) for every
// degree-4 quadrature point; weight includes area and mu_h.
template <typename Visit>
void for_each_lifted_point(const SurfaceMesh& mesh, const FeFunction& u_h,
                           const LevelSetSurface& surface, Visit&& visit) {
  const QuadratureRule& rule = QuadratureRule::degree4();
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    const Vec3& x0 = mesh.nodes()[tri[0]];
    const Vec3& x1 = mesh.nodes()[tri[1]];
    const Vec3& x2 = mesh.nodes()[tri[2]];
    const double area = mesh.element(t).area;
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      const auto& l = rule.barycentric[k];
      const Vec3 x = l[0] * x0 + l[1] * x1 + l[2] * x2;
      const Vec3 y = lift(surface, x);
      const double mu = measure_ratio(surface, x, x1 - x0, x2 - x0);
      const double uh = l[0] * u_h[tri[0]] + l[1] * u_h[tri[1]] + l[2] * u_h[tri[2]];
      visit(t, x, y, rule.weights[k] * area * mu, uh);
    }
  }
}

}  // namespace

ErrorNorms errors_vs_exact(const SurfaceMesh& mesh, const FeFunction& u_h,
                           const ExactSolution& exact, double time,
                           const LevelSetSurface& surface) {
  require_same_generation(mesh, u_h);
  std::vector<Vec3> grads(mesh.num_triangles());
  for (TriId t = 0; t < mesh.num_triangles(); ++t) grads[t] = element_gradient(mesh, t, u_h);

  double l2 = 0.0, h1 = 0.0;
  for_each_lifted_point(mesh, u_h, surface,
                        [&](TriId t, const Vec3& x, const Vec3& y, double w, double uh) {
                          const double e = exact.value(y, time) - uh;
                          l2 += w * e * e;
                          if (exact.surface_gradient) {
                            const Vec3 g = lift_gradient(surface, x, y, mesh.element(t).normal,
                                                         grads[t]);
                            h1 += w * (exact.surface_gradient(y, time) - g).squaredNorm();
                          }
                        });
  return {std::sqrt(l2), std::sqrt(h1)};
}

double l2_norm_discrete(const SurfaceMesh& mesh, const FeFunction& u_h) {
  require_same_generation(mesh, u_h);
  double sum = 0.0;
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    const auto M = local_mass(mesh.element(t).area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) sum += M[i][j] * u_h[tri[i]] * u_h[tri[j]];
    }
  }
  return std::sqrt(sum);
}

double l2_norm_lifted(const SurfaceMesh& mesh, const FeFunction& u_h,
                      const LevelSetSurface& surface) {
  return l2_distance_lifted(mesh, u_h, [](const Vec3&) { return 0.0; }, surface);
}

double l2_distance_lifted(const SurfaceMesh& mesh, const FeFunction& u_h,
                          const std::function<double(const Vec3&)>& g,
                          const LevelSetSurface& surface) {
  require_same_generation(mesh, u_h);
  double sum = 0.0;
  for_each_lifted_point(mesh, u_h, surface,
                        [&](TriId, const Vec3&, const Vec3& y, double w, double uh) {
                          const double e = g(y) - uh;
                          sum += w * e * e;
                        });
  return std::sqrt(sum);
}

}  // namespace sfem
