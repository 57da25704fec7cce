#include "sfem/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sfem/error.hpp"

namespace sfem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxLiftIterations = 100;
constexpr double kLiftIncrement = 1e-12;

}  // namespace

LevelSetSurface::LevelSetSurface(std::string name, ScalarField distance,
                                 VectorField gradient, MatrixField hessian,
                                 double bounding_radius)
    : LevelSetSurface(std::move(name), std::move(distance), std::move(gradient),
                      std::move(hessian), bounding_radius, bounding_radius / 4.0,
                      bounding_radius / 4.0) {}

LevelSetSurface::LevelSetSurface(std::string name, ScalarField distance,
                                 VectorField gradient, MatrixField hessian,
                                 double bounding_radius, double inner_tube,
                                 double outer_tube)
    : name_(std::move(name)),
      distance_(std::move(distance)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      bounding_radius_(bounding_radius),
      inner_tube_(inner_tube),
      outer_tube_(outer_tube) {
  if (!distance_ || !gradient_ || !hessian_) {
    throw Error(ErrorCode::kInvalidArgument, "level set surface needs d, grad d and Hess d");
  }
  if (!(bounding_radius_ > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bounding radius must be positive");
  }
}

LevelSetSurface LevelSetSurface::unit_sphere() { return sphere(1.0); }

LevelSetSurface LevelSetSurface::sphere(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sphere radius must be positive");
  auto d = [radius](const Vec3& x) { return x.norm() - radius; };
  auto g = [](const Vec3& x) -> Vec3 { return x.normalized(); };
  auto H = [](const Vec3& x) -> Mat3 {
    const double r = x.norm();
    const Vec3 n = x / r;
    return (Mat3::Identity() - n * n.transpose()) / r;
  };
  // Inside, the projection is unique up to the centre; outside, everywhere.
  return LevelSetSurface("sphere", d, g, H, radius, radius, kInf);
}

LevelSetSurface LevelSetSurface::torus(double major_radius, double minor_radius) {
  if (!(minor_radius > 0.0) || !(major_radius > minor_radius)) {
    throw Error(ErrorCode::kInvalidArgument, "torus needs 0 < minor radius < major radius");
  }
  const double R = major_radius;
  const double r = minor_radius;
  auto d = [R, r](const Vec3& x) {
    const double rho = std::hypot(x[0], x[1]);
    return std::hypot(rho - R, x[2]) - r;
  };
  // grad d = (x - c(x)) / s, with c(x) the closest point on the core circle.
  auto g = [R](const Vec3& x) -> Vec3 {
    const double rho = std::hypot(x[0], x[1]);
    const Vec3 core(R * x[0] / rho, R * x[1] / rho, 0.0);
    return (x - core).normalized();
  };
  // Hess d = (I - n n^T - (R / rho) e_phi e_phi^T) / s.
  auto H = [R](const Vec3& x) -> Mat3 {
    const double rho = std::hypot(x[0], x[1]);
    const Vec3 core(R * x[0] / rho, R * x[1] / rho, 0.0);
    const Vec3 diff = x - core;
    const double s = diff.norm();
    const Vec3 n = diff / s;
    const Vec3 e_phi(-x[1] / rho, x[0] / rho, 0.0);
    return (Mat3::Identity() - n * n.transpose() - (R / rho) * e_phi * e_phi.transpose()) / s;
  };
  return LevelSetSurface("torus", d, g, H, R + r, r, R - r);
}

LevelSetSurface LevelSetSurface::plane() {
  auto d = [](const Vec3& x) { return x[2]; };
  auto g = [](const Vec3&) -> Vec3 { return Vec3::UnitZ(); };
  auto H = [](const Vec3&) -> Mat3 { return Mat3::Zero(); };
  return LevelSetSurface("plane", d, g, H, 1.0, kInf, kInf);
}

bool LevelSetSurface::in_tube(const Vec3& x) const {
  const double dist = distance(x);
  return dist > -inner_tube_ && dist < outer_tube_;
}

Vec3 LevelSetSurface::normal(const Vec3& x) const { return gradient(x).normalized(); }

Vec3 lift(const LevelSetSurface& surface, const Vec3& x) {
  if (!surface.in_tube(x)) {
    std::ostringstream msg;
    msg << "point (" << x[0] << ", " << x[1] << ", " << x[2] << ") is outside the tube of "
        << surface.name();
    throw Error(ErrorCode::kOutsideTube, msg.str());
  }
  const double dist = surface.distance(x);
  if (dist == 0.0) return x;
  Vec3 y = x - dist * surface.gradient(x);
  for (int k = 0; k < kMaxLiftIterations; ++k) {
    const Vec3 g = surface.gradient(y);
    const Vec3 next = x - dist * g / g.norm();
    const double step = (next - y).norm();
    y = next;
    if (step < kLiftIncrement) return y;
  }
  throw Error(ErrorCode::kNonConvergence, "closest-point lift did not converge");
}

Mat3 closest_point_jacobian(const LevelSetSurface& surface, const Vec3& x) {
  const Vec3 g = surface.gradient(x);
  return Mat3::Identity() - g * g.transpose() - surface.distance(x) * surface.hessian(x);
}

double measure_ratio(const LevelSetSurface& surface, const Vec3& point, const Vec3& t1,
                     const Vec3& t2) {
  const double flat = t1.cross(t2).norm();
  if (!(flat > 0.0)) throw Error(ErrorCode::kDegenerateTriangle, "tangents are parallel");
  const Mat3 Dp = closest_point_jacobian(surface, point);
  return (Dp * t1).cross(Dp * t2).norm() / flat;
}

Mat3 inverse_distance_factor(const LevelSetSurface& surface, const Vec3& x,
                             const Vec3& lifted) {
  const double dist = surface.distance(x);
  const Mat3 W = surface.hessian(lifted);
  const Mat3 factor = Mat3::Identity() - dist * W;
  const double det = factor.determinant();
  if (!(std::abs(det) > 1e-14)) {
    throw Error(ErrorCode::kSingularShapeOperator, "I - d W is singular (point beyond reach)");
  }
  return factor.inverse();
}

namespace {

Mat3 normal_skew_projector(const Vec3& nu_h, const Vec3& nu) {
  const double c = nu_h.dot(nu);
  if (!(c > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "element normal is not aligned with the surface normal");
  }
  return Mat3::Identity() - nu_h * nu.transpose() / c;
}

}  // namespace

GeometricOperators geometric_operators(const LevelSetSurface& surface, const Vec3& x_on_mesh,
                                       const Vec3& nu_h) {
  const Vec3 lifted = lift(surface, x_on_mesh);
  const Vec3 nu = surface.normal(lifted);

  GeometricOperators ops;
  ops.P = Mat3::Identity() - nu * nu.transpose();
  ops.P_h = Mat3::Identity() - nu_h * nu_h.transpose();

  // Tangent frame of the element plane.
  const Vec3 seed = std::abs(nu_h[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = nu_h.cross(seed).normalized();
  const Vec3 t2 = nu_h.cross(t1);
  ops.mu_h = measure_ratio(surface, x_on_mesh, t1, t2);

  const Mat3 Q = normal_skew_projector(nu_h, nu);
  const Mat3 inv = inverse_distance_factor(surface, x_on_mesh, lifted);
  const Mat3 R = ops.mu_h * ops.P_h * Q.transpose() * inv * inv * Q;
  ops.A_tilde = R * ops.P_h;
  return ops;
}

Vec3 lift_gradient(const LevelSetSurface& surface, const Vec3& x, const Vec3& lifted,
                   const Vec3& nu_h, const Vec3& discrete_gradient) {
  const Vec3 nu = surface.normal(lifted);
  return inverse_distance_factor(surface, x, lifted) * normal_skew_projector(nu_h, nu) *
         discrete_gradient;
}

}  // namespace sfem
