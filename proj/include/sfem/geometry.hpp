#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

namespace sfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Closed surface given as the zero level set of a signed distance function.
///
/// The three callbacks must be consistent (gradient and Hessian of the same
/// distance). `lift` only accepts points with -inner_tube < d < outer_tube.
/// Surfaces built from callbacks default both widths to bounding_radius / 4.
class LevelSetSurface {
 public:
  using ScalarField = std::function<double(const Vec3&)>;
  using VectorField = std::function<Vec3(const Vec3&)>;
  using MatrixField = std::function<Mat3(const Vec3&)>;

  LevelSetSurface(std::string name, ScalarField distance, VectorField gradient,
                  MatrixField hessian, double bounding_radius);
  LevelSetSurface(std::string name, ScalarField distance, VectorField gradient,
                  MatrixField hessian, double bounding_radius, double inner_tube,
                  double outer_tube);

  static LevelSetSurface unit_sphere();
  static LevelSetSurface sphere(double radius);
  static LevelSetSurface torus(double major_radius = 2.0, double minor_radius = 0.5);
  /// The plane x3 = 0. Not closed; used for checks where the exact answer is
  /// the identity map.
  static LevelSetSurface plane();

  const std::string& name() const { return name_; }
  double distance(const Vec3& x) const { return distance_(x); }
  Vec3 gradient(const Vec3& x) const { return gradient_(x); }
  Mat3 hessian(const Vec3& x) const { return hessian_(x); }
  double bounding_radius() const { return bounding_radius_; }
  double inner_tube() const { return inner_tube_; }
  double outer_tube() const { return outer_tube_; }
  bool in_tube(const Vec3& x) const;

  /// Unit normal at a point of the tube (normalized gradient).
  Vec3 normal(const Vec3& x) const;

 private:
  std::string name_;
  ScalarField distance_;
  VectorField gradient_;
  MatrixField hessian_;
  double bounding_radius_;
  double inner_tube_;
  double outer_tube_;
};

/// Closest-point projection onto the surface.
///
/// One-shot step y = x - d(x) grad d(x) followed by the fixed-point correction
/// y <- x - d(x) grad d(y) / |grad d(y)| until the increment drops below 1e-12.
/// Throws kOutsideTube or kNonConvergence (after 100 corrections).
Vec3 lift(const LevelSetSurface& surface, const Vec3& x);

/// Differential of the closest-point map, I - grad d grad d^T - d Hess d.
Mat3 closest_point_jacobian(const LevelSetSurface& surface, const Vec3& x);

/// Surface measure quotient d(sigma)/d(sigma_h) at a point of a flat triangle
/// spanned by the tangents t1, t2.
double measure_ratio(const LevelSetSurface& surface, const Vec3& point,
                     const Vec3& t1, const Vec3& t2);

struct GeometricOperators {
  double mu_h = 1.0;
  Mat3 P = Mat3::Identity();        // I - nu nu^T
  Mat3 P_h = Mat3::Identity();      // I - nu_h nu_h^T
  Mat3 A_tilde = Mat3::Identity();  // R~_h P_h
};

/// Builds mu_h, P, P_h and the transformed operator A~_h = R~_h P_h at a
/// point of the discrete surface with unit element normal `nu_h`, where
///   R~_h = mu_h P_h Q^T (I - d W)^{-1} (I - d W)^{-1} Q,
///   Q    = I - nu_h nu^T / (nu_h . nu),
/// and W is the Weingarten map at the lifted point.
GeometricOperators geometric_operators(const LevelSetSurface& surface,
                                       const Vec3& x_on_mesh, const Vec3& nu_h);

/// (I - d W)^{-1} at x, with W evaluated at the closest point. Throws
/// kSingularShapeOperator when the factor is singular.
Mat3 inverse_distance_factor(const LevelSetSurface& surface, const Vec3& x,
                             const Vec3& lifted);

/// Lifted tangential gradient: (I - d W)^{-1} (I - nu_h nu^T/(nu_h.nu)) g_h.
Vec3 lift_gradient(const LevelSetSurface& surface, const Vec3& x, const Vec3& lifted,
                   const Vec3& nu_h, const Vec3& discrete_gradient);

}  // namespace sfem
