#include <doctest.h>

#include <cmath>
#include <random>

#include "sfem/error.hpp"
#include "sfem/geometry.hpp"
#include "sfem/mesh.hpp"

using namespace sfem;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Closest point on the torus (R, r) to x by brute-force sampling of the
// parametrization, refined by shrinking the sampling window.
Vec3 torus_closest_brute_force(const Vec3& x, double R, double r) {
  auto point = [&](double phi, double theta) {
    return Vec3((R + r * std::cos(theta)) * std::cos(phi), (R + r * std::cos(theta)) * std::sin(phi),
                r * std::sin(theta));
  };
  double best_phi = 0, best_theta = 0, best = 1e300;
  double span_phi = M_PI, span_theta = M_PI;
  for (int round = 0; round < 12; ++round) {
    const double c_phi = best_phi, c_theta = best_theta;
    for (int i = 0; i <= 80; ++i) {
      for (int j = 0; j <= 80; ++j) {
        const double phi = c_phi + span_phi * (2.0 * i / 80 - 1.0);
        const double theta = c_theta + span_theta * (2.0 * j / 80 - 1.0);
        const double dist = (point(phi, theta) - x).norm();
        if (dist < best) {
          best = dist;
          best_phi = phi;
          best_theta = theta;
        }
      }
    }
    span_phi /= 8.0;
    span_theta /= 8.0;
  }
  return point(best_phi, best_theta);
}

}  // namespace

TEST_CASE("lift on the unit sphere is radial projection") {
  const auto sphere = LevelSetSurface::unit_sphere();
  CHECK((lift(sphere, Vec3(2, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((lift(sphere, Vec3(0, 0, 0.5)) - Vec3(0, 0, 1)).norm() < 1e-12);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.3, 3.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 x = radius(rng) * random_unit(rng);
    const Vec3 y = lift(sphere, x);
    CHECK((y - x.normalized()).norm() < 1e-12);
    CHECK(std::abs(sphere.distance(y)) <= 1e-12);
    CHECK((y - (x - sphere.distance(x) * sphere.normal(y))).norm() < 1e-12);
  }
}

TEST_CASE("lift on the torus matches brute-force closest point") {
  const auto torus = LevelSetSurface::torus(2.0, 0.5);
  CHECK((lift(torus, Vec3(3, 0, 0)) - Vec3(2.5, 0, 0)).norm() < 1e-12);
  CHECK((torus_closest_brute_force(Vec3(3, 0, 0), 2.0, 0.5) - Vec3(2.5, 0, 0)).norm() < 1e-8);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> offset(-0.3, 0.3);
  for (int k = 0; k < 20; ++k) {
    const double phi = angle(rng), theta = angle(rng), rho = 0.5 + offset(rng);
    const Vec3 x((2.0 + rho * std::cos(theta)) * std::cos(phi),
                 (2.0 + rho * std::cos(theta)) * std::sin(phi), rho * std::sin(theta));
    const Vec3 y = lift(torus, x);
    CHECK(std::abs(torus.distance(y)) <= 1e-12);
    CHECK((y - torus_closest_brute_force(x, 2.0, 0.5)).norm() < 1e-7);
  }
}

TEST_CASE("lift is idempotent") {
  std::mt19937_64 rng(3);
  for (const auto& surface : {LevelSetSurface::unit_sphere(), LevelSetSurface::torus()}) {
    for (int k = 0; k < 50; ++k) {
      const Vec3 seed = surface.name() == "torus" ? Vec3(Vec3(2.2, 0.3, 0.1) + 0.2 * random_unit(rng))
                                                  : Vec3(1.2 * random_unit(rng));
      const Vec3 y = lift(surface, seed);
      CHECK((lift(surface, y) - y).norm() < 1e-12);
    }
  }
}

TEST_CASE("lift rejects points outside the tube") {
  const auto torus = LevelSetSurface::torus(2.0, 0.5);
  try {
    lift(torus, Vec3(0, 0, 0));
    FAIL("expected OutsideTube");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutsideTube);
  }
  const auto sphere = LevelSetSurface::unit_sphere();
  CHECK_THROWS_AS(lift(sphere, Vec3(0, 0, 0)), Error);
}

TEST_CASE("signed distance gradients have unit length") {
  std::mt19937_64 rng(5);
  const auto sphere = LevelSetSurface::unit_sphere();
  const auto torus = LevelSetSurface::torus();
  for (int k = 0; k < 100; ++k) {
    const Vec3 xs = (0.8 + 0.4 * (k % 5) / 4.0) * random_unit(rng);
    CHECK(std::abs(sphere.gradient(xs).norm() - 1.0) < 1e-10);
    const Vec3 xt = lift(torus, Vec3(2.0, 0.0, 0.0) + 0.6 * random_unit(rng)) +
                    0.1 * random_unit(rng);
    CHECK(std::abs(torus.gradient(xt).norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("hessian of the signed distance matches finite differences") {
  std::mt19937_64 rng(9);
  const double eps = 1e-5;
  for (const auto& surface : {LevelSetSurface::unit_sphere(), LevelSetSurface::torus()}) {
    for (int k = 0; k < 20; ++k) {
      const Vec3 base = surface.name() == "torus" ? Vec3(0.0, 2.1, 0.2) : Vec3(0.6, 0.5, 0.7);
      const Vec3 x = base + 0.1 * random_unit(rng);
      const Mat3 H = surface.hessian(x);
      for (int j = 0; j < 3; ++j) {
        const Vec3 e = Vec3::Unit(j) * eps;
        const Vec3 col = (surface.gradient(x + e) - surface.gradient(x - e)) / (2 * eps);
        CHECK((H.col(j) - col).norm() < 1e-7);
      }
    }
  }
}

TEST_CASE("measure ratio") {
  SUBCASE("flat surface gives exactly one") {
    const auto plane = LevelSetSurface::plane();
    CHECK(measure_ratio(plane, Vec3(0.3, 0.2, 0), Vec3(1, 0, 0), Vec3(0.5, 2, 0)) == 1.0);
  }
  SUBCASE("tangent triangle at its own foot point") {
    const auto sphere = LevelSetSurface::unit_sphere();
    const Vec3 p(0, 0, 1);
    const double mu = measure_ratio(sphere, p, Vec3(1, 0, 0), Vec3(0, 1, 0));
    CHECK(mu == doctest::Approx(1.0).epsilon(1e-14));
    // Small flat triangle near p: mu_h - 1 is O(h^2).
    for (double h : {0.1, 0.05}) {
      const double m = measure_ratio(sphere, p + Vec3(h / 3, h / 3, 0) - Vec3(0, 0, h * h / 3),
                                     Vec3(1, 0, 0), Vec3(0, 1, 0));
      CHECK(std::abs(m - 1.0) < h);
    }
  }
  SUBCASE("inscribed equilateral triangle agrees with a finite-difference Jacobian") {
    const auto sphere = LevelSetSurface::unit_sphere();
    const Vec3 a = Vec3(1, 0.1, 0.2).normalized();
    const Vec3 b = Vec3(0.2, 1, 0.1).normalized();
    // Third vertex completing an equilateral triangle on the sphere.
    const Vec3 c = Vec3(0.1, 0.2, 1).normalized();
    const Vec3 centroid = (a + b + c) / 3.0;
    const Vec3 t1 = b - a, t2 = c - a;
    auto p = [](const Vec3& x) { return Vec3(x / x.norm()); };
    const double eps = 1e-6;
    const Vec3 d1 = (p(centroid + eps * t1) - p(centroid - eps * t1)) / (2 * eps);
    const Vec3 d2 = (p(centroid + eps * t2) - p(centroid - eps * t2)) / (2 * eps);
    const double oracle = d1.cross(d2).norm() / t1.cross(t2).norm();
    CHECK(measure_ratio(sphere, centroid, t1, t2) == doctest::Approx(oracle).epsilon(1e-6));
  }
  SUBCASE("degenerate tangents") {
    const auto sphere = LevelSetSurface::unit_sphere();
    CHECK_THROWS_AS(measure_ratio(sphere, Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(2, 0, 0)), Error);
  }
}

TEST_CASE("geometric operators") {
  SUBCASE("flat surface") {
    const auto plane = LevelSetSurface::plane();
    const auto ops = geometric_operators(plane, Vec3(0.4, -0.2, 0), Vec3(0, 0, 1));
    const Mat3 expected = Vec3(1, 1, 0).asDiagonal();
    CHECK((ops.A_tilde - expected).norm() < 1e-15);
    CHECK((ops.P_h - expected).norm() < 1e-15);
    CHECK(ops.mu_h == 1.0);
  }
  SUBCASE("on the sphere with exact normal") {
    const auto sphere = LevelSetSurface::unit_sphere();
    const Vec3 x = Vec3(0.3, -0.4, 0.5).normalized();
    const auto ops = geometric_operators(sphere, x, x);
    CHECK((ops.A_tilde - ops.P).norm() < 1e-12);
    CHECK(ops.mu_h == doctest::Approx(1.0));
  }
  SUBCASE("projectors are orthogonal rank-2 projectors") {
    const auto sphere = LevelSetSurface::unit_sphere();
    const Vec3 x = 0.98 * Vec3(0.1, 0.7, -0.2).normalized();
    const Vec3 nu_h = Vec3(0.15, 0.68, -0.22).normalized();
    const auto ops = geometric_operators(sphere, x, nu_h);
    for (const Mat3& P : {ops.P, ops.P_h}) {
      CHECK((P * P - P).norm() < 1e-10);
      CHECK((P - P.transpose()).norm() < 1e-10);
      CHECK(P.trace() == doctest::Approx(2.0));
    }
    CHECK(ops.mu_h > 0.0);
  }
  SUBCASE("reversed discrete normal is rejected") {
    const auto sphere = LevelSetSurface::unit_sphere();
    const Vec3 x(0, 0, 1);
    CHECK_THROWS_AS(geometric_operators(sphere, x, Vec3(0, 0, -1)), Error);
  }
}

TEST_CASE("inverse distance factor is singular at the focal set") {
  // Unit cylinder around the x3 axis, curvature 1 in the circular direction.
  LevelSetSurface cylinder(
      "cylinder", [](const Vec3& x) { return std::hypot(x.x(), x.y()) - 1.0; },
      [](const Vec3& x) {
        const double r = std::hypot(x.x(), x.y());
        return Vec3(x.x() / r, x.y() / r, 0.0);
      },
      [](const Vec3& x) {
        const double r = std::hypot(x.x(), x.y());
        const Vec3 n(x.x() / r, x.y() / r, 0.0);
        Mat3 h = (Mat3::Identity() - n * n.transpose()) / r;
        h(2, 2) = 0.0;
        return h;
      },
      4.0, 1.5, 1.5);
  const Vec3 x(0.5, 0, 0);
  // d = -0.5, W at the foot point (1,0,0) has curvature 1: factor 1 + 0.5.
  const Mat3 inv = inverse_distance_factor(cylinder, x, Vec3(1, 0, 0));
  CHECK(inv(1, 1) == doctest::Approx(1.0 / 1.5));
  // Same cylinder with the orientation flipped.
  LevelSetSurface inverted(
      "inverted", [](const Vec3& x) { return 1.0 - std::hypot(x.x(), x.y()); },
      [](const Vec3& x) {
        const double r = std::hypot(x.x(), x.y());
        return Vec3(-x.x() / r, -x.y() / r, 0.0);
      },
      [](const Vec3& x) {
        const double r = std::hypot(x.x(), x.y());
        const Vec3 n(x.x() / r, x.y() / r, 0.0);
        Mat3 h = -(Mat3::Identity() - n * n.transpose()) / r;
        h(2, 2) = 0.0;
        return h;
      },
      4.0, 1.5, 1.5);
  // At x = (2,0,0): d = -1, W at (1,0,0) = -P, so I - dW = I - P has a zero
  // eigenvalue in the tangential circular direction.
  CHECK_THROWS_AS(inverse_distance_factor(inverted, Vec3(2, 0, 0), Vec3(1, 0, 0)), Error);
}
