#include "sfem/problems.hpp"

#include <cmath>
#include <numbers>

#include "sfem/error.hpp"

namespace sfem {

namespace {

Vec3 tangential(const Vec3& x, const Vec3& g) {
  const Vec3 n = x.normalized();
  return g - g.dot(n) * n;
}

}  // namespace

Problem sphere_decay() {
  Problem p{"sphere-decay", LevelSetSurface::unit_sphere(), {}, {}, {}, 1.0, {}};
  p.rhs = [](const Vec3& x, double t) { return 5.0 * std::exp(-t) * x.x() * x.y(); };
  p.initial = [](const Vec3& x) { return x.x() * x.y(); };
  p.exact = ExactSolution{
      [](const Vec3& x, double t) { return std::exp(-t) * x.x() * x.y(); },
      [](const Vec3& x, double t) {
        return Vec3(std::exp(-t) * tangential(x, Vec3(x.y(), x.x(), 0.0)));
      }};
  p.mesh_family = [](int level) { return icosphere(level); };
  return p;
}

Vec3 moving_peak_center(const MovingPeakParameters& params, double t) {
  const double angle = std::numbers::pi * t / params.period;
  return {std::cos(angle), std::sin(angle), 0.0};
}

Problem moving_peak(const MovingPeakParameters& params) {
  const double a = params.sharpness, b = params.vanish_rate, t0 = params.vanish_time;
  const double omega = std::numbers::pi / params.period;
  auto envelope = [=](double t) { return 1.0 - std::exp(-b * (t - t0) * (t - t0)); };
  auto bump = [=](const Vec3& x, double t) {
    return std::exp(-a * (x - moving_peak_center(params, t)).squaredNorm());
  };

  Problem p{"moving-peak", LevelSetSurface::unit_sphere(), {}, {}, {}, 1.0, {}};
  p.exact = ExactSolution{
      [=](const Vec3& x, double t) { return envelope(t) * bump(x, t); },
      [=](const Vec3& x, double t) {
        const Vec3 r = x - moving_peak_center(params, t);
        return Vec3(envelope(t) * bump(x, t) * tangential(x, Vec3(-2.0 * a * r)));
      }};
  // On the unit sphere, Laplace-Beltrami E = lap E - Hess E(n, n) - 2 dE/dn
  // with n = x, which for E = exp(-a |r|^2) gives
  // [4a^2 (|r|^2 - (r.n)^2) - 4a + 4a (r.n)] E.
  p.rhs = [=](const Vec3& x, double t) {
    const Vec3 c = moving_peak_center(params, t);
    const Vec3 dc = omega * Vec3(-c.y(), c.x(), 0.0);
    const Vec3 r = x - c;
    const Vec3 n = x.normalized();
    const double rn = r.dot(n);
    const double e = std::exp(-a * r.squaredNorm());
    const double g = envelope(t);
    const double dg = 2.0 * b * (t - t0) * std::exp(-b * (t - t0) * (t - t0));
    const double surface_laplacian =
        (4.0 * a * a * (r.squaredNorm() - rn * rn) - 4.0 * a + 4.0 * a * rn) * e;
    return dg * e + g * 2.0 * a * r.dot(dc) * e - g * surface_laplacian;
  };
  p.initial = [=](const Vec3& x) { return envelope(0.0) * bump(x, 0.0); };
  p.mesh_family = [](int level) { return icosphere(level); };
  return p;
}

Problem moving_peak_timing() {
  Problem p = moving_peak({50.0, 100.0, 0.5, 0.5});
  p.name = "moving-peak-timing";
  return p;
}

Problem zero_problem() {
  Problem p{"zero", LevelSetSurface::unit_sphere(), {}, {}, {}, 1.0, {}};
  p.rhs = [](const Vec3&, double) { return 0.0; };
  p.initial = [](const Vec3&) { return 0.0; };
  p.exact = ExactSolution{[](const Vec3&, double) { return 0.0; },
                          [](const Vec3&, double) { return Vec3(Vec3::Zero()); }};
  p.mesh_family = [](int level) { return icosphere(level); };
  return p;
}

std::vector<std::string> problem_names() {
  return {"sphere-decay", "moving-peak", "moving-peak-timing", "zero"};
}

Problem find_problem(std::string_view name) {
  if (name == "sphere-decay") return sphere_decay();
  if (name == "moving-peak") return moving_peak();
  if (name == "moving-peak-timing") return moving_peak_timing();
  if (name == "zero") return zero_problem();
  throw Error(ErrorCode::kInvalidArgument, "unknown problem '" + std::string(name) + "'");
}

}  // namespace sfem
