#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sfem/fem.hpp"
#include "sfem/geometry.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

/// Heat equation data: d/dt u - Laplace-Beltrami u = f on a closed surface.
struct Problem {
  std::string name;
  LevelSetSurface surface;
  SpaceTimeField rhs;
  std::function<double(const Vec3&)> initial;
  std::optional<ExactSolution> exact;
  double t_end = 1.0;
  /// Quasi-uniform mesh family of the surface, indexed by level.
  std::function<SurfaceMesh(int)> mesh_family;
};

/// u = exp(-t) x1 x2 on the unit sphere, f = 5 exp(-t) x1 x2.
Problem sphere_decay();

struct MovingPeakParameters {
  double sharpness = 25.0;     // a
  double vanish_rate = 400.0;  // b
  double period = 2.0;         // R; the centre angle is pi t / R
  double vanish_time = 0.5;    // t0
};

/// u = (1 - exp(-b (t - t0)^2)) exp(-a |x - c(t)|^2) on the unit sphere with
/// c(t) = (cos(pi t / R), sin(pi t / R), 0).
Problem moving_peak(const MovingPeakParameters& params = {});

/// Moving peak with a = 50, b = 100, R = 0.5: one full revolution on [0, 1].
Problem moving_peak_timing();

/// f = 0, u = 0 on the unit sphere.
Problem zero_problem();

/// Peak centre of the moving-peak family at time t.
Vec3 moving_peak_center(const MovingPeakParameters& params, double t);

/// Looks a problem up by registry name. Throws kInvalidArgument.
Problem find_problem(std::string_view name);
std::vector<std::string> problem_names();

}  // namespace sfem
