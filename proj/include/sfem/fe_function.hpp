#pragma once

#include <cstdint>
#include <vector>

namespace sfem {

class SurfaceMesh;

/// Nodal coefficients of a P1 function, bound to one mesh generation.
struct FeFunction {
  std::uint64_t mesh_generation = 0;
  std::vector<double> coefficients;

  FeFunction() = default;
  FeFunction(std::uint64_t generation, std::vector<double> values)
      : mesh_generation(generation), coefficients(std::move(values)) {}

  static FeFunction constant(const SurfaceMesh& mesh, double value);
  static FeFunction from_values(const SurfaceMesh& mesh, std::vector<double> values);

  std::size_t size() const { return coefficients.size(); }
  double operator[](std::size_t i) const { return coefficients[i]; }
  double& operator[](std::size_t i) { return coefficients[i]; }
};

/// Throws kGenerationMismatch unless `f` belongs to `mesh`.
void require_same_generation(const SurfaceMesh& mesh, const FeFunction& f);

}  // namespace sfem
