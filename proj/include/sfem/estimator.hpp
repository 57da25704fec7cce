#pragma once

#include <vector>

#include "sfem/fe_function.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

/// Elementwise squared indicators plus their sums.
struct IndicatorField {
  std::vector<double> per_element;  // squared contributions
  double total = 0.0;               // sum of per_element

  /// Elementwise indicator eta(T) = sqrt(per_element[T]) for marking.
  std::vector<double> magnitudes() const;
};

/// Residual-based indicators of one time step.
struct Indicators {
  IndicatorField spatial;     // eta_h^2
  IndicatorField temporal;    // eta_tau^2
  IndicatorField coarsening;  // eta_c^2
  double eta_combined = 0.0;  // (1 + h^2) sqrt(tau (eta_h^2 + eta_tau^2))

  double eta_h_sq() const { return spatial.total; }
  double eta_tau_sq() const { return temporal.total; }
  double eta_c_sq() const { return coarsening.total; }
};

/// Spatial indicator
///   sum_S h_S ||[grad u_n . n_S]||^2_{L2(S)}
///     + sum_T h_T^2 ||(u_n - I u_prev) / tau - f_h||^2_{L2(T)}.
/// Edge jumps are the sum of outward co-normal fluxes; each edge term is
/// split half and half onto its two triangles.
IndicatorField spatial_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                 const FeFunction& u_prev_transferred, const FeFunction& f_h,
                                 double tau);

/// sum_T ||u_n - I u_prev||^2_{H1(T)} (full H1 norm).
IndicatorField temporal_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                  const FeFunction& u_prev_transferred);

/// sum_T ||u_n - I u_prev||^2_{L2(T)}.
IndicatorField coarsening_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                    const FeFunction& u_prev_transferred);

/// (1 + h^2) sqrt(tau (eta_h^2 + eta_tau^2)) from the unsquared indicators.
double combined(double eta_h, double eta_tau, double tau, double h);

Indicators compute_indicators(const SurfaceMesh& mesh, const FeFunction& u_n,
                              const FeFunction& u_prev_transferred, const FeFunction& f_h,
                              double tau);

}  // namespace sfem
