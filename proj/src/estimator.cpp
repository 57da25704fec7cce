#include "sfem/estimator.hpp"

#include <cmath>

#include "sfem/error.hpp"
#include "sfem/fem.hpp"

namespace sfem {

namespace {

// Exact ||w||^2_{L2(T)} of a P1 function with nodal values w.
double p1_l2_squared(double area, double w0, double w1, double w2) {
  return area / 6.0 * (w0 * w0 + w1 * w1 + w2 * w2 + w0 * w1 + w1 * w2 + w2 * w0);
}

void finish(IndicatorField& field) {
  field.total = 0.0;
  for (double v : field.per_element) field.total += v;
}

std::vector<double> difference(const FeFunction& a, const FeFunction& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

std::vector<double> IndicatorField::magnitudes() const {
  std::vector<double> out(per_element.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(per_element[i]);
  return out;
}

IndicatorField spatial_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                 const FeFunction& u_prev, const FeFunction& f_h, double tau) {
  require_same_generation(mesh, u_n);
  require_same_generation(mesh, u_prev);
  require_same_generation(mesh, f_h);
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "time step must be positive");

  IndicatorField field;
  field.per_element.assign(mesh.num_triangles(), 0.0);
  std::vector<Vec3> grads(mesh.num_triangles());
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    grads[t] = element_gradient(mesh, t, u_n);
    const Triangle& tri = mesh.triangles()[t];
    std::array<double, 3> r{};
    for (int i = 0; i < 3; ++i) {
      r[i] = (u_n[tri[i]] - u_prev[tri[i]]) / tau - f_h[tri[i]];
    }
    const ElementGeometry& g = mesh.element(t);
    field.per_element[t] = g.diameter * g.diameter * p1_l2_squared(g.area, r[0], r[1], r[2]);
  }
  for (EdgeId e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edges()[e];
    const double h_s = (mesh.nodes()[edge.a] - mesh.nodes()[edge.b]).norm();
    const double jump = conormal_flux_jump(mesh, e, grads[edge.t1], grads[edge.t2]);
    // h_S * |S| * jump^2, |S| = h_S.
    const double term = h_s * h_s * jump * jump;
    field.per_element[edge.t1] += 0.5 * term;
    field.per_element[edge.t2] += 0.5 * term;
  }
  finish(field);
  return field;
}

IndicatorField temporal_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                  const FeFunction& u_prev) {
  require_same_generation(mesh, u_n);
  require_same_generation(mesh, u_prev);
  const std::vector<double> d = difference(u_n, u_prev);
  IndicatorField field;
  field.per_element.resize(mesh.num_triangles());
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    const Vec3& x0 = mesh.nodes()[tri[0]];
    const Vec3& x1 = mesh.nodes()[tri[1]];
    const Vec3& x2 = mesh.nodes()[tri[2]];
    const double area = mesh.element(t).area;
    const Vec3 grad = element_gradient(x0, x1, x2, {d[tri[0]], d[tri[1]], d[tri[2]]});
    field.per_element[t] =
        p1_l2_squared(area, d[tri[0]], d[tri[1]], d[tri[2]]) + area * grad.squaredNorm();
  }
  finish(field);
  return field;
}

IndicatorField coarsening_indicator(const SurfaceMesh& mesh, const FeFunction& u_n,
                                    const FeFunction& u_prev) {
  require_same_generation(mesh, u_n);
  require_same_generation(mesh, u_prev);
  const std::vector<double> d = difference(u_n, u_prev);
  IndicatorField field;
  field.per_element.resize(mesh.num_triangles());
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    field.per_element[t] =
        p1_l2_squared(mesh.element(t).area, d[tri[0]], d[tri[1]], d[tri[2]]);
  }
  finish(field);
  return field;
}

double combined(double eta_h, double eta_tau, double tau, double h) {
  return (1.0 + h * h) * std::sqrt(tau * (eta_h * eta_h + eta_tau * eta_tau));
}

Indicators compute_indicators(const SurfaceMesh& mesh, const FeFunction& u_n,
                              const FeFunction& u_prev, const FeFunction& f_h, double tau) {
  Indicators ind;
  ind.spatial = spatial_indicator(mesh, u_n, u_prev, f_h, tau);
  ind.temporal = temporal_indicator(mesh, u_n, u_prev);
  ind.coarsening = coarsening_indicator(mesh, u_n, u_prev);
  ind.eta_combined = combined(std::sqrt(ind.spatial.total), std::sqrt(ind.temporal.total), tau,
                              mesh.mesh_size());
  return ind;
}

}  // namespace sfem
