#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sfem/mesh.hpp"
#include "sfem/refinement.hpp"

namespace sfem::testing {

/// Flips triangles whose normal points towards `center`.
inline void orient_outward(const std::vector<Vec3>& nodes, std::vector<Triangle>& tris,
                           const Vec3& center) {
  for (Triangle& t : tris) {
    const Vec3 n = (nodes[t[1]] - nodes[t[0]]).cross(nodes[t[2]] - nodes[t[0]]);
    const Vec3 c = (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
    if (n.dot(c - center) < 0.0) std::swap(t[1], t[2]);
  }
}

/// Regular tetrahedron inscribed in the unit sphere, outward oriented.
inline SurfaceMesh tetrahedron() {
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<Vec3> nodes = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
  std::vector<Triangle> tris = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  orient_outward(nodes, tris, Vec3::Zero());
  SurfaceMesh mesh(std::move(nodes), std::move(tris));
  mesh.initialize_refinement_metadata();
  return mesh;
}

/// Brute-force conformity check, independent of the mesh's own edge table:
/// every directed edge has exactly one reversed partner and no node lies in
/// the interior of any edge (no hanging nodes). Returns an empty string on
/// success, otherwise a description of the first violation.
inline std::string conformity_violation(const SurfaceMesh& mesh) {
  std::map<std::pair<NodeId, NodeId>, int> directed;
  for (const Triangle& t : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const NodeId a = t[i], b = t[(i + 1) % 3];
      if (a == b) return "repeated vertex";
      if (++directed[{a, b}] > 1) return "directed edge used twice";
    }
  }
  for (const auto& [edge, count] : directed) {
    if (directed.find({edge.second, edge.first}) == directed.end()) {
      return "edge without reversed partner";
    }
  }
  // Hanging nodes: a midpoint of some edge that is also a mesh node.
  std::map<std::tuple<long long, long long, long long>, NodeId> by_position;
  auto key = [](const Vec3& x) {
    return std::make_tuple(std::llround(x.x() * 1e9), std::llround(x.y() * 1e9),
                           std::llround(x.z() * 1e9));
  };
  for (NodeId i = 0; i < mesh.num_nodes(); ++i) by_position[key(mesh.nodes()[i])] = i;
  for (const auto& [edge, count] : directed) {
    if (edge.first > edge.second) continue;
    const Vec3 mid = 0.5 * (mesh.nodes()[edge.first] + mesh.nodes()[edge.second]);
    if (by_position.count(key(mid))) return "hanging node on an edge";
  }
  return {};
}

/// Least-squares slope of log(y) against log(x).
inline double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

inline MarkSet mark_all(const SurfaceMesh& mesh) {
  MarkSet marks;
  marks.marked.resize(mesh.num_triangles());
  std::iota(marks.marked.begin(), marks.marked.end(), TriId{0});
  return marks;
}

inline MarkSet mark_random(const SurfaceMesh& mesh, std::mt19937_64& rng, double fraction) {
  std::bernoulli_distribution pick(fraction);
  MarkSet marks;
  for (TriId t = 0; t < mesh.num_triangles(); ++t) {
    if (pick(rng)) marks.marked.push_back(t);
  }
  return marks;
}

inline std::vector<std::array<double, 3>> sorted_coordinates(const SurfaceMesh& mesh) {
  std::vector<std::array<double, 3>> out;
  for (const Vec3& x : mesh.nodes()) out.push_back({x.x(), x.y(), x.z()});
  std::sort(out.begin(), out.end());
  return out;
}

/// Barycentric coordinates of p with respect to the flat triangle abc.
inline std::array<double, 3> barycentric(const Vec3& p, const Vec3& a, const Vec3& b,
                                         const Vec3& c) {
  Eigen::Matrix<double, 3, 2> E;
  E.col(0) = b - a;
  E.col(1) = c - a;
  const Eigen::Vector2d st = E.colPivHouseholderQr().solve(p - a);
  return {1.0 - st[0] - st[1], st[0], st[1]};
}

}  // namespace sfem::testing
