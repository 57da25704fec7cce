#include "sfem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sfem/error.hpp"

namespace sfem {

namespace {

std::uint64_t next_generation() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

struct HalfEdge {
  NodeId lo;
  NodeId hi;
  TriId tri;
  std::uint8_t local;
  bool forward;  // traversed lo -> hi
};

}  // namespace

// ---------------------------------------------------------------- Lineage

SplitKind Lineage::kind(int level) const {
  const auto word = steps_[level / 16] >> (4 * (level % 16));
  return (word & 0x4u) ? SplitKind::kRed : SplitKind::kBisect;
}

int Lineage::slot(int level) const {
  const auto word = steps_[level / 16] >> (4 * (level % 16));
  return static_cast<int>(word & 0x3u);
}

Lineage Lineage::child(SplitKind kind, int slot) const {
  if (depth_ >= kMaxDepth) {
    throw Error(ErrorCode::kDepthLimit, "refinement depth limit reached");
  }
  Lineage out = *this;
  const std::uint64_t code =
      static_cast<std::uint64_t>(slot & 0x3) | (kind == SplitKind::kRed ? 0x4u : 0x0u);
  out.steps_[depth_ / 16] |= code << (4 * (depth_ % 16));
  ++out.depth_;
  return out;
}

Lineage Lineage::parent() const {
  Lineage out = *this;
  if (depth_ == 0) return out;
  --out.depth_;
  out.steps_[out.depth_ / 16] &= ~(std::uint64_t{0xf} << (4 * (out.depth_ % 16)));
  return out;
}

std::size_t Lineage::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(root_);
  mix(depth_);
  mix(steps_[0]);
  mix(steps_[1]);
  return static_cast<std::size_t>(h);
}

// --------------------------------------------------------------- adjacency

EdgeTable build_adjacency(std::span<const Triangle> triangles, std::size_t num_nodes) {
  std::vector<HalfEdge> half;
  half.reserve(3 * triangles.size());
  for (TriId t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    for (std::uint8_t i = 0; i < 3; ++i) {
      const NodeId p = tri[(i + 1) % 3];
      const NodeId q = tri[(i + 2) % 3];
      if (p >= num_nodes || q >= num_nodes || p == q) {
        throw Error(ErrorCode::kInvalidArgument, "triangle references an invalid node");
      }
      half.push_back({std::min(p, q), std::max(p, q), t, i, p < q});
    }
  }
  std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
    if (x.lo != y.lo) return x.lo < y.lo;
    if (x.hi != y.hi) return x.hi < y.hi;
    return x.tri < y.tri;
  });

  EdgeTable table;
  table.triangle_edges.assign(triangles.size(), {kInvalidId, kInvalidId, kInvalidId});
  table.edges.reserve(half.size() / 2);
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
    if (j - i != 2) {
      std::ostringstream msg;
      msg << "edge (" << half[i].lo << ", " << half[i].hi << ") has " << (j - i)
          << " incident triangles";
      throw Error(ErrorCode::kNonManifold, msg.str());
    }
    const HalfEdge& h1 = half[i];
    const HalfEdge& h2 = half[i + 1];
    if (h1.forward == h2.forward) {
      std::ostringstream msg;
      msg << "triangles " << h1.tri << " and " << h2.tri << " traverse edge (" << h1.lo << ", "
          << h1.hi << ") in the same direction";
      throw Error(ErrorCode::kInconsistentOrientation, msg.str());
    }
    const auto id = static_cast<EdgeId>(table.edges.size());
    table.edges.push_back({h1.lo, h1.hi, h1.tri, h2.tri, h1.local, h2.local, h1.forward});
    table.triangle_edges[h1.tri][h1.local] = id;
    table.triangle_edges[h2.tri][h2.local] = id;
    i = j;
  }
  return table;
}

// ---------------------------------------------------------------- geometry

ElementGeometry triangle_geometry(const Vec3& x0, const Vec3& x1, const Vec3& x2) {
  const Vec3 cross = (x1 - x0).cross(x2 - x0);
  const double l0 = (x2 - x1).norm();
  const double l1 = (x0 - x2).norm();
  const double l2 = (x1 - x0).norm();
  ElementGeometry g;
  g.area = 0.5 * cross.norm();
  g.diameter = std::max({l0, l1, l2});
  g.inradius = 2.0 * g.area / (l0 + l1 + l2);
  if (g.area > 0.0) g.normal = cross / cross.norm();
  return g;
}

Vec3 edge_conormal(const Vec3& x0, const Vec3& x1, const Vec3& x2, int local) {
  const std::array<const Vec3*, 3> x{&x0, &x1, &x2};
  const Vec3& p = *x[(local + 1) % 3];
  const Vec3& q = *x[(local + 2) % 3];
  const Vec3 normal = (x1 - x0).cross(x2 - x0);
  Vec3 n = (q - p).cross(normal);
  if (n.dot(p - *x[local]) < 0.0) n = -n;
  return n.normalized();
}

// ------------------------------------------------------------- SurfaceMesh

SurfaceMesh::SurfaceMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
  meta_.resize(triangles_.size());
  for (TriId t = 0; t < triangles_.size(); ++t) meta_[t].lineage = Lineage(t);
  node_epochs_.assign(nodes_.size(), 0);
  finalize();
}

SurfaceMesh::SurfaceMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles,
                         std::vector<TriangleMeta> meta, std::vector<std::uint32_t> node_epochs,
                         std::optional<Strategy> strategy)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      meta_(std::move(meta)),
      node_epochs_(std::move(node_epochs)),
      has_refinement_metadata_(true),
      strategy_(strategy) {
  if (meta_.size() != triangles_.size() || node_epochs_.size() != nodes_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "mesh metadata size mismatch");
  }
  finalize();
}

void SurfaceMesh::finalize() {
  generation_ = next_generation();
  adjacency_ = build_adjacency(triangles_, nodes_.size());
  compute_geometry();
}

void SurfaceMesh::compute_geometry() {
  elements_.resize(triangles_.size());
  mesh_size_ = 0.0;
  area_ = 0.0;
  for (TriId t = 0; t < triangles_.size(); ++t) {
    const Triangle& tri = triangles_[t];
    elements_[t] = triangle_geometry(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
    mesh_size_ = std::max(mesh_size_, elements_[t].diameter);
    area_ += elements_[t].area;
  }
  quasi_uniformity_ = 0.0;
  const double min_area = 1e-14 * mesh_size_ * mesh_size_;
  for (TriId t = 0; t < triangles_.size(); ++t) {
    if (!(elements_[t].area > min_area)) {
      std::ostringstream msg;
      msg << "triangle " << t << " is degenerate (area " << elements_[t].area << ")";
      throw Error(ErrorCode::kDegenerateTriangle, msg.str());
    }
    quasi_uniformity_ =
        std::max(quasi_uniformity_, elements_[t].diameter / elements_[t].inradius);
  }
}

int SurfaceMesh::euler_characteristic() const {
  return static_cast<int>(num_nodes()) - static_cast<int>(num_edges()) +
         static_cast<int>(num_triangles());
}

void SurfaceMesh::initialize_refinement_metadata() {
  constexpr double kTieTolerance = 1e-10;
  for (TriId t = 0; t < triangles_.size(); ++t) {
    Triangle& tri = triangles_[t];
    std::array<double, 3> len{};
    for (int i = 0; i < 3; ++i) {
      len[i] = (nodes_[tri[(i + 1) % 3]] - nodes_[tri[(i + 2) % 3]]).norm();
    }
    const double longest = std::max({len[0], len[1], len[2]});
    int best = -1;
    for (int i = 0; i < 3; ++i) {
      if (len[i] < longest * (1.0 - kTieTolerance)) continue;
      if (best < 0 || tri[i] < tri[best]) best = i;
    }
    std::rotate(tri.begin(), tri.begin() + best, tri.end());
    meta_[t] = TriangleMeta{Lineage(t), RefineTag::kNone};
  }
  node_epochs_.assign(nodes_.size(), 0);
  strategy_.reset();
  has_refinement_metadata_ = true;
  // Element rotation permutes local edge slots; rebuild the tables.
  const auto keep = generation_;
  finalize();
  generation_ = keep;
}

SurfaceMesh SurfaceMesh::with_nodes(std::vector<Vec3> nodes) const {
  if (nodes.size() != nodes_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "node count changed");
  }
  SurfaceMesh out = *this;
  out.nodes_ = std::move(nodes);
  out.compute_geometry();
  return out;
}

EdgeGeometry edge_geometry(const SurfaceMesh& mesh, EdgeId e) {
  const Edge& edge = mesh.edges()[e];
  const auto& x = mesh.nodes();
  const Triangle& t1 = mesh.triangles()[edge.t1];
  const Triangle& t2 = mesh.triangles()[edge.t2];
  EdgeGeometry g;
  g.length = (x[edge.a] - x[edge.b]).norm();
  g.conormal_t1 = edge_conormal(x[t1[0]], x[t1[1]], x[t1[2]], edge.local1);
  g.conormal_t2 = edge_conormal(x[t2[0]], x[t2[1]], x[t2[2]], edge.local2);
  return g;
}

double conormal_flux_jump(const SurfaceMesh& mesh, EdgeId e, const Vec3& grad_t1,
                          const Vec3& grad_t2) {
  const EdgeGeometry g = edge_geometry(mesh, e);
  return grad_t1.dot(g.conormal_t1) + grad_t2.dot(g.conormal_t2);
}

SurfaceMesh icosahedron() {
  const double phi = std::numbers::phi;
  std::vector<Vec3> nodes = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (Vec3& x : nodes) x.normalize();
  std::vector<Triangle> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  SurfaceMesh mesh(std::move(nodes), std::move(tris));
  mesh.initialize_refinement_metadata();
  return mesh;
}

}  // namespace sfem
