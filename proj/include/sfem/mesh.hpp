#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfem/geometry.hpp"

namespace sfem {

using NodeId = std::uint32_t;
using TriId = std::uint32_t;
using EdgeId = std::uint32_t;
using Triangle = std::array<NodeId, 3>;

inline constexpr std::uint32_t kInvalidId = 0xffffffffu;

enum class Strategy : std::uint8_t { kNvb, kRgb };

/// Closure pattern that produced a triangle (red 1-to-4, green bisection,
/// blue double bisection). Informational; coarsening relies on the lineage.
enum class RefineTag : std::uint8_t { kNone, kRed, kGreen, kBlue };

enum class SplitKind : std::uint8_t { kBisect = 0, kRed = 1 };

/// Refinement genealogy of a triangle: the initial triangle it descends from
/// and, for every generation, the split kind and the child slot taken.
///
/// Bisection of (a, b, c) with refinement edge (b, c) and midpoint m yields
/// slot 0 = (m, a, b) and slot 1 = (m, c, a). Red refinement with midpoints
/// m of bc, p of ab and q of ca yields slot 0 = (a, p, q), slot 1 = (p, b, m),
/// slot 2 = (q, m, c) and slot 3 = (m, q, p).
class Lineage {
 public:
  static constexpr int kMaxDepth = 32;

  Lineage() = default;
  explicit Lineage(std::uint32_t root) : root_(root) {}

  std::uint32_t root() const { return root_; }
  int depth() const { return depth_; }
  SplitKind kind(int level) const;
  int slot(int level) const;
  SplitKind last_kind() const { return kind(depth_ - 1); }
  int last_slot() const { return slot(depth_ - 1); }

  Lineage child(SplitKind kind, int slot) const;
  Lineage parent() const;

  bool operator==(const Lineage&) const = default;
  std::size_t hash() const;

 private:
  std::uint32_t root_ = 0;
  std::uint8_t depth_ = 0;
  std::array<std::uint64_t, 2> steps_{};  // 4 bits per generation
};

struct TriangleMeta {
  Lineage lineage;
  RefineTag tag = RefineTag::kNone;

  int generation() const { return lineage.depth(); }
  /// Local index of the refinement edge. Triangles are stored with their
  /// newest vertex first, so the refinement edge is always opposite vertex 0.
  static constexpr int refinement_edge() { return 0; }
};

/// Undirected edge with its two incident triangles; t1 < t2. `local1` and
/// `local2` are the indices of the opposite vertices in t1 and t2;
/// `t1_forward` records whether t1 traverses the edge as a -> b.
struct Edge {
  NodeId a = kInvalidId;
  NodeId b = kInvalidId;
  TriId t1 = kInvalidId;
  TriId t2 = kInvalidId;
  std::uint8_t local1 = 0;
  std::uint8_t local2 = 0;
  bool t1_forward = true;
};

struct EdgeTable {
  std::vector<Edge> edges;
  std::vector<std::array<EdgeId, 3>> triangle_edges;  // local edge i is opposite vertex i
};

/// Builds the edge table of a closed oriented triangulation. Throws
/// kNonManifold or kInconsistentOrientation.
EdgeTable build_adjacency(std::span<const Triangle> triangles, std::size_t num_nodes);

struct ElementGeometry {
  double diameter = 0.0;  // h_T, longest edge
  double inradius = 0.0;  // r_T = 2 area / perimeter
  double area = 0.0;
  Vec3 normal = Vec3::Zero();
};

ElementGeometry triangle_geometry(const Vec3& x0, const Vec3& x1, const Vec3& x2);

/// Closed surface triangulation with adjacency, element geometry and the
/// per-triangle refinement metadata.
///
/// The connectivity of a mesh object never changes. Refinement and
/// coarsening build new meshes, each with a fresh generation id; lifting
/// moves nodes but keeps numbering and generation.
class SurfaceMesh {
 public:
  SurfaceMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles);
  SurfaceMesh(std::vector<Vec3> nodes, std::vector<Triangle> triangles,
              std::vector<TriangleMeta> meta, std::vector<std::uint32_t> node_epochs,
              std::optional<Strategy> strategy);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return adjacency_.edges.size(); }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return adjacency_.edges; }
  const std::array<EdgeId, 3>& triangle_edges(TriId t) const {
    return adjacency_.triangle_edges[t];
  }
  const std::vector<TriangleMeta>& metadata() const { return meta_; }
  const std::vector<std::uint32_t>& node_epochs() const { return node_epochs_; }
  const ElementGeometry& element(TriId t) const { return elements_[t]; }
  const std::vector<ElementGeometry>& elements() const { return elements_; }

  /// h = max_T h_T.
  double mesh_size() const { return mesh_size_; }
  /// rho = max_T h_T / r_T.
  double quasi_uniformity() const { return quasi_uniformity_; }
  double area() const { return area_; }
  int euler_characteristic() const;

  std::uint64_t generation() const { return generation_; }
  bool has_refinement_metadata() const { return has_refinement_metadata_; }
  std::optional<Strategy> strategy() const { return strategy_; }

  /// Stamp given to nodes created by subsequent refinements.
  std::uint32_t epoch() const { return epoch_; }
  void set_epoch(std::uint32_t epoch) { epoch_ = epoch; }

  /// Rotates every triangle so that its longest edge (ties: lowest opposite
  /// node id) becomes the refinement edge, and resets the genealogy: the
  /// current triangles become the coarsest level.
  void initialize_refinement_metadata();

  /// Same connectivity and generation, moved nodes.
  SurfaceMesh with_nodes(std::vector<Vec3> nodes) const;

 private:
  void finalize();
  void compute_geometry();

  std::vector<Vec3> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<TriangleMeta> meta_;
  std::vector<std::uint32_t> node_epochs_;
  EdgeTable adjacency_;
  std::vector<ElementGeometry> elements_;
  double mesh_size_ = 0.0;
  double quasi_uniformity_ = 0.0;
  double area_ = 0.0;
  std::uint64_t generation_ = 0;
  bool has_refinement_metadata_ = false;
  std::optional<Strategy> strategy_;
  std::uint32_t epoch_ = 0;
};

/// In-plane unit normal of the edge opposite local vertex `local` of a
/// triangle, pointing away from that vertex.
Vec3 edge_conormal(const Vec3& x0, const Vec3& x1, const Vec3& x2, int local);

struct EdgeGeometry {
  double length = 0.0;
  Vec3 conormal_t1 = Vec3::Zero();
  Vec3 conormal_t2 = Vec3::Zero();
};

EdgeGeometry edge_geometry(const SurfaceMesh& mesh, EdgeId e);

/// Sum of outward co-normal fluxes of two per-element gradients across an
/// edge. Zero for a function that is C^1 across a flat edge.
double conormal_flux_jump(const SurfaceMesh& mesh, EdgeId e, const Vec3& grad_t1,
                          const Vec3& grad_t2);

/// Regular icosahedron inscribed in the unit sphere, outward oriented.
SurfaceMesh icosahedron();

/// Icosahedron red-refined `level` times with every node projected to the
/// unit sphere. 10 * 4^level + 2 nodes; the result is the coarsest level of
/// its own genealogy.
SurfaceMesh icosphere(int level);

/// Structured torus mesh (major x minor grid, quads split in two) with all
/// nodes on the torus, refined `level` times by red refinement plus lifting.
SurfaceMesh torus_mesh(int level, double major_radius = 2.0, double minor_radius = 0.5);

}  // namespace sfem
