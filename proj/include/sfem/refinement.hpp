#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfem/fe_function.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

enum class MarkCriterion : std::uint8_t { kBulk, kDoerfler };

struct MarkSet {
  std::vector<TriId> marked;  // ascending
  MarkCriterion criterion = MarkCriterion::kBulk;
  double theta = 0.5;

  bool empty() const { return marked.empty(); }
  std::size_t size() const { return marked.size(); }
};

/// Refinement marking on elementwise indicators eta(T) >= 0.
///   bulk:     eta(T) >= theta * max eta
///   Doerfler: the fewest largest elements whose squared sum reaches
///             (1 - theta) * sum eta^2 (ties: lower id first)
/// All-zero indicators give an empty set.
MarkSet mark_refine(std::span<const double> indicators, double theta, MarkCriterion criterion);

/// Coarsening marking.
///   bulk:     eta(T) <= theta_star * max eta
///   Doerfler: smallest elements, accumulated while the squared sum stays
///             <= theta_star * sum eta^2 (ties: lower id first)
MarkSet mark_coarsen(std::span<const double> indicators, double theta_star,
                     MarkCriterion criterion);

/// Origin of every node of a mesh produced by refine or coarsen, in terms of
/// the nodes of the source mesh.
struct TransferMap {
  enum class Direction : std::uint8_t { kRefine, kCoarsen };
  struct Source {
    NodeId first = kInvalidId;
    NodeId second = kInvalidId;  // == first for retained nodes
    bool is_midpoint() const { return first != second; }
  };

  std::uint64_t source_generation = 0;
  std::uint64_t target_generation = 0;
  Direction direction = Direction::kRefine;
  std::vector<Source> sources;  // indexed by target node

  static TransferMap identity(const SurfaceMesh& mesh);
};

struct RefineResult {
  SurfaceMesh mesh;  // pre-lift: new nodes sit at edge midpoints
  TransferMap map;
};

/// Conforming refinement of the marked triangles.
///
/// Every edge of a marked triangle is scheduled for bisection; closure then
/// schedules the refinement edge of every triangle with a scheduled edge.
/// NVB resolves each triangle by up to three newest-vertex bisections. RGB
/// uses the red 1-to-4 split when all three edges are scheduled and green /
/// blue bisections otherwise. New nodes are stamped with the mesh epoch.
/// Throws kMetadataMissing or kStrategyMismatch.
RefineResult refine(const SurfaceMesh& mesh, const MarkSet& marks, Strategy strategy);

/// Refinement interpolation before lifting: retained nodes copy, midpoints
/// average their two parents. Throws kGenerationMismatch.
FeFunction transfer(const FeFunction& u, const TransferMap& map);

/// Projects the midpoint nodes created by `refined` onto the surface; retained
/// nodes keep their coordinates bit for bit. Connectivity, numbering and
/// generation are unchanged.
SurfaceMesh lift_new_nodes(const RefineResult& refined, const LevelSetSurface& surface);

struct CoarsenOptions {
  /// Passes of family collapse. Restored parents stay marked, so unset
  /// means: repeat until nothing changes.
  std::optional<int> max_passes;
  /// Nodes carrying this epoch stamp are never removed.
  std::optional<std::uint32_t> protected_epoch;
};

struct CoarsenResult {
  SurfaceMesh mesh;
  std::vector<FeFunction> functions;  // nodal restrictions, same order as input
  std::size_t removed_count = 0;
  TransferMap map;                    // target node -> source node
};

/// Undoes refinements inside the marked region.
///
/// A family (all children of one split) collapses back to its parent when
/// every child is a marked leaf and every node it removes has its whole star
/// inside collapsing families that remove the same node. This is the
/// good-to-coarsen condition for both NVB and RGB and keeps the mesh
/// conforming. Function values at surviving nodes are carried over unchanged.
/// Throws kStrategyMismatch or kGenerationMismatch.
CoarsenResult coarsen(const SurfaceMesh& mesh, const MarkSet& marks,
                      std::span<const FeFunction> functions, Strategy strategy,
                      const CoarsenOptions& options = {});

/// Uniform red refinement followed by lifting; returns a mesh with fresh
/// (coarsest-level) refinement metadata.
SurfaceMesh uniform_red_refinement(const SurfaceMesh& mesh, const LevelSetSurface& surface,
                                   int times);

}  // namespace sfem
