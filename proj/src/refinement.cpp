#include "sfem/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "sfem/error.hpp"

namespace sfem {

// ----------------------------------------------------------------- marking

namespace {

std::vector<std::size_t> sorted_order(std::span<const double> eta, bool descending) {
  std::vector<std::size_t> order(eta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return descending ? eta[i] > eta[j] : eta[i] < eta[j];
  });
  return order;
}

void check_indicators(std::span<const double> eta, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "marking parameter must lie in (0, 1)");
  }
  for (double v : eta) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "indicators must be non-negative");
  }
}

}  // namespace

MarkSet mark_refine(std::span<const double> eta, double theta, MarkCriterion criterion) {
  check_indicators(eta, theta);
  MarkSet set{{}, criterion, theta};
  if (eta.empty()) return set;
  if (criterion == MarkCriterion::kBulk) {
    const double eta_max = *std::max_element(eta.begin(), eta.end());
    if (eta_max == 0.0) return set;
    for (std::size_t t = 0; t < eta.size(); ++t) {
      if (eta[t] >= theta * eta_max) set.marked.push_back(static_cast<TriId>(t));
    }
    return set;
  }
  double total = 0.0;
  for (double v : eta) total += v * v;
  if (total == 0.0) return set;
  const double target = (1.0 - theta) * total;
  double sum = 0.0;
  for (std::size_t t : sorted_order(eta, true)) {
    if (sum >= target) break;
    sum += eta[t] * eta[t];
    set.marked.push_back(static_cast<TriId>(t));
  }
  std::sort(set.marked.begin(), set.marked.end());
  return set;
}

MarkSet mark_coarsen(std::span<const double> eta, double theta_star, MarkCriterion criterion) {
  check_indicators(eta, theta_star);
  MarkSet set{{}, criterion, theta_star};
  if (eta.empty()) return set;
  if (criterion == MarkCriterion::kBulk) {
    const double eta_max = *std::max_element(eta.begin(), eta.end());
    for (std::size_t t = 0; t < eta.size(); ++t) {
      if (eta[t] <= theta_star * eta_max) set.marked.push_back(static_cast<TriId>(t));
    }
    return set;
  }
  double total = 0.0;
  for (double v : eta) total += v * v;
  const double budget = theta_star * total;
  double sum = 0.0;
  for (std::size_t t : sorted_order(eta, false)) {
    const double next = sum + eta[t] * eta[t];
    if (next > budget) break;
    sum = next;
    set.marked.push_back(static_cast<TriId>(t));
  }
  std::sort(set.marked.begin(), set.marked.end());
  return set;
}

// ---------------------------------------------------------------- transfer

TransferMap TransferMap::identity(const SurfaceMesh& mesh) {
  TransferMap map;
  map.source_generation = mesh.generation();
  map.target_generation = mesh.generation();
  map.sources.resize(mesh.num_nodes());
  for (NodeId i = 0; i < mesh.num_nodes(); ++i) map.sources[i] = {i, i};
  return map;
}

FeFunction transfer(const FeFunction& u, const TransferMap& map) {
  if (u.mesh_generation != map.source_generation) {
    throw Error(ErrorCode::kGenerationMismatch, "function does not live on the source mesh");
  }
  std::vector<double> out(map.sources.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& src = map.sources[i];
    out[i] = src.is_midpoint() ? 0.5 * (u[src.first] + u[src.second]) : u[src.first];
  }
  return FeFunction(map.target_generation, std::move(out));
}

SurfaceMesh lift_new_nodes(const RefineResult& refined, const LevelSetSurface& surface) {
  std::vector<Vec3> nodes = refined.mesh.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (refined.map.sources.at(i).is_midpoint()) nodes[i] = lift(surface, nodes[i]);
  }
  return refined.mesh.with_nodes(std::move(nodes));
}

// -------------------------------------------------------------- refinement

namespace {

struct Splitter {
  bool red_when_full;
  std::vector<Triangle>& tris;
  std::vector<TriangleMeta>& meta;

  // (a, b, c) with refinement edge (b, c); m0, m1, m2 are the midpoints of
  // (b, c), (c, a), (a, b) or kInvalidId.
  void split(const Triangle& t, const Lineage& lineage, RefineTag tag, NodeId m0, NodeId m1,
             NodeId m2) {
    const NodeId a = t[0], b = t[1], c = t[2];
    if (m0 == kInvalidId) {
      tris.push_back(t);
      meta.push_back({lineage, tag});
      return;
    }
    if (red_when_full && m1 != kInvalidId && m2 != kInvalidId) {
      const NodeId m = m0, q = m1, p = m2;
      const std::array<Triangle, 4> kids = {Triangle{a, p, q}, Triangle{p, b, m},
                                            Triangle{q, m, c}, Triangle{m, q, p}};
      for (int s = 0; s < 4; ++s) {
        tris.push_back(kids[s]);
        meta.push_back({lineage.child(SplitKind::kRed, s), RefineTag::kRed});
      }
      return;
    }
    split({m0, a, b}, lineage.child(SplitKind::kBisect, 0), tag, m2, kInvalidId, kInvalidId);
    split({m0, c, a}, lineage.child(SplitKind::kBisect, 1), tag, m1, kInvalidId, kInvalidId);
  }
};

}  // namespace

RefineResult refine(const SurfaceMesh& mesh, const MarkSet& marks, Strategy strategy) {
  if (!mesh.has_refinement_metadata()) {
    throw Error(ErrorCode::kMetadataMissing, "mesh has no refinement-edge metadata");
  }
  if (mesh.strategy() && *mesh.strategy() != strategy) {
    throw Error(ErrorCode::kStrategyMismatch, "mesh was refined with the other strategy");
  }
  if (marks.empty()) return {mesh, TransferMap::identity(mesh)};

  const auto& tris = mesh.triangles();
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::vector<TriId> work;
  for (TriId t : marks.marked) {
    if (t >= tris.size()) throw Error(ErrorCode::kInvalidArgument, "marked triangle out of range");
    for (EdgeId e : mesh.triangle_edges(t)) edge_marked[e] = 1;
    work.push_back(t);
  }
  // Closure: any scheduled edge forces the refinement edge.
  for (TriId t : marks.marked) {
    for (EdgeId e : mesh.triangle_edges(t)) {
      work.push_back(mesh.edges()[e].t1);
      work.push_back(mesh.edges()[e].t2);
    }
  }
  while (!work.empty()) {
    const TriId t = work.back();
    work.pop_back();
    const auto& te = mesh.triangle_edges(t);
    const EdgeId ref = te[TriangleMeta::refinement_edge()];
    if (edge_marked[ref]) continue;
    if (!edge_marked[te[0]] && !edge_marked[te[1]] && !edge_marked[te[2]]) continue;
    edge_marked[ref] = 1;
    const Edge& edge = mesh.edges()[ref];
    work.push_back(edge.t1 == t ? edge.t2 : edge.t1);
  }

  std::vector<Vec3> nodes = mesh.nodes();
  std::vector<std::uint32_t> epochs = mesh.node_epochs();
  TransferMap map;
  map.source_generation = mesh.generation();
  map.direction = TransferMap::Direction::kRefine;
  map.sources.resize(mesh.num_nodes());
  for (NodeId i = 0; i < mesh.num_nodes(); ++i) map.sources[i] = {i, i};

  std::vector<NodeId> midpoint(mesh.num_edges(), kInvalidId);
  for (EdgeId e = 0; e < mesh.num_edges(); ++e) {
    if (!edge_marked[e]) continue;
    const Edge& edge = mesh.edges()[e];
    midpoint[e] = static_cast<NodeId>(nodes.size());
    nodes.push_back(0.5 * (nodes[edge.a] + nodes[edge.b]));
    epochs.push_back(mesh.epoch());
    map.sources.push_back({edge.a, edge.b});
  }

  std::vector<Triangle> out_tris;
  std::vector<TriangleMeta> out_meta;
  out_tris.reserve(tris.size() * 2);
  out_meta.reserve(tris.size() * 2);
  Splitter splitter{strategy == Strategy::kRgb, out_tris, out_meta};
  for (TriId t = 0; t < tris.size(); ++t) {
    const auto& te = mesh.triangle_edges(t);
    const NodeId m0 = midpoint[te[0]], m1 = midpoint[te[1]], m2 = midpoint[te[2]];
    const int count = (m0 != kInvalidId) + (m1 != kInvalidId) + (m2 != kInvalidId);
    RefineTag tag = mesh.metadata()[t].tag;
    if (count == 1) tag = RefineTag::kGreen;
    if (count >= 2) tag = RefineTag::kBlue;
    splitter.split(tris[t], mesh.metadata()[t].lineage, tag, m0, m1, m2);
  }

  SurfaceMesh refined(std::move(nodes), std::move(out_tris), std::move(out_meta),
                      std::move(epochs), strategy);
  refined.set_epoch(mesh.epoch());
  map.target_generation = refined.generation();
  return {std::move(refined), std::move(map)};
}

// -------------------------------------------------------------- coarsening

namespace {

struct LineageHash {
  std::size_t operator()(const Lineage& l) const { return l.hash(); }
};

struct Family {
  std::vector<TriId> children;  // indexed by slot
  SplitKind kind = SplitKind::kBisect;
  Triangle parent{};
  Lineage lineage;
  std::vector<NodeId> removes;
  bool active = false;
};

// Rebuilds the parent triangle from a complete family; false if the children
// do not fit the split pattern.
bool reconstruct(Family& f, const std::vector<Triangle>& tris) {
  if (f.kind == SplitKind::kBisect) {
    const Triangle& c0 = tris[f.children[0]];  // (m, x, y)
    const Triangle& c1 = tris[f.children[1]];  // (m, z, x)
    if (c0[0] != c1[0] || c1[2] != c0[1]) return false;
    f.parent = {c0[1], c0[2], c1[1]};
    f.removes = {c0[0]};
    return true;
  }
  const Triangle& k0 = tris[f.children[0]];  // (a, p, q)
  const Triangle& k1 = tris[f.children[1]];  // (p, b, m)
  const Triangle& k2 = tris[f.children[2]];  // (q, m, c)
  const Triangle& k3 = tris[f.children[3]];  // (m, q, p)
  const NodeId m = k3[0], q = k3[1], p = k3[2];
  if (k0[1] != p || k0[2] != q || k1[0] != p || k1[2] != m || k2[0] != q || k2[1] != m) {
    return false;
  }
  f.parent = {k0[0], k1[1], k2[2]};
  f.removes = {m, q, p};
  return true;
}

}  // namespace

CoarsenResult coarsen(const SurfaceMesh& mesh, const MarkSet& marks,
                      std::span<const FeFunction> functions, Strategy strategy,
                      const CoarsenOptions& options) {
  for (const FeFunction& f : functions) require_same_generation(mesh, f);
  if (mesh.strategy() && *mesh.strategy() != strategy) {
    throw Error(ErrorCode::kStrategyMismatch, "mesh was refined with the other strategy");
  }
  const int passes = options.max_passes.value_or(std::numeric_limits<int>::max());

  std::vector<Triangle> tris = mesh.triangles();
  std::vector<TriangleMeta> meta = mesh.metadata();
  std::vector<char> marked(tris.size(), 0);
  for (TriId t : marks.marked) {
    if (t >= tris.size()) throw Error(ErrorCode::kInvalidArgument, "marked triangle out of range");
    marked[t] = 1;
  }
  std::vector<char> alive(mesh.num_nodes(), 1);
  const auto& epochs = mesh.node_epochs();
  std::size_t removed = 0;

  for (int pass = 0; pass < passes; ++pass) {
    std::unordered_map<Lineage, std::size_t, LineageHash> index;
    std::vector<Family> families;
    std::vector<char> excluded;
    for (TriId t = 0; t < tris.size(); ++t) {
      const Lineage& lin = meta[t].lineage;
      if (lin.depth() == 0) continue;
      const Lineage parent = lin.parent();
      auto [it, inserted] = index.try_emplace(parent, families.size());
      if (inserted) {
        Family f;
        f.kind = lin.last_kind();
        f.lineage = parent;
        f.children.assign(f.kind == SplitKind::kRed ? 4 : 2, kInvalidId);
        families.push_back(std::move(f));
        excluded.push_back(0);
      }
      Family& f = families[it->second];
      const int slot = lin.last_slot();
      if (lin.last_kind() != f.kind || slot >= static_cast<int>(f.children.size()) ||
          f.children[slot] != kInvalidId || !marked[t]) {
        excluded[it->second] = 1;
        continue;
      }
      f.children[slot] = t;
    }

    std::vector<std::int64_t> family_of(tris.size(), -1);
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      Family& f = families[fi];
      if (excluded[fi]) continue;
      if (std::find(f.children.begin(), f.children.end(), kInvalidId) != f.children.end()) continue;
      if (!reconstruct(f, tris)) continue;
      bool locked = false;
      for (NodeId n : f.removes) {
        if (options.protected_epoch && epochs[n] == *options.protected_epoch) locked = true;
      }
      if (locked) continue;
      f.active = true;
      for (TriId c : f.children) family_of[c] = static_cast<std::int64_t>(fi);
    }

    // Node stars in CSR form.
    std::vector<std::uint32_t> offsets(mesh.num_nodes() + 1, 0);
    for (const Triangle& t : tris) {
      for (NodeId n : t) ++offsets[n + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<TriId> star(offsets.back());
    {
      std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
      for (TriId t = 0; t < tris.size(); ++t) {
        for (NodeId n : tris[t]) star[fill[n]++] = t;
      }
    }

    // Shrink to the largest self-consistent set of collapsing families.
    bool changed = true;
    while (changed) {
      changed = false;
      for (Family& f : families) {
        if (!f.active) continue;
        for (NodeId n : f.removes) {
          for (std::uint32_t k = offsets[n]; k < offsets[n + 1] && f.active; ++k) {
            const std::int64_t g = family_of[star[k]];
            const bool ok = g >= 0 && families[g].active &&
                            std::find(families[g].removes.begin(), families[g].removes.end(),
                                      n) != families[g].removes.end();
            if (!ok) {
              f.active = false;
              changed = true;
            }
          }
          if (!f.active) break;
        }
      }
    }

    std::vector<Triangle> next_tris;
    std::vector<TriangleMeta> next_meta;
    std::vector<char> next_marked;
    next_tris.reserve(tris.size());
    std::size_t removed_this_pass = 0;
    for (TriId t = 0; t < tris.size(); ++t) {
      const std::int64_t g = family_of[t];
      if (g >= 0 && families[g].active) continue;
      next_tris.push_back(tris[t]);
      next_meta.push_back(meta[t]);
      next_marked.push_back(marked[t]);
    }
    for (Family& f : families) {
      if (!f.active) continue;
      const Lineage& parent = f.lineage;
      RefineTag tag = RefineTag::kNone;
      if (parent.depth() > 0) {
        tag = parent.last_kind() == SplitKind::kRed ? RefineTag::kRed : RefineTag::kGreen;
      }
      next_tris.push_back(f.parent);
      next_meta.push_back({parent, tag});
      next_marked.push_back(1);
      for (NodeId n : f.removes) {
        if (alive[n]) {
          alive[n] = 0;
          ++removed_this_pass;
        }
      }
    }
    if (removed_this_pass == 0) break;
    removed += removed_this_pass;
    tris = std::move(next_tris);
    meta = std::move(next_meta);
    marked = std::move(next_marked);
  }

  if (removed == 0) {
    return {mesh, std::vector<FeFunction>(functions.begin(), functions.end()), 0,
            TransferMap::identity(mesh)};
  }

  std::vector<NodeId> renumber(mesh.num_nodes(), kInvalidId);
  std::vector<Vec3> nodes;
  std::vector<std::uint32_t> kept_epochs;
  TransferMap map;
  map.source_generation = mesh.generation();
  map.direction = TransferMap::Direction::kCoarsen;
  for (NodeId i = 0; i < mesh.num_nodes(); ++i) {
    if (!alive[i]) continue;
    renumber[i] = static_cast<NodeId>(nodes.size());
    nodes.push_back(mesh.nodes()[i]);
    kept_epochs.push_back(epochs[i]);
    map.sources.push_back({i, i});
  }
  for (Triangle& t : tris) {
    for (NodeId& n : t) n = renumber[n];
  }
  SurfaceMesh coarse(std::move(nodes), std::move(tris), std::move(meta), std::move(kept_epochs),
                     mesh.strategy());
  coarse.set_epoch(mesh.epoch());
  map.target_generation = coarse.generation();

  std::vector<FeFunction> restricted;
  restricted.reserve(functions.size());
  for (const FeFunction& f : functions) {
    std::vector<double> values;
    values.reserve(coarse.num_nodes());
    for (const auto& src : map.sources) values.push_back(f[src.first]);
    restricted.emplace_back(coarse.generation(), std::move(values));
  }
  return {std::move(coarse), std::move(restricted), removed, std::move(map)};
}

// --------------------------------------------------------- mesh generation

SurfaceMesh uniform_red_refinement(const SurfaceMesh& mesh, const LevelSetSurface& surface,
                                   int times) {
  if (times < 0) throw Error(ErrorCode::kInvalidArgument, "refinement count must be >= 0");
  SurfaceMesh current = mesh;
  if (!current.has_refinement_metadata()) current.initialize_refinement_metadata();
  for (int i = 0; i < times; ++i) {
    MarkSet all;
    all.marked.resize(current.num_triangles());
    std::iota(all.marked.begin(), all.marked.end(), TriId{0});
    current = lift_new_nodes(refine(current, all, Strategy::kRgb), surface);
  }
  current.initialize_refinement_metadata();
  return current;
}

SurfaceMesh icosphere(int level) {
  if (level < 0) throw Error(ErrorCode::kInvalidArgument, "icosphere level must be >= 0");
  return uniform_red_refinement(icosahedron(), LevelSetSurface::unit_sphere(), level);
}

SurfaceMesh torus_mesh(int level, double major_radius, double minor_radius) {
  constexpr int kMajor = 24;
  constexpr int kMinor = 8;
  std::vector<Vec3> nodes;
  nodes.reserve(kMajor * kMinor);
  for (int i = 0; i < kMajor; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / kMajor;
    for (int j = 0; j < kMinor; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / kMinor;
      const double ring = major_radius + minor_radius * std::cos(theta);
      nodes.emplace_back(ring * std::cos(phi), ring * std::sin(phi),
                         minor_radius * std::sin(theta));
    }
  }
  auto id = [](int i, int j) {
    return static_cast<NodeId>(((i + kMajor) % kMajor) * kMinor + (j + kMinor) % kMinor);
  };
  std::vector<Triangle> tris;
  for (int i = 0; i < kMajor; ++i) {
    for (int j = 0; j < kMinor; ++j) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  SurfaceMesh base(std::move(nodes), std::move(tris));
  return uniform_red_refinement(base, LevelSetSurface::torus(major_radius, minor_radius), level);
}

}  // namespace sfem
