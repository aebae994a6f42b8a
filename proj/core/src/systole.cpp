#include "curvlab/systole.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

// Face that contains the directed edge a->b in its (validated, globally
// consistent) winding; the other incident face contains b->a.
int left_face(const TriangleMesh& mesh, int edge_id) {
  const TriangleMesh::Edge& e = mesh.edges()[edge_id];
  for (int side = 0; side < 2; ++side) {
    const auto& f = mesh.faces()[e.face[side]];
    for (int c = 0; c < 3; ++c) {
      if (f[c] == e.a && f[(c + 1) % 3] == e.b) return e.face[side];
    }
  }
  throw PreconditionError("homology: edge missing from both incident face windings");
}

struct TreeCotree {
  std::vector<char> in_tree;         // per edge: primal spanning tree
  std::vector<char> in_cotree;       // per edge: dual spanning tree
  std::vector<int> dual_parent;      // per face
  std::vector<int> dual_parent_edge; // per face: crossed edge toward parent
  std::vector<int> dual_depth;
  std::vector<int> leftover;         // 2g edges in neither tree
};

TreeCotree build_tree_cotree(const TriangleMesh& mesh) {
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_edges();
  const int nf = mesh.n_faces();

  TreeCotree tc;
  tc.in_tree.assign(ne, 0);
  tc.in_cotree.assign(ne, 0);
  tc.dual_parent.assign(nf, -1);
  tc.dual_parent_edge.assign(nf, -1);
  tc.dual_depth.assign(nf, 0);

  // Primal BFS tree from vertex 0, neighbors visited in sorted order.
  std::vector<char> seen(nv, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : mesh.vertex_neighbors(v)) {
      if (seen[w]) continue;
      seen[w] = 1;
      tc.in_tree[mesh.edge_between(v, w)] = 1;
      q.push(w);
    }
  }

  // Dual BFS tree from face 0 over edges not used by the primal tree.
  std::vector<char> fseen(nf, 0);
  std::queue<int> fq;
  fq.push(0);
  fseen[0] = 1;
  while (!fq.empty()) {
    const int f = fq.front();
    fq.pop();
    for (int e : mesh.face_edges(f)) {
      if (tc.in_tree[e] || tc.in_cotree[e]) continue;
      const TriangleMesh::Edge& ed = mesh.edges()[e];
      const int g = (ed.face[0] == f) ? ed.face[1] : ed.face[0];
      if (fseen[g]) continue;
      fseen[g] = 1;
      tc.in_cotree[e] = 1;
      tc.dual_parent[g] = f;
      tc.dual_parent_edge[g] = e;
      tc.dual_depth[g] = tc.dual_depth[f] + 1;
      fq.push(g);
    }
  }

  for (int e = 0; e < ne; ++e) {
    if (!tc.in_tree[e] && !tc.in_cotree[e]) tc.leftover.push_back(e);
  }
  const int genus = mesh.genus();
  if (static_cast<int>(tc.leftover.size()) != 2 * genus) {
    throw PreconditionError("homology: tree-cotree leftover count != 2*genus");
  }
  return tc;
}

// Crossing the primal edge into its left face counts +1 (a right-to-left
// crossing of the directed edge a->b), out of it counts -1.
void add_crossing(const TriangleMesh& mesh, Eigen::VectorXi& c, int edge_id, int to_face) {
  c[edge_id] += (left_face(mesh, edge_id) == to_face) ? 1 : -1;
}

}  // namespace

int cocycle_on_directed(const TriangleMesh& mesh, const Eigen::VectorXi& cocycle, int u, int v) {
  const int e = mesh.edge_between(u, v);
  if (e < 0) throw PreconditionError("cocycle_on_directed: vertices are not adjacent");
  return (mesh.edges()[e].a == u) ? cocycle[e] : -cocycle[e];
}

HomologyBasis homology_cocycles(const TriangleMesh& mesh) {
  const TreeCotree tc = build_tree_cotree(mesh);
  const int ne = mesh.n_edges();

  HomologyBasis basis;
  basis.leftover_edges = tc.leftover;
  for (int x : tc.leftover) {
    Eigen::VectorXi c = Eigen::VectorXi::Zero(ne);
    const TriangleMesh::Edge& ed = mesh.edges()[x];
    int fa = ed.face[0];
    int fb = ed.face[1];
    // Dual cycle: cross x from fa into fb, then return fb -> fa inside the
    // cotree (climb both endpoints to their lowest common ancestor).
    add_crossing(mesh, c, x, fb);
    int p = fb, r = fa;
    while (tc.dual_depth[p] > tc.dual_depth[r]) {
      add_crossing(mesh, c, tc.dual_parent_edge[p], tc.dual_parent[p]);
      p = tc.dual_parent[p];
    }
    while (tc.dual_depth[r] > tc.dual_depth[p]) {
      // Reversed leg: the cycle travels ancestor -> r, i.e. out of parents.
      add_crossing(mesh, c, tc.dual_parent_edge[r], tc.dual_parent[r]);
      c[tc.dual_parent_edge[r]] *= -1;
      r = tc.dual_parent[r];
    }
    while (p != r) {
      add_crossing(mesh, c, tc.dual_parent_edge[p], tc.dual_parent[p]);
      add_crossing(mesh, c, tc.dual_parent_edge[r], tc.dual_parent[r]);
      c[tc.dual_parent_edge[r]] *= -1;
      p = tc.dual_parent[p];
      r = tc.dual_parent[r];
    }

    // The cocycle vanishes on tree edges (its support crosses only cotree
    // edges and x), so its period on its own fundamental cycle is just its
    // value on x read a->b; normalize that to +1 so the basis pairs with the
    // fundamental cycles as the identity.
    if (cocycle_on_directed(mesh, c, ed.a, ed.b) < 0) c = -c;

    // A cocycle must sum to zero around every oriented face boundary; this
    // is what face lifting in covers relies on.
    for (int f = 0; f < mesh.n_faces(); ++f) {
      const auto& tri = mesh.faces()[f];
      int sum = 0;
      for (int k = 0; k < 3; ++k) {
        sum += cocycle_on_directed(mesh, c, tri[k], tri[(k + 1) % 3]);
      }
      if (sum != 0) throw PreconditionError("homology: constructed cocycle is not closed");
    }
    basis.cocycles.push_back(std::move(c));
  }
  return basis;
}

Eigen::VectorXi cocycle_periods(const TriangleMesh& mesh, const Eigen::VectorXi& cocycle) {
  if (cocycle.size() != mesh.n_edges()) {
    throw PreconditionError("cocycle_periods: cocycle length != edge count");
  }
  const TreeCotree tc = build_tree_cotree(mesh);

  // Potential q(v) = sum of the cocycle along the tree path root -> v; the
  // period of the fundamental cycle of leftover edge (u,v) is then
  // q(u) + c(u->v) - q(v), tree segments cancelling through the ancestor.
  const int nv = mesh.n_vertices();
  std::vector<long long> q(nv, 0);
  std::vector<char> seen(nv, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int w : mesh.vertex_neighbors(v)) {
      const int e = mesh.edge_between(v, w);
      if (!tc.in_tree[e] || seen[w]) continue;
      seen[w] = 1;
      q[w] = q[v] + cocycle_on_directed(mesh, cocycle, v, w);
      bfs.push(w);
    }
  }

  Eigen::VectorXi periods(static_cast<int>(tc.leftover.size()));
  for (size_t i = 0; i < tc.leftover.size(); ++i) {
    const TriangleMesh::Edge& ed = mesh.edges()[tc.leftover[i]];
    periods[static_cast<int>(i)] = static_cast<int>(
        q[ed.a] + cocycle_on_directed(mesh, cocycle, ed.a, ed.b) - q[ed.b]);
  }
  return periods;
}

SystoleEstimate systole(const Surface& surface, std::optional<double> override_value) {
  if (override_value.has_value()) {
    if (*override_value <= 0.0) throw PreconditionError("systole: override must be positive");
    return {*override_value, "user"};
  }

  const TriangleMesh& mesh = surface.mesh();
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_edges();
  const HomologyBasis basis = homology_cocycles(mesh);
  const int nb = static_cast<int>(basis.cocycles.size());

  std::vector<double> len(ne);
  for (int e = 0; e < ne; ++e) len[e] = surface.conformal_edge_length(e);

  // Root sample: exhaustive on small meshes, deterministic stride otherwise.
  std::vector<int> roots;
  if (nv <= 1100) {
    roots.resize(nv);
    for (int v = 0; v < nv; ++v) roots[v] = v;
  } else {
    const int count = std::max(256, nv / 16);
    for (int i = 0; i < count; ++i) roots.push_back(static_cast<int>(
        (static_cast<long long>(i) * nv) / count));
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> dist(nv);
  std::vector<int> parent(nv), depth(nv), order(nv);
  std::vector<std::vector<long long>> pot(nb, std::vector<long long>(nv));
  std::vector<char> tree_edge(ne);

  for (int root : roots) {
    // Shortest-path tree in the uniformized metric.
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(tree_edge.begin(), tree_edge.end(), 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[root] = 0.0;
    pq.emplace(0.0, root);
    int n_done = 0;
    std::vector<char> done(nv, 0);
    while (!pq.empty()) {
      const auto [d, v] = pq.top();
      pq.pop();
      if (done[v]) continue;
      done[v] = 1;
      order[n_done++] = v;
      for (int w : mesh.vertex_neighbors(v)) {
        const int e = mesh.edge_between(v, w);
        if (dist[v] + len[e] < dist[w]) {
          dist[w] = dist[v] + len[e];
          parent[w] = v;
          pq.emplace(dist[w], w);
        }
      }
    }

    depth[root] = 0;
    for (int i = 0; i < n_done; ++i) {
      const int v = order[i];
      if (v == root) continue;
      depth[v] = depth[parent[v]] + 1;
      tree_edge[mesh.edge_between(v, parent[v])] = 1;
    }
    for (int j = 0; j < nb; ++j) {
      pot[j][root] = 0;
      for (int i = 0; i < n_done; ++i) {
        const int v = order[i];
        if (v == root) continue;
        pot[j][v] = pot[j][parent[v]] + cocycle_on_directed(mesh, basis.cocycles[j], parent[v], v);
      }
    }

    // Every non-tree edge closes a fundamental loop; keep it only when some
    // period is nonzero (homologically, hence homotopically, nontrivial).
    for (int e = 0; e < ne; ++e) {
      if (tree_edge[e]) continue;
      const TriangleMesh::Edge& ed = mesh.edges()[e];
      bool nontrivial = false;
      for (int j = 0; j < nb && !nontrivial; ++j) {
        const long long period = pot[j][ed.a] +
            cocycle_on_directed(mesh, basis.cocycles[j], ed.a, ed.b) - pot[j][ed.b];
        nontrivial = (period != 0);
      }
      if (!nontrivial) continue;
      if (dist[ed.a] + dist[ed.b] + len[e] >= best) continue;
      // Loop length = len(e) plus both climbs to the lowest common tree
      // ancestor (the segment below the root is not part of the loop).
      int u = ed.a, v = ed.b;
      double climb = 0.0;
      while (u != v) {
        if (depth[u] < depth[v]) std::swap(u, v);
        climb += len[mesh.edge_between(u, parent[u])];
        u = parent[u];
      }
      best = std::min(best, len[e] + climb);
    }
  }

  if (!std::isfinite(best)) {
    throw ConvergenceError("systole: no homologically nontrivial loop found");
  }
  return {best, "upper-bound-estimate"};
}

}  // namespace curvlab
