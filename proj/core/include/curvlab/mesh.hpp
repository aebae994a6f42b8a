#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

namespace curvlab {

// Closed oriented triangle mesh carrying an intrinsic metric (one positive
// length per undirected edge).  Vertex positions are optional and used for
// I/O and test-field construction only; every geometric quantity downstream
// is computed from the edge lengths.
class TriangleMesh {
 public:
  struct Edge {
    int a = -1, b = -1;       // endpoint vertices, a < b
    double length = 0.0;      // intrinsic length, > 0
    int face[2] = {-1, -1};   // incident faces (closed manifold: exactly two)
  };

  TriangleMesh() = default;

  // Builds connectivity and validates: every edge has exactly two incident
  // faces, vertex links are single cycles, a consistent global orientation
  // exists, and every face satisfies the strict triangle inequality.
  // Lengths are supplied as (a, b, length) triples covering every edge of
  // the face list.  Throws PreconditionError with the first offending
  // simplex otherwise.
  TriangleMesh(int vertex_count, std::vector<std::array<int, 3>> faces,
               const std::vector<std::tuple<int, int, double>>& edge_lengths,
               std::vector<std::array<double, 3>> positions = {});

  // Convenience constructor: lengths derived from vertex positions.
  static TriangleMesh from_positions(std::vector<std::array<double, 3>> positions,
                                     std::vector<std::array<int, 3>> faces);

  int n_vertices() const { return n_vertices_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  int euler_characteristic() const { return n_vertices_ - n_edges() + n_faces(); }
  int genus() const { return (2 - euler_characteristic()) / 2; }

  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::array<double, 3>>& positions() const { return positions_; }
  bool has_positions() const { return !positions_.empty(); }

  // Edge id for an unordered vertex pair; -1 if absent.
  int edge_between(int a, int b) const;
  double edge_length(int e) const { return edges_[e].length; }
  // Edge ids of face f opposite to its corners 0,1,2.
  const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
  // Vertex ids adjacent to v (sorted).
  const std::vector<int>& vertex_neighbors(int v) const { return neighbors_[v]; }
  // Face ids incident to v.
  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }

  // Interior angle of face f at its corner c (law of cosines on the
  // intrinsic lengths).
  double corner_angle(int f, int c) const;
  // Face area from intrinsic lengths (numerically stabilized Heron).
  double face_area(int f) const;

 private:
  void build_connectivity();
  void validate() const;

  int n_vertices_ = 0;
  std::vector<std::array<int, 3>> faces_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::array<double, 3>> positions_;
};

enum class MeshFormat { kOff, kIntrinsic };

// "OFF" text (positions + faces; lengths from positions) or "INTRINSIC"
// text (faces + per-edge lengths, no embedding).  Throws IoError on parse
// problems, PreconditionError on validation failures.
TriangleMesh read_mesh(std::istream& in, MeshFormat format);
TriangleMesh read_mesh_file(const std::string& path);  // format from content
void write_mesh(std::ostream& out, const TriangleMesh& mesh, MeshFormat format);

// Built-in generators.
//
// regular_octagon_genus2(n): the regular Euclidean octagon with the side
// identification a b a' b' c d c' d', triangulated by an n-fold uniform
// subdivision of the eight center fans.  Genus 2; all curvature of the flat
// cone metric sits at the single identified corner vertex (angle 6*pi).
// V = 4n^2 - 2, F = 8n^2.
TriangleMesh regular_octagon_genus2(int n);

// flat_torus(n): unit square, n x n grid, diagonal split, opposite sides
// identified.  Genus 1 — accepted by operator unit tests only, never by
// uniformization.  Positions record the (x, y) parameters.
TriangleMesh flat_torus(int n);

// Parses "regular-octagon-genus2(n)" / "flat-torus(n)" generator strings.
TriangleMesh make_generated_mesh(const std::string& generator_spec);

}  // namespace curvlab
