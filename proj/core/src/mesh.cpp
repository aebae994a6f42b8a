#include "curvlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

std::string simplex_str(int a, int b, int c = -1) {
  std::ostringstream os;
  os << "(" << a << "," << b;
  if (c >= 0) os << "," << c;
  os << ")";
  return os.str();
}

}  // namespace

TriangleMesh::TriangleMesh(int vertex_count, std::vector<std::array<int, 3>> faces,
                           const std::vector<std::tuple<int, int, double>>& edge_lengths,
                           std::vector<std::array<double, 3>> positions)
    : n_vertices_(vertex_count), faces_(std::move(faces)), positions_(std::move(positions)) {
  if (n_vertices_ < 3) throw PreconditionError("mesh needs at least 3 vertices");
  if (!positions_.empty() && static_cast<int>(positions_.size()) != n_vertices_)
    throw PreconditionError("positions count does not match vertex count");

  std::map<std::pair<int, int>, double> length_of;
  for (const auto& [a, b, len] : edge_lengths) {
    if (a == b) throw PreconditionError("edge " + simplex_str(a, b) + " is degenerate");
    if (!(len > 0.0) || !std::isfinite(len))
      throw PreconditionError("edge " + simplex_str(a, b) + " has nonpositive length");
    auto key = std::minmax(a, b);
    auto [it, inserted] = length_of.emplace(key, len);
    if (!inserted && std::abs(it->second - len) > 1e-9 * std::max(1.0, it->second))
      throw PreconditionError("edge " + simplex_str(a, b) + " given two different lengths");
  }

  build_connectivity();

  for (auto& e : edges_) {
    auto it = length_of.find({e.a, e.b});
    if (it == length_of.end())
      throw PreconditionError("edge " + simplex_str(e.a, e.b) + " has no length");
    e.length = it->second;
  }

  validate();
}

TriangleMesh TriangleMesh::from_positions(std::vector<std::array<double, 3>> positions,
                                          std::vector<std::array<int, 3>> faces) {
  std::map<std::pair<int, int>, double> seen;
  std::vector<std::tuple<int, int, double>> lengths;
  auto dist = [&](int a, int b) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = positions[a][k] - positions[b][k];
      s += d * d;
    }
    return std::sqrt(s);
  };
  for (const auto& f : faces) {
    for (int c = 0; c < 3; ++c) {
      const int a = f[c], b = f[(c + 1) % 3];
      if (a < 0 || b < 0 || a >= static_cast<int>(positions.size()) ||
          b >= static_cast<int>(positions.size()))
        throw PreconditionError("face references vertex out of range");
      auto key = std::minmax(a, b);
      if (seen.emplace(key, 0.0).second) lengths.emplace_back(key.first, key.second, dist(a, b));
    }
  }
  const int nv = static_cast<int>(positions.size());
  return TriangleMesh(nv, std::move(faces), lengths, std::move(positions));
}

void TriangleMesh::build_connectivity() {
  std::map<std::pair<int, int>, int> edge_id;
  face_edges_.assign(faces_.size(), {-1, -1, -1});
  for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
    const auto& fc = faces_[f];
    if (fc[0] == fc[1] || fc[1] == fc[2] || fc[0] == fc[2])
      throw PreconditionError("face " + std::to_string(f) + " has repeated vertices");
    for (int c = 0; c < 3; ++c) {
      const int v = fc[c];
      if (v < 0 || v >= n_vertices_)
        throw PreconditionError("face " + std::to_string(f) + " references vertex out of range");
    }
    for (int c = 0; c < 3; ++c) {
      // Edge opposite corner c.
      const int a = fc[(c + 1) % 3], b = fc[(c + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_id.find(key);
      int e;
      if (it == edge_id.end()) {
        e = static_cast<int>(edges_.size());
        edge_id.emplace(key, e);
        Edge edge;
        edge.a = key.first;
        edge.b = key.second;
        edges_.push_back(edge);
      } else {
        e = it->second;
      }
      face_edges_[f][c] = e;
      Edge& edge = edges_[e];
      if (edge.face[0] == -1) {
        edge.face[0] = f;
      } else if (edge.face[1] == -1) {
        edge.face[1] = f;
      } else {
        throw PreconditionError("edge " + simplex_str(edge.a, edge.b) +
                                " has more than two incident faces");
      }
    }
  }

  neighbors_.assign(n_vertices_, {});
  for (const auto& e : edges_) {
    neighbors_[e.a].push_back(e.b);
    neighbors_[e.b].push_back(e.a);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());

  vertex_faces_.assign(n_vertices_, {});
  for (int f = 0; f < static_cast<int>(faces_.size()); ++f)
    for (int c = 0; c < 3; ++c) vertex_faces_[faces_[f][c]].push_back(f);
}

void TriangleMesh::validate() const {
  for (const auto& e : edges_)
    if (e.face[1] == -1)
      throw PreconditionError("edge " + simplex_str(e.a, e.b) +
                              " has one incident face; the mesh is not closed");

  // Input windings must be globally consistent: each edge appears once in
  // each direction among the directed face boundaries.
  {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& fc : faces_)
      for (int c = 0; c < 3; ++c) {
        const int a = fc[c], b = fc[(c + 1) % 3];
        if (++directed[{a, b}] > 1)
          throw PreconditionError("faces induce inconsistent orientations across edge " +
                                  simplex_str(a, b));
      }
  }

  // Vertex links must be single cycles: walk faces around each vertex via
  // shared edges and require one closed orbit covering all incident faces.
  for (int v = 0; v < n_vertices_; ++v) {
    const auto& inc = vertex_faces_[v];
    if (inc.empty()) throw PreconditionError("vertex " + std::to_string(v) + " is isolated");
    const int f0 = inc[0];
    int prev = -1, cur = f0, count = 0;
    do {
      ++count;
      if (count > static_cast<int>(inc.size())) break;
      int next = -1;
      // Locate the two edges of `cur` through v, step across the one not
      // leading back to `prev`.
      for (int c = 0; c < 3; ++c) {
        const int e = face_edges_[cur][c];
        const Edge& edge = edges_[e];
        if (edge.a != v && edge.b != v) continue;
        const int other = edge.face[0] == cur ? edge.face[1] : edge.face[0];
        if (other != prev) {
          next = other;
          break;
        }
      }
      if (next == -1) break;
      prev = cur;
      cur = next;
    } while (cur != f0);
    if (cur != f0 || count != static_cast<int>(inc.size()))
      throw PreconditionError("vertex " + std::to_string(v) + " link is not a single cycle");
  }

  for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
    const double a = edges_[face_edges_[f][0]].length;
    const double b = edges_[face_edges_[f][1]].length;
    const double c = edges_[face_edges_[f][2]].length;
    if (!(a < b + c && b < a + c && c < a + b))
      throw PreconditionError("face " + std::to_string(f) +
                              " violates the strict triangle inequality");
  }
}

int TriangleMesh::edge_between(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_vertices_ || b >= n_vertices_) return -1;
  // Vertex degrees are small; scan the incident faces' edges.
  for (const int f : vertex_faces_[a])
    for (int c = 0; c < 3; ++c) {
      const Edge& e = edges_[face_edges_[f][c]];
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return face_edges_[f][c];
    }
  return -1;
}

double TriangleMesh::corner_angle(int f, int c) const {
  const double a = edges_[face_edges_[f][c]].length;          // opposite the corner
  const double b = edges_[face_edges_[f][(c + 1) % 3]].length;
  const double d = edges_[face_edges_[f][(c + 2) % 3]].length;
  double cosv = (b * b + d * d - a * a) / (2.0 * b * d);
  cosv = std::clamp(cosv, -1.0, 1.0);
  return std::acos(cosv);
}

double TriangleMesh::face_area(int f) const {
  double a = edges_[face_edges_[f][0]].length;
  double b = edges_[face_edges_[f][1]].length;
  double c = edges_[face_edges_[f][2]].length;
  // Kahan's numerically stable Heron: sort a >= b >= c.
  if (a < b) std::swap(a, b);
  if (b < c) std::swap(b, c);
  if (a < b) std::swap(a, b);
  const double s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  if (!(s > 0.0))
    throw PreconditionError("face " + std::to_string(f) + " is metrically degenerate");
  return 0.25 * std::sqrt(s);
}

// ---------------------------------------------------------------------------
// I/O

namespace {

// Strips comments (# to end of line) and returns the next whitespace token.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}
  bool next(std::string& tok) {
    while (true) {
      if (!(in_ >> tok)) return false;
      if (!tok.empty() && tok[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return true;
    }
  }
  template <typename T>
  T require(const char* what) {
    std::string tok;
    if (!next(tok)) throw IoError(std::string("unexpected end of mesh input reading ") + what);
    std::istringstream is(tok);
    T value;
    if (!(is >> value) || !is.eof())
      throw IoError(std::string("malformed ") + what + " token '" + tok + "'");
    return value;
  }

 private:
  std::istream& in_;
};

}  // namespace

TriangleMesh read_mesh(std::istream& in, MeshFormat format) {
  TokenReader tr(in);
  std::string magic;
  if (!tr.next(magic)) throw IoError("empty mesh input");
  if (format == MeshFormat::kOff) {
    if (magic != "OFF") throw IoError("expected OFF header, got '" + magic + "'");
    const int nv = tr.require<int>("vertex count");
    const int nf = tr.require<int>("face count");
    (void)tr.require<long long>("edge count");
    std::vector<std::array<double, 3>> pos(nv);
    for (int v = 0; v < nv; ++v)
      for (int k = 0; k < 3; ++k) pos[v][k] = tr.require<double>("vertex coordinate");
    std::vector<std::array<int, 3>> faces(nf);
    for (int f = 0; f < nf; ++f) {
      const int deg = tr.require<int>("face degree");
      if (deg != 3) throw IoError("face " + std::to_string(f) + " is not a triangle");
      for (int c = 0; c < 3; ++c) faces[f][c] = tr.require<int>("face vertex");
    }
    return TriangleMesh::from_positions(std::move(pos), std::move(faces));
  }
  if (magic != "INTRINSIC") throw IoError("expected INTRINSIC header, got '" + magic + "'");
  const int nv = tr.require<int>("vertex count");
  const int nf = tr.require<int>("face count");
  const int ne = tr.require<int>("edge count");
  std::vector<std::array<int, 3>> faces(nf);
  for (int f = 0; f < nf; ++f) {
    const int deg = tr.require<int>("face degree");
    if (deg != 3) throw IoError("face " + std::to_string(f) + " is not a triangle");
    for (int c = 0; c < 3; ++c) faces[f][c] = tr.require<int>("face vertex");
  }
  std::vector<std::tuple<int, int, double>> lengths(ne);
  for (int e = 0; e < ne; ++e) {
    const int a = tr.require<int>("edge endpoint");
    const int b = tr.require<int>("edge endpoint");
    const double len = tr.require<double>("edge length");
    lengths[e] = {a, b, len};
  }
  return TriangleMesh(nv, std::move(faces), lengths);
}

TriangleMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  // Sniff the header token to pick the format.
  std::string magic;
  in >> magic;
  in.seekg(0);
  if (magic == "OFF") return read_mesh(in, MeshFormat::kOff);
  if (magic == "INTRINSIC") return read_mesh(in, MeshFormat::kIntrinsic);
  throw IoError("unrecognized mesh header '" + magic + "' in '" + path + "'");
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh, MeshFormat format) {
  char buf[64];
  if (format == MeshFormat::kOff) {
    if (!mesh.has_positions())
      throw PreconditionError("mesh has no positions; use the intrinsic format");
    out << "OFF\n" << mesh.n_vertices() << " " << mesh.n_faces() << " " << mesh.n_edges() << "\n";
    for (const auto& p : mesh.positions()) {
      for (int k = 0; k < 3; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", p[k]);
        out << buf << (k == 2 ? "\n" : " ");
      }
    }
    for (const auto& f : mesh.faces()) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    return;
  }
  out << "INTRINSIC\n" << mesh.n_vertices() << " " << mesh.n_faces() << " " << mesh.n_edges()
      << "\n";
  for (const auto& f : mesh.faces()) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  for (const auto& e : mesh.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.length);
    out << e.a << " " << e.b << " " << buf << "\n";
  }
}

// ---------------------------------------------------------------------------
// Generators

TriangleMesh regular_octagon_genus2(int n) {
  // n = 2 identifies distinct chart edges onto the same vertex pair, breaking
  // manifoldness; n = 3 is the coarsest simplicial refinement.
  if (n < 3) throw PreconditionError("regular-octagon-genus2 requires n >= 3");

  // Chart corners of the regular octagon, circumradius 1.
  std::array<std::array<double, 2>, 8> corner;
  for (int k = 0; k < 8; ++k) {
    const double th = M_PI / 8.0 + k * (M_PI / 4.0);
    corner[k] = {std::cos(th), std::sin(th)};
  }

  // Identified-vertex ids.  Side s is traversed corner s -> corner s+1; the
  // word a b a' b' c d c' d' glues side s to side s+2 reversed for
  // s in {0,1,4,5}: point m on side s == point n-m on side s+2.
  const int kCenter = 0, kCone = 1;
  auto ray_id = [&](int k, int m) { return 2 + k * (n - 1) + (m - 1); };
  const int side_base = 2 + 8 * (n - 1);
  auto side_slot = [](int s) { return s == 0 ? 0 : s == 1 ? 1 : s == 4 ? 2 : 3; };
  auto side_id = [&](int s, int m) {
    if (s == 2 || s == 3 || s == 6 || s == 7) {
      s -= 2;
      m = n - m;
    }
    return side_base + side_slot(s) * (n - 1) + (m - 1);
  };
  const int interior_base = side_base + 4 * (n - 1);
  const int interior_per_fan = (n - 1) * (n - 2) / 2;
  auto interior_id = [&](int k, int i, int j) {
    // Lex rank of (i, j) with i >= 1, j >= 1, i + j <= n - 1.
    const int rank = (i - 1) * (n - 2) - (i - 1) * (i - 2) / 2 + (j - 1);
    return interior_base + k * interior_per_fan + rank;
  };
  const int nv = interior_base + 8 * interior_per_fan;

  auto vertex_of = [&](int k, int i, int j) -> int {
    if (i == 0 && j == 0) return kCenter;
    if (i + j == n) {
      if (j == 0 || i == 0) return kCone;  // octagon corners
      return side_id(k, j);
    }
    if (j == 0) return ray_id(k, i);
    if (i == 0) return ray_id((k + 1) % 8, j);
    return interior_id(k, i, j);
  };

  std::vector<std::array<double, 3>> pos(nv, {0.0, 0.0, 0.0});
  std::vector<std::array<int, 3>> faces;
  faces.reserve(8 * n * n);
  std::map<std::pair<int, int>, double> length_of;

  for (int k = 0; k < 8; ++k) {
    const auto& A = corner[k];
    const auto& B = corner[(k + 1) % 8];
    auto chart = [&](int i, int j) -> std::array<double, 2> {
      const double s = static_cast<double>(i) / n, t = static_cast<double>(j) / n;
      return {s * A[0] + t * B[0], s * A[1] + t * B[1]};
    };
    auto register_face = [&](std::array<std::array<int, 2>, 3> lat) {
      std::array<int, 3> f;
      std::array<std::array<double, 2>, 3> p;
      for (int c = 0; c < 3; ++c) {
        f[c] = vertex_of(k, lat[c][0], lat[c][1]);
        p[c] = chart(lat[c][0], lat[c][1]);
        pos[f[c]] = {p[c][0], p[c][1], 0.0};
      }
      faces.push_back(f);
      for (int c = 0; c < 3; ++c) {
        const int a = f[c], b = f[(c + 1) % 3];
        const double dx = p[c][0] - p[(c + 1) % 3][0], dy = p[c][1] - p[(c + 1) % 3][1];
        length_of[std::minmax(a, b)] = std::sqrt(dx * dx + dy * dy);
      }
    };
    for (int i = 0; i + 1 <= n; ++i)
      for (int j = 0; i + j + 1 <= n; ++j) {
        register_face({{{i, j}, {i + 1, j}, {i, j + 1}}});
        if (i + j + 2 <= n) register_face({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
      }
  }

  std::vector<std::tuple<int, int, double>> lengths;
  lengths.reserve(length_of.size());
  for (const auto& [key, len] : length_of) lengths.emplace_back(key.first, key.second, len);
  return TriangleMesh(nv, std::move(faces), lengths, std::move(pos));
}

TriangleMesh flat_torus(int n) {
  if (n < 3) throw PreconditionError("flat-torus requires n >= 3");
  const double h = 1.0 / n, d = std::sqrt(2.0) / n;
  auto vid = [&](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
  std::vector<std::array<double, 3>> pos(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pos[vid(i, j)] = {i * h, j * h, 0.0};
  std::vector<std::array<int, 3>> faces;
  faces.reserve(2 * n * n);
  std::map<std::pair<int, int>, double> length_of;
  auto add_edge = [&](int a, int b, double len) { length_of[std::minmax(a, b)] = len; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      faces.push_back({v00, v10, v11});
      faces.push_back({v00, v11, v01});
      add_edge(v00, v10, h);
      add_edge(v10, v11, h);
      add_edge(v00, v11, d);
      add_edge(v00, v01, h);
      add_edge(v01, v11, h);
    }
  std::vector<std::tuple<int, int, double>> lengths;
  lengths.reserve(length_of.size());
  for (const auto& [key, len] : length_of) lengths.emplace_back(key.first, key.second, len);
  return TriangleMesh(n * n, std::move(faces), lengths, std::move(pos));
}

TriangleMesh make_generated_mesh(const std::string& generator_spec) {
  const auto open = generator_spec.find('(');
  const auto close = generator_spec.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw PreconditionError("generator spec must look like name(n): '" + generator_spec + "'");
  const std::string name = generator_spec.substr(0, open);
  int n = 0;
  try {
    n = std::stoi(generator_spec.substr(open + 1, close - open - 1));
  } catch (const std::exception&) {
    throw PreconditionError("generator spec has a malformed size: '" + generator_spec + "'");
  }
  if (name == "regular-octagon-genus2") return regular_octagon_genus2(n);
  if (name == "flat-torus") return flat_torus(n);
  throw PreconditionError("unknown mesh generator '" + name + "'");
}

}  // namespace curvlab
