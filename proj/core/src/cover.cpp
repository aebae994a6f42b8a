#include "curvlab/cover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "curvlab/elliptic.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/spectral.hpp"

namespace curvlab {

int CoverSpec::lift_vertex(int base_vertex, int sheet) const {
  return sheet * (cover.n_vertices() / k) + base_vertex;
}
int CoverSpec::base_vertex(int cover_vertex) const {
  return cover_vertex % (cover.n_vertices() / k);
}
int CoverSpec::sheet(int cover_vertex) const {
  return cover_vertex / (cover.n_vertices() / k);
}

ScalarField CoverSpec::lift_field(const ScalarField& base_field) const {
  const int nb = cover.n_vertices() / k;
  if (base_field.size() != nb) {
    throw PreconditionError("lift_field: base field size does not match the base surface");
  }
  Eigen::VectorXd lifted(cover.n_vertices());
  for (int s = 0; s < k; ++s) lifted.segment(static_cast<long>(s) * nb, nb) = base_field.values();
  return cover.field(lifted);
}

CoverSpec cyclic_cover(const Surface& base, const Eigen::VectorXi& cocycle, int k) {
  if (k < 2) throw PreconditionError("cyclic_cover: k >= 2 required");
  const TriangleMesh& mesh = base.mesh();
  if (cocycle.size() != mesh.n_edges()) {
    throw PreconditionError("cyclic_cover: cocycle length != edge count");
  }

  // Closedness around every face (otherwise faces cannot glue).
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& tri = mesh.faces()[f];
    int sum = 0;
    for (int c = 0; c < 3; ++c) sum += cocycle_on_directed(mesh, cocycle, tri[c], tri[(c + 1) % 3]);
    if (sum != 0) throw PreconditionError("cyclic_cover: cocycle is not closed on faces");
  }

  // Primitivity: the periods along a homology basis must have gcd 1, which
  // keeps every k-cyclic cover connected.
  const Eigen::VectorXi periods = cocycle_periods(mesh, cocycle);
  int gcd = 0;
  for (int i = 0; i < periods.size(); ++i) gcd = std::gcd(gcd, std::abs(periods[i]));
  if (gcd != 1) {
    std::ostringstream msg;
    msg << "cyclic_cover: cocycle is not primitive (period gcd = " << gcd << ")";
    throw PreconditionError(msg.str());
  }

  const int nv = mesh.n_vertices();
  auto wrap = [&](int s) { return ((s % k) + k) % k; };
  auto vid = [&](int v, int s) { return wrap(s) * nv + v; };

  std::vector<std::array<int, 3>> faces;
  faces.reserve(static_cast<size_t>(mesh.n_faces()) * k);
  for (int s = 0; s < k; ++s) {
    for (int f = 0; f < mesh.n_faces(); ++f) {
      const auto& tri = mesh.faces()[f];
      const int s1 = s + cocycle_on_directed(mesh, cocycle, tri[0], tri[1]);
      const int s2 = s1 + cocycle_on_directed(mesh, cocycle, tri[1], tri[2]);
      faces.push_back({vid(tri[0], s), vid(tri[1], s1), vid(tri[2], s2)});
    }
  }

  std::vector<std::tuple<int, int, double>> lengths;
  lengths.reserve(static_cast<size_t>(mesh.n_edges()) * k);
  for (int s = 0; s < k; ++s) {
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const TriangleMesh::Edge& ed = mesh.edges()[e];
      lengths.emplace_back(vid(ed.a, s), vid(ed.b, s + cocycle[e]), ed.length);
    }
  }

  TriangleMesh cover_mesh(nv * k, std::move(faces), lengths);
  const int g = mesh.genus();
  const int expected = k * (g - 1) + 1;
  if (cover_mesh.genus() != expected) {
    std::ostringstream msg;
    msg << "cyclic_cover: cover genus " << cover_mesh.genus() << " != k(g-1)+1 = " << expected;
    throw PreconditionError(msg.str());
  }

  Eigen::VectorXd phi(nv * k);
  for (int s = 0; s < k; ++s) phi.segment(static_cast<long>(s) * nv, nv) = base.phi();

  CoverSpec spec;
  spec.k = k;
  spec.cocycle = cocycle;
  spec.genus_base = g;
  spec.genus_cover = expected;
  spec.cover = Surface::from_phi(std::move(cover_mesh), std::move(phi));
  return spec;
}

BalancedFamilyReport build_balanced_family(const Surface& base, const SectionNormSpec& base_spec,
                                           const Eigen::VectorXi& cocycle,
                                           const std::vector<int>& k_list, int d,
                                           ScaleMode mode) {
  if (base_spec.surface != &base) {
    throw PreconditionError("build_balanced_family: spec does not belong to the base surface");
  }
  if (d < 0) throw PreconditionError("build_balanced_family: d >= 0 required");
  if (k_list.empty()) throw PreconditionError("build_balanced_family: empty k list");

  BalancedFamilyReport report;
  report.d = d;
  report.base_degree = base_spec.degree;
  report.inf_bal = std::numeric_limits<double>::infinity();
  report.inf_lambda = std::numeric_limits<double>::infinity();
  report.inf_delta = std::numeric_limits<double>::infinity();

  for (int k : k_list) {
    FamilyMember member;
    member.k = k;
    member.cover = std::make_unique<CoverSpec>(cyclic_cover(base, cocycle, k));
    const Surface& cs = member.cover->cover;
    member.genus = member.cover->genus_cover;

    // Lifted divisor: every sheet copy of every base zero.
    std::vector<std::pair<int, int>> zeros;
    std::vector<int> zero_vertices;
    for (const auto& [z, m] : base_spec.zeros) {
      for (int s = 0; s < k; ++s) {
        zeros.emplace_back(member.cover->lift_vertex(z, s), m);
        zero_vertices.push_back(member.cover->lift_vertex(z, s));
      }
    }

    ScalarField psi = member.cover->lift_field(base_spec.psi);
    if (d >= 1) {
      // Fresh zero at the cover vertex farthest from the lifted divisor
      // (deterministic: smallest id among maximizers).
      const std::vector<double> dist = graph_distances(cs, zero_vertices);
      int marked = 0;
      for (int v = 1; v < cs.n_vertices(); ++v) {
        if (dist[v] > dist[marked]) marked = v;
      }
      member.marked_vertex = marked;
      const SectionNormSpec factor = build_section_norm(cs, {{marked, d}}, mode);
      psi = psi + factor.psi;
      zeros.emplace_back(marked, d);
    }

    SectionNormSpec spec;
    spec.surface = &cs;
    spec.zeros = zeros;
    spec.degree = k * base_spec.degree + d;
    spec.psi = psi;
    Eigen::VectorXd f = (2.0 * psi.values()).array().exp();
    spec.scale = (mode == ScaleMode::kSupOne)
                     ? 1.0 / f.maxCoeff()
                     : 1.0 / std::sqrt((f.array().square() * cs.mu().array()).sum());
    f *= spec.scale;
    spec.f_alpha = cs.field(f);
    spec.bal = balance_ratio(spec.f_alpha);

    const ScalarField lap = laplacian(spec.psi);
    const double vol = cs.volume();
    double worst = 0.0;
    Eigen::VectorXd point = Eigen::VectorXd::Zero(cs.n_vertices());
    for (const auto& [z, m] : zeros) point[z] += 2.0 * M_PI * m;
    for (int i = 0; i < cs.n_vertices(); ++i) {
      worst = std::max(worst, std::abs(cs.mu()[i] * lap[i] -
                                       (point[i] - 2.0 * M_PI * spec.degree * cs.mu()[i] / vol)));
    }
    spec.distributional_residual = worst;

    member.lambda = spectral_gap(cs, 1).values[0];
    member.delta = systole(cs).value;

    report.inf_bal = std::min(report.inf_bal, spec.bal);
    report.inf_lambda = std::min(report.inf_lambda, member.lambda);
    report.inf_delta = std::min(report.inf_delta, member.delta);
    member.spec = std::move(spec);
    report.members.push_back(std::move(member));
  }
  return report;
}

}  // namespace curvlab
