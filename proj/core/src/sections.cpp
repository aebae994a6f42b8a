#include "curvlab/sections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "curvlab/elliptic.hpp"
#include "curvlab/errors.hpp"

namespace curvlab {

SectionNormSpec build_section_norm(const Surface& surface,
                                   const std::vector<std::pair<int, int>>& zeros,
                                   ScaleMode mode, double tol) {
  if (zeros.empty()) throw PreconditionError("build_section_norm: n >= 1 required");
  const int nv = surface.n_vertices();
  std::set<int> distinct;
  int n = 0;
  for (const auto& [z, m] : zeros) {
    if (z < 0 || z >= nv) {
      std::ostringstream msg;
      msg << "build_section_norm: zero vertex " << z << " out of range";
      throw PreconditionError(msg.str());
    }
    if (m < 1) throw PreconditionError("build_section_norm: multiplicities must be >= 1");
    if (!distinct.insert(z).second) {
      throw PreconditionError("build_section_norm: zero vertices must be distinct");
    }
    n += m;
  }

  // Point loads minus the uniform curvature part; the means cancel exactly.
  const Eigen::VectorXd& mu = surface.mu();
  const double vol = surface.volume();
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(nv, -2.0 * M_PI * n / vol);
  for (const auto& [z, m] : zeros) rhs[z] += 2.0 * M_PI * m / mu[z];

  PoissonOptions popts;
  popts.tol = tol;
  popts.project_mean = true;  // strip rounding residue of the exact cancellation
  const PoissonSolution sol = solve_poisson_zero_mean(surface, surface.field(rhs), popts);

  SectionNormSpec spec;
  spec.surface = &surface;
  spec.zeros = zeros;
  spec.degree = n;
  spec.psi = sol.v;

  Eigen::VectorXd f = (2.0 * sol.v.values()).array().exp();
  if (mode == ScaleMode::kSupOne) {
    spec.scale = 1.0 / f.maxCoeff();
  } else {
    spec.scale = 1.0 / std::sqrt((f.array().square() * mu.array()).sum());
  }
  f *= spec.scale;
  spec.f_alpha = surface.field(f);
  spec.bal = balance_ratio(spec.f_alpha);

  // Distributional identity: integrating Delta psi against vertex indicators
  // must return the point masses minus the uniform share.
  const ScalarField lap = laplacian(spec.psi);
  Eigen::VectorXd target = Eigen::VectorXd::Constant(nv, 0.0);
  for (const auto& [z, m] : zeros) target[z] = 2.0 * M_PI * m;
  double worst = 0.0;
  for (int i = 0; i < nv; ++i) {
    worst = std::max(worst,
                     std::abs(mu[i] * lap[i] - (target[i] - 2.0 * M_PI * n * mu[i] / vol)));
  }
  spec.distributional_residual = worst;
  return spec;
}

std::vector<double> graph_distances(const Surface& surface, const std::vector<int>& sources) {
  const TriangleMesh& mesh = surface.mesh();
  const int nv = mesh.n_vertices();
  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int s : sources) {
    if (s < 0 || s >= nv) throw PreconditionError("graph_distances: source out of range");
    dist[s] = 0.0;
    pq.emplace(0.0, s);
  }
  std::vector<char> done(nv, 0);
  while (!pq.empty()) {
    const auto [d, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (int w : mesh.vertex_neighbors(v)) {
      const double nd = d + surface.conformal_edge_length(mesh.edge_between(v, w));
      if (nd < dist[w]) {
        dist[w] = nd;
        pq.emplace(nd, w);
      }
    }
  }
  return dist;
}

FgbalBounds check_fgbal_bounds(const SectionNormSpec& spec, double r, double delta) {
  if (spec.surface == nullptr || spec.degree < 1) {
    throw PreconditionError("check_fgbal_bounds: n >= 1 required");
  }
  if (!(r > 0.0)) throw PreconditionError("check_fgbal_bounds: r must be positive");
  if (r >= 0.5 * delta) {
    std::ostringstream msg;
    msg << "check_fgbal_bounds: r = " << r << " must be below half the systole (" << 0.5 * delta
        << ")";
    throw PreconditionError(msg.str());
  }

  std::vector<int> sources;
  for (const auto& [z, m] : spec.zeros) sources.push_back(z);
  const std::vector<double> dist = graph_distances(*spec.surface, sources);

  const Eigen::VectorXd f = spec.f_alpha.values() / spec.f_alpha.values().maxCoeff();
  FgbalBounds out;
  out.r = r;
  double on_sup = 0.0;
  double off_sup = 0.0;
  double off_inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.size(); ++i) {
    if (dist[i] <= r) {
      ++out.on_zone_size;
      on_sup = std::max(on_sup, f[i]);
    } else {
      ++out.off_zone_size;
      off_sup = std::max(off_sup, f[i]);
      off_inf = std::min(off_inf, f[i]);
    }
  }
  if (out.off_zone_size == 0) {
    throw PreconditionError("check_fgbal_bounds: zones cover the whole surface");
  }
  out.C2 = on_sup;
  out.off_zone_inf = off_inf;
  out.C1 = std::max(off_sup, 1.0 / off_inf);
  return out;
}

}  // namespace curvlab
