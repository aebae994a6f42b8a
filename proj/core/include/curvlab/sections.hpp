#pragma once

#include <utility>
#include <vector>

#include "curvlab/surface.hpp"

namespace curvlab {

// Synthetic line-bundle section norm with prescribed zero divisor: psi is the
// zero-mean solution of  Delta psi = 2 pi (sum_i m_i delta_{z_i} - n / Vol)
// (point masses as mu-normalized vertex loads) and f_alpha = s e^{2 psi}.
// True zeros become deep minima of psi; "zero" always means the marked
// vertices.  bal(f_alpha) = mean/sup is scale free.
struct SectionNormSpec {
  const Surface* surface = nullptr;
  std::vector<std::pair<int, int>> zeros;  // (vertex id, multiplicity >= 1)
  int degree = 0;                          // n = sum of multiplicities
  ScalarField psi;
  ScalarField f_alpha;
  double scale = 1.0;
  double bal = 0.0;
  // sup_i |mu_i (Delta psi)_i - 2 pi (m_i - n mu_i / Vol)|: how well the
  // discrete field realizes the point-mass identity.
  double distributional_residual = 0.0;
};

enum class ScaleMode { kSupOne, kL2One };

SectionNormSpec build_section_norm(const Surface& surface,
                                   const std::vector<std::pair<int, int>>& zeros,
                                   ScaleMode mode = ScaleMode::kSupOne, double tol = 1e-10);

// Two-zone bounds after sup-normalization: the on-zone is the union of
// graph-distance disks of radius r around the zeros (a proxy for metric
// disks), C2 = sup over it, C1 = max(sup, 1/inf) over the complement.
// Requires r < delta/2.
struct FgbalBounds {
  double r = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double off_zone_inf = 0.0;
  int on_zone_size = 0;
  int off_zone_size = 0;
};

FgbalBounds check_fgbal_bounds(const SectionNormSpec& spec, double r, double delta);

// Distances from the nearest source vertex along the 1-skeleton in the
// uniformized metric (multi-source Dijkstra); shared by zone checks and the
// marked-vertex choice in families.
std::vector<double> graph_distances(const Surface& surface, const std::vector<int>& sources);

}  // namespace curvlab
