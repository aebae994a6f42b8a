#pragma once

#include <memory>
#include <vector>

#include "curvlab/sections.hpp"
#include "curvlab/surface.hpp"
#include "curvlab/systole.hpp"

namespace curvlab {

// k-cyclic cover cut along a primitive integer 1-cocycle: vertex (v, sheet s)
// gets id s*nv + v, the directed edge u->w on sheet s lands on sheet
// s + c(u->w) mod k, and faces glue consistently because the cocycle sums to
// zero around face boundaries.  Metric and conformal factor lift verbatim, so
// the cover is hyperbolic with genus k(g-1)+1.
struct CoverSpec {
  int k = 0;
  Eigen::VectorXi cocycle;
  Surface cover;
  int genus_base = 0;
  int genus_cover = 0;

  int lift_vertex(int base_vertex, int sheet) const;
  int base_vertex(int cover_vertex) const;
  int sheet(int cover_vertex) const;
  ScalarField lift_field(const ScalarField& base_field) const;
};

CoverSpec cyclic_cover(const Surface& base, const Eigen::VectorXi& cocycle, int k);

// One member of a balanced family: the base divisor lifted to the k-cover
// plus a fresh zero of multiplicity d at the cover vertex farthest from the
// lifted divisor.  degree = k * base_degree + d.
struct FamilyMember {
  std::unique_ptr<CoverSpec> cover;  // heap slot keeps the surface address stable
  SectionNormSpec spec;
  int k = 0;
  int genus = 0;
  int marked_vertex = -1;
  double lambda = 0.0;  // measured spectral gap of the cover
  double delta = 0.0;   // systole estimate of the cover
};

struct BalancedFamilyReport {
  int d = 0;
  int base_degree = 0;
  std::vector<FamilyMember> members;
  double inf_bal = 0.0;
  double inf_lambda = 0.0;
  double inf_delta = 0.0;
};

BalancedFamilyReport build_balanced_family(const Surface& base, const SectionNormSpec& base_spec,
                                           const Eigen::VectorXi& cocycle,
                                           const std::vector<int>& k_list, int d,
                                           ScaleMode mode = ScaleMode::kSupOne);

}  // namespace curvlab
