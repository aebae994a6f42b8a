#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/surface.hpp"

namespace curvlab {

// Length of a shortest homologically nontrivial edge loop found in the
// 1-skeleton.  Any such loop is a genuine noncontractible closed curve, so
// the value is an upper bound for the true systole; the tag records whether
// it came from the estimator or from a user override.
struct SystoleEstimate {
  double value = 0.0;
  std::string tag;  // "upper-bound-estimate" or "user"
};

SystoleEstimate systole(const Surface& surface, std::optional<double> override_value = {});

// Basis of 2g integer 1-cocycles from a tree-cotree decomposition.  Each
// cocycle lives on undirected edge ids with values in {-1,0,+1}, read on the
// directed edge a->b (a<b as stored); traversing b->a negates it.  The sum
// around every oriented face boundary is zero, which is exactly what lets
// cyclic covers glue consistently.
struct HomologyBasis {
  std::vector<Eigen::VectorXi> cocycles;
  std::vector<int> leftover_edges;  // the 2g edges outside tree and cotree
};

HomologyBasis homology_cocycles(const TriangleMesh& mesh);

// Periods of an integer cocycle along the 2g fundamental cycles of a fixed
// deterministic spanning tree.  For the basis above this is the identity
// (duality); a combination cocycle is primitive iff the gcd of its periods
// is 1, the condition for a k-cyclic cover to stay connected.
Eigen::VectorXi cocycle_periods(const TriangleMesh& mesh, const Eigen::VectorXi& cocycle);

// Signed cocycle value on the directed edge u->v.
int cocycle_on_directed(const TriangleMesh& mesh, const Eigen::VectorXi& cocycle, int u, int v);

}  // namespace curvlab
