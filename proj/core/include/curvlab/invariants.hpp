#pragma once

#include <vector>

#include <boost/rational.hpp>

namespace curvlab {

using Rational = boost::rational<long long>;

// Exact bookkeeping for a genus-g surface-group representation built from a
// cubic-root line bundle L with deg L = 3g-3-d (d = number of extra zeros):
//   Tol      = 2 - 2g + 2d/3 = -(2/3) deg L,
//   liftable = Tol integral  <=>  d = 0 mod 3,
//   stable   = 0 < deg L < 3g-3,
//   window   = 0 < d < g-1 (strictly below the maximal-representation band).
struct ToledoRecord {
  int g = 2;
  int d = 0;
  Rational tol;
  long long degL = 0;
  bool liftable = false;
  bool stable = false;
  bool in_af_window = false;
  bool milnor_wood_ok = false;  // 2-2g <= Tol <= 2g-2
};

ToledoRecord toledo(int g, int d);

struct AfWindowRow {
  int g = 2;
  std::vector<ToledoRecord> admissible;  // d = 1 .. g-2
};

std::vector<AfWindowRow> af_window_table(int g_min, int g_max);

// H4 variant: degree-d disc bundles need deg L = 4g-4-d and the curvature
// scale c = d/(2g-2), which equals the volume defect R exactly.
struct H4DegreeRecord {
  int g = 2;
  int d = 1;
  long long degL = 0;  // 4g - 4 - d
  Rational c;          // d / (2g-2)
  Rational R;          // same rational; asserted identical
};

H4DegreeRecord h4_degree_report(int g, int d);

}  // namespace curvlab
